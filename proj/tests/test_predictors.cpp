#include <cmath>

#include "doctest.h"
#include "helpers.hpp"
#include "wloo/predictors.hpp"
#include "wloo/testbed.hpp"

using namespace wloo;

namespace {

Mat drop(const Mat& X, Eigen::Index i) {
    Mat out(X.rows() - 1, X.cols());
    for (Eigen::Index j = 0, r = 0; j < X.rows(); ++j)
        if (j != i) out.row(r++) = X.row(j);
    return out;
}

Vec drop(const Vec& y, Eigen::Index i) {
    Vec out(y.size() - 1);
    for (Eigen::Index j = 0, r = 0; j < y.size(); ++j)
        if (j != i) out[r++] = y[j];
    return out;
}

// posterior-mean prediction written with the n x n data-space formula
double sk_pred(const KernelSpec& k, const Mat& X, const Vec& y, const Mat& x) {
    return th::cross(k, X, x).col(0).dot(th::gram(k, X).ldlt().solve(y));
}

double ok_pred(const KernelSpec& k, const Mat& X, const Vec& y, const Mat& x) {
    const Mat K = th::gram(k, X);
    const Vec one = Vec::Ones(X.rows());
    const Vec a = K.ldlt().solve(one);
    const double tau = a.dot(y) / a.sum();
    return tau + th::cross(k, X, x).col(0).dot(K.ldlt().solve(Vec(y - tau * one)));
}

double poly_pred(const PolyBasis& b, double g2, const Mat& X, const Vec& y, const Mat& x) {
    // Phi Lambda Phi' + g2 I form; with lambda up to 1e6 this loses a few digits
    const Mat Phi = b.evaluate(X), phi = b.evaluate(x);
    const Mat L = b.lambda.asDiagonal();
    const Mat G = Phi * L * Phi.transpose() + g2 * Mat::Identity(X.rows(), X.rows());
    return (phi * L * Phi.transpose() * G.ldlt().solve(y))(0, 0);
}

template <class Pred>
Vec refit_residuals(const Mat& X, const Vec& y, Pred pred) {
    Vec e(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) e[i] = y[i] - pred(drop(X, i), drop(y, i), Mat(X.row(i)));
    return e;
}

}  // namespace

TEST_CASE("simple kriging weights, interpolation and LOO residuals") {
    const Mat X = th::uniform_points(2, 13, 2);
    const KernelSpec k(Family::Matern52, 4.0);
    const SimpleKriging p(k, X);
    const Mat P = th::uniform_points(2, 7, 3);
    CHECK(th::max_abs(p.weights(P) - th::gram(k, X).ldlt().solve(th::cross(k, X, P))) < 1e-10);
    CHECK(th::max_abs(p.weights(X) - Mat::Identity(13, 13)) < 1e-8);
    const Vec y = sample_gp(KernelSpec(Family::Matern32, 3.0), X, 5);
    const Vec e = refit_residuals(X, y, [&](const Mat& A, const Vec& b, const Mat& x) { return sk_pred(k, A, b, x); });
    CHECK(th::max_abs(p.loo_residuals(y) - e) < 1e-9);
}

TEST_CASE("simple kriging with a nugget smooths and keeps the closed form") {
    const Mat X = th::uniform_points(1, 12, 6);
    const KernelSpec k(Family::Matern32, 5.0, 0.1);
    const SimpleKriging p(k, X);
    const Vec y = sample_gp(KernelSpec(Family::Matern32, 5.0), X, 8);
    const Vec e = refit_residuals(X, y, [&](const Mat& A, const Vec& b, const Mat& x) { return sk_pred(k, A, b, x); });
    CHECK(th::max_abs(p.loo_residuals(y) - e) < 1e-10);
    CHECK(th::max_abs(p.weights(X) - Mat::Identity(12, 12)) > 0.01);
}

TEST_CASE("ordinary kriging weights sum to one and LOO matches refits") {
    const Mat X = th::uniform_points(2, 11, 10);
    const KernelSpec k(Family::Matern32, 3.0);
    const OrdinaryKriging p(k, X);
    const Mat P = th::uniform_points(2, 20, 11);
    const Mat W = p.weights(P);
    CHECK(th::max_abs(W.colwise().sum().array() - 1.0) < 1e-12);
    const Vec y = sample_gp(k, X, 12).array() + 3.0;
    for (Eigen::Index j = 0; j < 3; ++j) CHECK(W.col(j).dot(y) == doctest::Approx(ok_pred(k, X, y, Mat(P.row(j)))).epsilon(1e-10));
    const Vec e = refit_residuals(X, y, [&](const Mat& A, const Vec& b, const Mat& x) { return ok_pred(k, A, b, x); });
    CHECK(th::max_abs(p.loo_residuals(y) - e) < 1e-9);
    // R' 1 = 0
    CHECK(th::max_abs(p.loo_matrix().transpose() * Vec::Ones(11)) < 1e-10);
}

TEST_CASE("legendre basis is orthonormal on [0,1]") {
    // 20-point Gauss-Legendre rule mapped to [0,1]
    Eigen::VectorXd nodes(20), wts(20);
    {
        Mat J = Mat::Zero(20, 20);
        for (int i = 1; i < 20; ++i) J(i, i - 1) = J(i - 1, i) = i / std::sqrt(4.0 * i * i - 1.0);
        Eigen::SelfAdjointEigenSolver<Mat> es(J);
        nodes = (es.eigenvalues().array() + 1.0) / 2.0;
        wts = es.eigenvectors().row(0).array().square();
    }
    for (int a = 0; a < 8; ++a)
        for (int b = 0; b < 8; ++b) {
            double s = 0;
            for (int q = 0; q < 20; ++q) s += wts[q] * legendre01(a, nodes[q]) * legendre01(b, nodes[q]);
            CHECK(s == doctest::Approx(a == b ? 1.0 : 0.0).epsilon(1e-12).scale(1.0));
        }
    CHECK(legendre01(2, 0.75) == doctest::Approx(std::sqrt(5.0) * (3 * 0.25 - 1) / 2));
}

TEST_CASE("polynomial basis construction") {
    const PolyBasis t = PolyBasis::table_d2_m50();
    CHECK(t.indices.size() == 50);
    CHECK(t.lambda.size() == 50);
    CHECK(t.lambda[0] == doctest::Approx(1e6));
    int maxdeg = 0;
    for (const auto& l : t.indices) maxdeg = std::max(maxdeg, l[0] + l[1]);
    CHECK(maxdeg == 9);
    // lambda is nonincreasing along the table
    for (Eigen::Index j = 1; j < 50; ++j) CHECK(t.lambda[j] <= t.lambda[j - 1]);
    const PolyBasis b3 = PolyBasis::tensor_legendre(3, 10);
    CHECK(b3.indices.size() == 10);
    CHECK(b3.dim() == 3);
    CHECK_THROWS_AS(PolyBasis::tensor_legendre(0, 4), Error);
}

TEST_CASE("bayesian polynomial predictor against the data-space formula") {
    const Mat X = regular_grid(2, 6);
    const PolyBasis b = PolyBasis::tensor_legendre(2, 15);
    const BayesPolynomial p(b, 0.1, X);
    const Vec y = sample_gp(KernelSpec(Family::Matern32, 4.0), X, 3);
    const Mat P = th::uniform_points(2, 5, 4);
    const Vec eta = p.predict(y, P);
    for (Eigen::Index j = 0; j < 5; ++j) CHECK(eta[j] == doctest::Approx(poly_pred(b, 0.1, X, y, Mat(P.row(j)))).epsilon(1e-6));
    const Vec e = refit_residuals(X, y, [&](const Mat& A, const Vec& v, const Mat& x) { return poly_pred(b, 0.1, A, v, x); });
    CHECK(th::max_abs(p.loo_residuals(y) - e) < 1e-6);
}

TEST_CASE("empirical mean") {
    const Mat X = th::uniform_points(3, 9, 1);
    const EmpiricalMean p(X);
    const Vec y = Vec::LinSpaced(9, 1, 9);
    CHECK(p.predict(y, Mat(th::uniform_points(3, 2, 2)))[1] == doctest::Approx(5.0));
    const Vec e = p.loo_residuals(y);
    for (Eigen::Index i = 0; i < 9; ++i) CHECK(e[i] == doctest::Approx((9 * y[i] - y.sum()) / 8.0));
}

TEST_CASE("LOO operators report rank") {
    const Mat X = th::uniform_points(2, 10, 5);
    CHECK(SimpleKriging(KernelSpec(Family::Matern52, 3.0), X).loo_operator().full_rank);
    CHECK_FALSE(OrdinaryKriging(KernelSpec(Family::Matern52, 3.0), X).loo_operator().full_rank);
    CHECK_FALSE(EmpiricalMean(X).loo_operator().full_rank);
    CHECK_THROWS_AS(EmpiricalMean(X.topRows(1)).loo_operator(), Error);
}

TEST_CASE("library brute force agrees with the closed forms") {
    const Mat X = th::uniform_points(2, 10, 7);
    const SimpleKriging sk(KernelSpec(Family::Gaussian, 3.0), X);
    CHECK(th::max_abs(brute_force_loo_matrix(sk) - sk.loo_matrix()) < 1e-8);
    const EmpiricalMean em(X);
    CHECK(th::max_abs(brute_force_loo_matrix(em) - em.loo_matrix()) < 1e-14);
}

TEST_CASE("fixed mixture of predictors") {
    const Mat X = th::uniform_points(2, 10, 9);
    const auto a = std::make_shared<SimpleKriging>(KernelSpec(Family::Matern52, 3.0), X);
    const auto b = std::make_shared<OrdinaryKriging>(KernelSpec(Family::Matern32, 5.0), X);
    Vec nu(2);
    nu << 0.3, 0.7;
    const FixedMixture m({a, b}, nu);
    const Mat P = th::uniform_points(2, 4, 1);
    CHECK(th::max_abs(m.weights(P) - (0.3 * a->weights(P) + 0.7 * b->weights(P))) < 1e-14);
    const Vec y = Vec::LinSpaced(10, 0, 1);
    const Mat E = m.loo_errors(y);
    CHECK(th::max_abs(E.row(0).transpose() - a->loo_residuals(y)) < 1e-14);
    CHECK(th::max_abs(nu.transpose() * E - m.loo_residuals(y).transpose()) < 1e-12);
    Vec bad(2);
    bad << 0.5, 0.6;
    CHECK_THROWS_AS(FixedMixture({a, b}, bad), Error);
}

TEST_CASE("table predictor is tied to its support") {
    const Mat X = th::uniform_points(1, 4, 2), P = th::uniform_points(1, 6, 3);
    const TablePredictor t(X, P, Mat::Constant(4, 6, 0.25), EmpiricalMean(X).loo_matrix());
    CHECK(t.weights(P)(0, 0) == 0.25);
    try {
        t.weights(X);
        FAIL("expected DomainViolation");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DomainViolation);
    }
    CHECK_THROWS_AS(TablePredictor(X, P, Mat::Zero(3, 6), Mat::Zero(4, 4)), Error);
}
