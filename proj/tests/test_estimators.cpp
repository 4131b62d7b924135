#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "wloo/estimators.hpp"
#include "wloo/testbed.hpp"

using namespace wloo;

namespace {

struct Case {
    Mat X;
    IntegrationMeasure mu;
    Mat W, R;
    MomentBundle B;
};

Case make_case(const KernelSpec& kp, const KernelSpec& ke, Eigen::Index n, unsigned seed, bool ordinary = false) {
    Case c;
    c.X = th::uniform_points(2, n, seed);
    c.mu = IntegrationMeasure::uniform(th::uniform_points(2, 64, seed + 7));
    std::unique_ptr<LinearPredictor> p;
    if (ordinary)
        p = std::make_unique<OrdinaryKriging>(kp, c.X);
    else
        p = std::make_unique<SimpleKriging>(kp, c.X);
    c.W = p->weights(c.mu.points);
    c.R = p->loo_matrix();
    c.B = build_bundle(c.R, c.W, ke, c.X, c.mu, {.compute_V = true});
    return c;
}

double mse(const Vec& g, const MomentBundle& B) { return g.dot(B.S * g) - 2 * g.dot(B.b) + B.J * B.J + 2 * *B.V; }

}  // namespace

TEST_CASE("LOO estimate is the mean squared residual") {
    Vec e(4);
    e << 1, -2, 3, 0;
    const IseEstimate r = ise_loo(e);
    CHECK(r.value == doctest::Approx(3.5));
    CHECK(r.gamma.sum() == doctest::Approx(1.0));
    CHECK_THROWS_AS(ise_loo(Vec()), Error);
}

TEST_CASE("BLP and BLUP weights solve their normal equations") {
    const Case c = make_case(KernelSpec(Family::Matern52, 4.0), KernelSpec(Family::Matern32, 6.0), 9, 1);
    const Vec g = blp_weights(c.B);
    CHECK(th::max_abs(g - c.B.S.fullPivLu().solve(c.B.b)) < 1e-9);

    Mat kkt = Mat::Zero(10, 10);
    kkt.topLeftCorner(9, 9) = c.B.S;
    kkt.block(0, 9, 9, 1) = c.B.u;
    kkt.block(9, 0, 1, 9) = c.B.u.transpose();
    Vec rhs(10);
    rhs << c.B.b, c.B.J;
    const Vec sol = kkt.fullPivLu().solve(rhs);
    const Vec gu = blup_weights(c.B);
    CHECK(th::max_abs(gu - sol.head(9)) < 1e-8);
    CHECK(gu.dot(c.B.u) == doctest::Approx(c.B.J).epsilon(1e-10));
}

TEST_CASE("BLP has the smallest MSE and BLUP is unbiased") {
    const Case c = make_case(KernelSpec(Family::Matern52, 4.0), KernelSpec(Family::Matern32, 6.0), 9, 2);
    const Vec g = blp_weights(c.B), gu = blup_weights(c.B);
    const Vec gl = Vec::Constant(9, 1.0 / 9);
    const PerformanceReport pb = performance_report(g, c.B, true);
    const PerformanceReport pu = performance_report(gu, c.B, true);
    const PerformanceReport pl = performance_report(gl, c.B, true);
    CHECK(pb.mse == doctest::Approx(mse(g, c.B)));
    CHECK(pb.mse <= pu.mse);
    CHECK(pu.mse <= pl.mse);
    CHECK(std::abs(pu.bias) < 1e-12);
    CHECK(pl.bias == doctest::Approx(gl.dot(c.B.u) - c.B.J));
    CHECK(pb.e_ise == c.B.J);
    std::mt19937 gen(3);
    std::normal_distribution<double> nd(0, 0.05);
    for (int k = 0; k < 20; ++k) {
        Vec d(9);
        for (auto& v : d) v = nd(gen);
        CHECK(mse(g + d, c.B) >= pb.mse);
    }
    CHECK(pl.variance == doctest::Approx(2 * gl.dot(c.B.Q.cwiseAbs2() * gl)));
    CHECK_THROWS_AS(performance_report(Vec::Ones(3), c.B, false), Error);
}

TEST_CASE("matched BLUP bias formula") {
    const KernelSpec k(Family::Matern32, 5.0);
    const Case c = make_case(k, k, 8, 4);
    const Mat Q2 = 2 * c.B.Q.cwiseAbs2();
    const double expect = -c.B.J / (1.0 + c.B.u.dot(Q2.fullPivLu().solve(c.B.u)));
    CHECK(matched_blp_bias(c.B) == doctest::Approx(expect).epsilon(1e-10));
    CHECK(performance_report(blp_weights(c.B), c.B, false).bias == doctest::Approx(expect).epsilon(1e-8));
}

TEST_CASE("pointwise estimates and clamping") {
    const Case c = make_case(KernelSpec(Family::Matern52, 4.0), KernelSpec(Family::Matern12, 3.0), 10, 5);
    const Vec y = sample_gp(KernelSpec(Family::Matern12, 3.0), c.X, 9);
    const Vec eps = c.R.transpose() * y;
    const Vec e2 = eps.cwiseAbs2();
    const Mat Sinv = c.B.S.inverse();
    const Vec raw = c.B.C.transpose() * (Sinv * e2);
    CHECK(th::max_abs(blp_pointwise(c.B, eps, false) - raw) < 1e-8);
    CHECK(th::max_abs(blp_pointwise(c.B, eps, true) - raw.cwiseMax(0.0)) < 1e-8);
    CHECK(blp_pointwise(c.B, eps, c.B.C.col(3), false) == doctest::Approx(raw[3]).epsilon(1e-8));
    const IseEstimate un = ise_blp(c.B, eps, false);
    CHECK(un.estimator == "BLP");
    CHECK(un.value == doctest::Approx(raw.dot(c.mu.weights)).epsilon(1e-8));
    const IseEstimate cl = ise_blp(c.B, eps, true);
    CHECK(cl.estimator == "BLP+");
    CHECK(cl.value >= un.value - 1e-12);
    CHECK(cl.value == doctest::Approx(raw.cwiseMax(0.0).dot(c.mu.weights)).epsilon(1e-8));
    // the BLUP pointwise values integrate to the unclamped BLUP
    CHECK(blup_pointwise(c.B, eps, false).dot(c.mu.weights) ==
          doctest::Approx(ise_blup(c.B, eps, false).value).epsilon(1e-8));
    CHECK_THROWS_AS(ise_blp(c.B, Vec::Ones(3)), Error);
}

TEST_CASE("trend correction") {
    const KernelSpec kp(Family::Matern52, 4.0), ke(Family::Matern32, 5.0);
    const Case c = make_case(kp, ke, 9, 6);
    const Vec y = sample_gp(ke, c.X, 2).array() + 4.0;
    const Mat K = th::gram(ke, c.X);
    const Vec a = K.ldlt().solve(Vec::Ones(9));
    const double tau = a.dot(y) / a.sum();
    const Vec eps = c.R.transpose() * (y.array() - tau).matrix();
    double amount = 0;
    for (Eigen::Index j = 0; j < 64; ++j) amount += std::pow(1 - c.W.col(j).sum(), 2) / 64.0;
    amount *= tau * tau;
    const IseEstimate t = trend_corrected_ise(y, c.R, c.W, ke, c.X, c.B, false, false);
    CHECK(t.trend_correction);
    CHECK(t.tau_hat == doctest::Approx(tau));
    CHECK(t.trend_amount == doctest::Approx(amount));
    CHECK(t.value == doctest::Approx(blp_weights(c.B).dot(eps.cwiseAbs2()) + amount).epsilon(1e-9));

    // for an ordinary kriging predictor the correction vanishes and the residuals ignore tau
    const Case o = make_case(kp, ke, 9, 6, true);
    const IseEstimate to = trend_corrected_ise(y, o.R, o.W, ke, o.X, o.B, true, true);
    CHECK(to.trend_amount < 1e-20);
    CHECK(to.value == doctest::Approx(ise_blup(o.B, o.R.transpose() * y, true).value).epsilon(1e-9));
}

TEST_CASE("estimate_all collects the three estimators") {
    const KernelSpec k(Family::Matern32, 5.0);
    const Case c = make_case(k, k, 8, 7);
    const Vec y = sample_gp(k, c.X, 5);
    const EstimateSet s = estimate_all(y, c.R, c.W, k, c.X, c.B, false);
    const Vec eps = c.R.transpose() * y;
    CHECK(s.loo.value == doctest::Approx(eps.squaredNorm() / 8));
    CHECK(s.blp.value == doctest::Approx(ise_blp(c.B, eps, true).value));
    CHECK(s.blup.value == doctest::Approx(ise_blup(c.B, eps, true).value));
    const EstimateSet t = estimate_all(y, c.R, c.W, k, c.X, c.B, true);
    CHECK(t.blp.trend_correction);
}

TEST_CASE("variance estimators") {
    const KernelSpec k(Family::Matern32, 4.0);
    const Case c = make_case(k, k, 10, 8);
    const Vec y = 2.0 * sample_gp(k, c.X, 6);
    const Sigma2Estimates s = sigma2_estimators(y, k, c.X, c.B);
    const Mat K = th::gram(k, c.X);
    CHECK(s.ml == doctest::Approx(y.dot(K.ldlt().solve(y)) / 10));
    // LOO residual over its own predictive variance, by refits
    double loo = 0;
    for (Eigen::Index i = 0; i < 10; ++i) {
        Mat Xi(9, 2);
        Vec yi(9);
        for (Eigen::Index j = 0, r = 0; j < 10; ++j)
            if (j != i) {
                Xi.row(r) = c.X.row(j);
                yi[r++] = y[j];
            }
        const Mat Ki = th::gram(k, Xi);
        const Vec ki = th::cross(k, Xi, Mat(c.X.row(i))).col(0);
        const double e = y[i] - ki.dot(Ki.ldlt().solve(yi));
        loo += e * e / (1 - ki.dot(Ki.ldlt().solve(ki)));
    }
    CHECK(s.loo == doctest::Approx(loo / 10).epsilon(1e-8));
    const Vec eps = c.R.transpose() * y;
    CHECK(s.blup == doctest::Approx(ise_blup(c.B, eps, false).value / c.B.J));

    // the BLUP-based estimate is unbiased for sigma^2
    double mean = 0;
    for (int r = 0; r < 2000; ++r) mean += sigma2_estimators(3.0 * sample_gp(k, c.X, 1000 + r), k, c.X, c.B).blup / 2000;
    CHECK(mean == doctest::Approx(9.0).epsilon(0.08));
    CHECK_THROWS_AS(sigma2_estimators(Vec::Ones(3), k, c.X, c.B), Error);
}

TEST_CASE("tail statistics") {
    const Vec v = Vec::LinSpaced(10, 10, 1);
    const TailStats t = tail_stats(v, 0.9);
    CHECK(t.quantile == 9);
    CHECK(t.cvar == doctest::Approx(9.5));
    CHECK(t.unreliable);
    CHECK(tail_stats(v, 0.05).quantile == 1);
    CHECK(tail_stats(v, 0.5).cvar == doctest::Approx(7.5));
    CHECK_THROWS_AS(tail_stats(v, 1.0), Error);
    CHECK_THROWS_AS(tail_stats(Vec(), 0.5), Error);
}

TEST_CASE("optimal mixture weights") {
    Mat E(3, 6);
    E << 1, 2, 0, 1, -1, 0.5, 0.3, 0.1, 0.2, -0.4, 0.2, 0.1, 2, 1, 1, 0, 1, 2;
    const Vec g = Vec::Constant(6, 1.0 / 6);
    const Vec nu = optimal_mixture_weights(E, g);
    CHECK(nu.sum() == doctest::Approx(1.0));
    const Mat G = E * g.asDiagonal() * E.transpose();
    const double best = nu.dot(G * nu);
    Vec d(3);
    d << 1, -0.5, -0.5;
    CHECK((nu + 0.01 * d).dot(G * (nu + 0.01 * d)) > best);
    CHECK((nu - 0.01 * d).dot(G * (nu - 0.01 * d)) > best);
    Mat E2(2, 6);
    E2.row(0) = E.row(0);
    E2.row(1) = E.row(0);
    CHECK_THROWS_AS(optimal_mixture_weights(E2, g), Error);
    CHECK_THROWS_AS(optimal_mixture_weights(E, Vec::Ones(2)), Error);
}

TEST_CASE("dominance gaps are nonnegative") {
    const KernelSpec kp(Family::Matern52, 4.0);
    const Case t = make_case(kp, KernelSpec(Family::Matern32, 8.0), 9, 9);
    const Case e = make_case(kp, KernelSpec(Family::Gaussian, 3.0), 9, 9);
    const DominanceGaps d = estimator_dominance_check(e.B, t.B);
    CHECK(d.loo_minus_oracle >= 0);
    CHECK(d.assumed_minus_oracle >= 0);
    CHECK(d.loo_minus_oracle == doctest::Approx(d.loo_minus_oracle_qf).epsilon(1e-6));
    CHECK(d.assumed_minus_oracle == doctest::Approx(d.assumed_minus_oracle_qf).epsilon(1e-6));
}
