#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "helpers.hpp"
#include "oracles/golden_values.hpp"
#include "wloo/designs.hpp"
#include "wloo/predictors.hpp"
#include "wloo/testbed.hpp"

using namespace wloo;

TEST_CASE("unscrambled sobol matches the scipy sequence") {
    const Mat P = sobol_points(4, 16);
    for (Eigen::Index i = 0; i < 16; ++i)
        for (Eigen::Index j = 0; j < 4; ++j) CHECK(P(i, j) == golden::sobol4_first16[i][j]);
}

TEST_CASE("sobol points are dyadically stratified, with and without a shift") {
    for (std::optional<std::uint64_t> s : {std::optional<std::uint64_t>{}, std::optional<std::uint64_t>{99}}) {
        const Mat P = sobol_points(2, 64, s);
        for (int j = 0; j < 2; ++j) {
            std::set<int> cells;
            for (Eigen::Index i = 0; i < 64; ++i) cells.insert(static_cast<int>(P(i, j) * 64));
            CHECK(cells.size() == 64);
        }
        // 8 x 8 elementary boxes hold one point each
        std::set<int> boxes;
        for (Eigen::Index i = 0; i < 64; ++i) boxes.insert(static_cast<int>(P(i, 0) * 8) * 8 + static_cast<int>(P(i, 1) * 8));
        CHECK(boxes.size() == 64);
    }
}

TEST_CASE("scrambling is seeded and deterministic") {
    const Mat a = sobol_points(3, 32, 5), b = sobol_points(3, 32, 5), c = sobol_points(3, 32, 6);
    CHECK(a == b);
    CHECK(th::max_abs(a - c) > 0.0);
    CHECK(th::max_abs(a - sobol_points(3, 32)) > 0.0);
    CHECK((a.array() >= 0).all());
    CHECK((a.array() < 1).all());
}

TEST_CASE("sobol argument checks") {
    CHECK_THROWS_AS(sobol_points(0, 4), Error);
    CHECK_THROWS_AS(sobol_points(22, 4), Error);
    CHECK_THROWS_AS(sobol_points(2, 0), Error);
    CHECK_NOTHROW(sobol_points(21, 8));
}

TEST_CASE("regular grid") {
    const Mat G = regular_grid(2, 10);
    CHECK(G.rows() == 100);
    CHECK(G.minCoeff() == 0.0);
    CHECK(G.maxCoeff() == 1.0);
    CHECK(G(1, 1) == doctest::Approx(1.0 / 9.0));
    CHECK(G(1, 0) == 0.0);
    CHECK(packing_radius(G) == doctest::Approx(0.5 / 9.0));
    CHECK_THROWS_AS(regular_grid(2, 1), Error);
}

TEST_CASE("greedy packing without relaxation is farthest-point from the centre") {
    const Mat cand = sobol_points(2, 256);
    const Mat X = greedy_packing(cand, 12, 0.0, 1);
    CHECK(X(0, 0) == 0.5);
    CHECK(X(0, 1) == 0.5);
    for (Eigen::Index k = 1; k < 12; ++k) {
        // the new point is a candidate maximising the distance to the previous ones
        double best = 0;
        for (Eigen::Index j = 0; j < cand.rows(); ++j) {
            double m = INFINITY;
            for (Eigen::Index i = 0; i < k; ++i) m = std::min(m, (cand.row(j) - X.row(i)).norm());
            best = std::max(best, m);
        }
        double got = INFINITY;
        for (Eigen::Index i = 0; i < k; ++i) got = std::min(got, (X.row(k) - X.row(i)).norm());
        CHECK(got == doctest::Approx(best).epsilon(1e-12));
    }
}

TEST_CASE("relaxed greedy packing stays inside the hull and is seeded") {
    const Mat cand = sobol_points(2, 1024);
    const Mat a = greedy_packing(cand, 40, 0.2, 3), b = greedy_packing(cand, 40, 0.2, 3);
    CHECK(a == b);
    CHECK(th::max_abs(a - greedy_packing(cand, 40, 0.2, 4)) > 0.0);
    CHECK((a.array() >= 0).all());
    CHECK((a.array() <= 1).all());
    const EfficiencyBounds e = efficiency_bounds(cand, a);
    CHECK(e.packing > 0.0);
    CHECK(e.packing <= 1.0 + 1e-12);
    CHECK(e.covering > 0.0);
    CHECK(e.covering <= 1.0 + 1e-12);
}

TEST_CASE("greedy packing errors") {
    const Mat cand = sobol_points(2, 8);
    CHECK_THROWS_AS(greedy_packing(cand, 9, 0.2, 1), Error);
    CHECK_THROWS_AS(greedy_packing(Mat(0, 2), 1, 0.2, 1), Error);
    CHECK_THROWS_AS(greedy_packing(cand, 3, 1.0, 1), Error);
}

TEST_CASE("nearest-neighbour distances against brute force") {
    const Mat X = th::uniform_points(2, 15, 8), P = th::uniform_points(2, 60, 9);
    for (Eigen::Index k : {1, 3, 5}) {
        double worst = 0;
        for (Eigen::Index j = 0; j < P.rows(); ++j) {
            std::vector<double> d;
            for (Eigen::Index i = 0; i < X.rows(); ++i) d.push_back(th::dist(P, j, X, i));
            std::sort(d.begin(), d.end());
            worst = std::max(worst, d[static_cast<std::size_t>(k - 1)]);
        }
        CHECK(nn_distance(P, X, k) == doctest::Approx(worst).epsilon(1e-15));
    }
    CHECK(covering_radius(P, X) == nn_distance(P, X, 1));
    CHECK_THROWS_AS(nn_distance(P, X, 16), Error);
    CHECK_THROWS_AS(packing_radius(Mat(1, 2)), Error);
}

TEST_CASE("theta from a coverage rule") {
    for (Family f : {Family::Matern32, Family::Matern52, Family::InverseMultiquadric}) {
        const double t = theta_from_coverage(f, 0.3, 0.25);
        CHECK(th::corr(f, t, 0.3) == doctest::Approx(0.25).epsilon(1e-9));
    }
    // the rule used for the environmental predictor
    CHECK(psi(Family::Matern32, 1.5546) == doctest::Approx(0.25).epsilon(1e-4));
    CHECK_THROWS_AS(theta_from_coverage(Family::Matern32, 0.3, 1.0), Error);
    CHECK_THROWS_AS(theta_from_coverage(Family::Matern32, 0.0, 0.5), Error);
}

namespace {

// mean squared residual of n explicit refits
double refit_loo(const Vec& y, const Mat& X, const KernelSpec& k, bool constant) {
    const Eigen::Index n = X.rows();
    double s = 0;
    for (Eigen::Index i = 0; i < n; ++i) {
        Mat Xi(n - 1, X.cols());
        Vec yi(n - 1);
        for (Eigen::Index j = 0, r = 0; j < n; ++j)
            if (j != i) {
                Xi.row(r) = X.row(j);
                yi[r++] = y[j];
            }
        const Mat K = th::gram(k, Xi);
        const Mat c = th::cross(k, Xi, X.row(i));
        double pred;
        if (!constant) {
            pred = (K.ldlt().solve(c)).col(0).dot(yi);
        } else {
            const Vec a = K.ldlt().solve(Vec(Vec::Ones(n - 1)));
            const double tau = a.dot(yi) / a.sum();
            pred = tau + K.ldlt().solve(c).col(0).dot(yi - Vec::Constant(n - 1, tau));
        }
        s += (y[i] - pred) * (y[i] - pred);
    }
    return s / static_cast<double>(n);
}

}  // namespace

TEST_CASE("LOO objective equals explicit refits") {
    const Mat X = th::uniform_points(2, 14, 21);
    const Vec y = evaluate(environmental, X);
    for (double t : {2.0, 6.0}) {
        const KernelSpec k(Family::Matern52, t);
        CHECK(loo_objective(y, X, Family::Matern52, t, MeanMode::Zero) ==
              doctest::Approx(refit_loo(y, X, k, false)).epsilon(1e-8));
        CHECK(loo_objective(y, X, Family::Matern52, t, MeanMode::Constant) ==
              doctest::Approx(refit_loo(y, X, k, true)).epsilon(1e-8));
    }
    const KernelSpec kn(Family::InverseMultiquadric, 3.0, 0.05);
    CHECK(loo_objective(y, X, Family::InverseMultiquadric, 3.0, MeanMode::Zero, 0.05) ==
          doctest::Approx(refit_loo(y, X, kn, false)).epsilon(1e-8));
}

TEST_CASE("theta_loo beats a fine scan") {
    const Mat X = sobol_points(1, 12, 2);
    const Vec y = sample_gp(KernelSpec(Family::Matern52, 6.0), X, 4);
    const double t = theta_loo(y, X, Family::Matern52, MeanMode::Zero);
    const double best = loo_objective(y, X, Family::Matern52, t, MeanMode::Zero);
    for (int k = 0; k <= 400; ++k) {
        const double s = std::exp(std::log(1e-2) + k * (std::log(1e3) - std::log(1e-2)) / 400);
        CHECK(best <= loo_objective(y, X, Family::Matern52, s, MeanMode::Zero) * (1 + 1e-6));
    }
}

TEST_CASE("theta_loo rejects constant data under a constant mean") {
    const Mat X = sobol_points(2, 8);
    try {
        theta_loo(Vec::Constant(8, 3.0), X, Family::Matern32, MeanMode::Constant);
        FAIL("expected DegenerateData");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::DegenerateData);
    }
    CHECK_THROWS_AS(theta_loo(Vec::Zero(2), X.topRows(2), Family::Matern32, MeanMode::Zero), Error);
}

TEST_CASE("ill-conditioned kernels are excluded from LOO selection") {
    const Mat X = sobol_points(2, 60);
    const Vec y = evaluate(environmental, X);
    CHECK(std::isinf(loo_objective(y, X, Family::Gaussian, 1e-2, MeanMode::Zero)));
    CHECK(std::isfinite(loo_objective(y, X, Family::Gaussian, 20.0, MeanMode::Zero)));
}

TEST_CASE("uniform measure") {
    const IntegrationMeasure m = IntegrationMeasure::uniform(sobol_points(2, 16));
    CHECK(m.weights.sum() == doctest::Approx(1.0));
    CHECK(m.size() == 16);
    CHECK_THROWS_AS(IntegrationMeasure::uniform(Mat(0, 2)), Error);
}
