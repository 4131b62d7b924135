#include <chrono>
#include <cmath>
#include <functional>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "commands.hpp"
#include "wloo/config.hpp"
#include "wloo/experiments.hpp"
#include "wloo/io.hpp"
#include "wloo/testbed.hpp"

namespace wloo::cli {
namespace {

struct Check {
    std::string name;
    std::function<bool(std::string&)> run;
};

double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

bool loo_matches(const LinearPredictor& p, std::string& msg) {
    const double e = max_abs(p.loo_matrix() - brute_force_loo_matrix(p));
    msg = "max |R - R_bf| = " + fmt(e);
    return e < 1e-8;
}

double min_eig(const Mat& A) {
    Eigen::SelfAdjointEigenSolver<Mat> es(0.5 * (A + A.transpose()), Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

struct Small {
    Mat X = sobol_points(2, 12, 7);
    IntegrationMeasure mu = IntegrationMeasure::uniform(sobol_points(2, 256));
    KernelSpec truth{Family::Matern32, 4.0};
    SimpleKriging sk{KernelSpec(Family::Matern52, 3.0), X};
    Mat W = sk.weights(mu.points);
    Mat R = sk.loo_matrix();
};

const Small& small() {
    static const Small s;
    return s;
}

std::vector<Check> checks() {
    std::vector<Check> c;
    const auto X = sobol_points(2, 15, 3);

    c.push_back({"dubrule_simple_kriging", [X](std::string& m) {
                     return loo_matches(SimpleKriging(KernelSpec(Family::Matern52, 4.0), X), m);
                 }});
    c.push_back({"dubrule_ordinary_kriging", [X](std::string& m) {
                     return loo_matches(OrdinaryKriging(KernelSpec(Family::Matern32, 3.0), X), m);
                 }});
    c.push_back({"dubrule_bayes_polynomial", [X](std::string& m) {
                     return loo_matches(BayesPolynomial(PolyBasis::tensor_legendre(2, 10), 0.1, X), m);
                 }});
    c.push_back({"dubrule_empirical_mean", [X](std::string& m) { return loo_matches(EmpiricalMean(X), m); }});
    c.push_back({"dubrule_nugget", [X](std::string& m) {
                     return loo_matches(SimpleKriging(KernelSpec(Family::Gaussian, 2.0, 0.01), X), m);
                 }});

    c.push_back({"psd_Q", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle B = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     const double e = min_eig(B.Q);
                     m = "min eig = " + fmt(e);
                     return e > -1e-10 * B.Q.diagonal().maxCoeff();
                 }});
    c.push_back({"psd_S", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle B = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     const double e = min_eig(B.S);
                     m = "min eig = " + fmt(e);
                     return e > -1e-10 * B.S.diagonal().maxCoeff();
                 }});
    c.push_back({"psd_gap_loo_vs_oracle", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle Bt = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     const DominanceGaps g = estimator_dominance_check(Bt, Bt);
                     m = "gap = " + fmt(g.loo_minus_oracle) + ", qf = " + fmt(g.loo_minus_oracle_qf);
                     return g.loo_minus_oracle >= -1e-9 * g.mse_loo &&
                            std::abs(g.loo_minus_oracle - g.loo_minus_oracle_qf) <= 1e-8 * g.mse_loo;
                 }});
    c.push_back({"psd_gap_assumed_vs_oracle", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle Bt = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     bool ok = true;
                     double worst = INFINITY;
                     for (double th : {0.5, 2.0, 10.0, 40.0}) {
                         const MomentBundle Be = build_bundle(s.R, s.W, KernelSpec(Family::Matern32, th), s.X, s.mu);
                         const DominanceGaps g = estimator_dominance_check(Be, Bt);
                         worst = std::min(worst, g.assumed_minus_oracle);
                         ok = ok && g.assumed_minus_oracle >= -1e-9 * g.mse_loo;
                     }
                     m = "min gap = " + fmt(worst);
                     return ok;
                 }});
    c.push_back({"blup_constraint", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle B = build_bundle(s.R, s.W, KernelSpec(Family::Matern32, 6.0), s.X, s.mu);
                     const Vec g = blup_weights(B);
                     const double e = rel(g.dot(B.u), B.J);
                     m = "|g'u - J| / J = " + fmt(e);
                     return e < 1e-10;
                 }});
    c.push_back({"blup_matched_mean", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle B = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     const PerformanceReport r = performance_report(blup_weights(B), B, false);
                     m = "bias = " + fmt(r.bias);
                     return std::abs(r.bias) < 1e-10 * B.J;
                 }});
    c.push_back({"limit_consistency", [](std::string& m) {
                     const auto& s = small();
                     BundleOptions o;
                     o.factorize = false;
                     o.keep_c = false;
                     const MomentBundle B = build_bundle(s.R, s.W, KernelSpec(Family::Matern32, 1e6), s.X, s.mu, o);
                     const MomentBundle L = independent_limit_bundle(s.R, s.W, s.mu, o);
                     const double e = std::max({max_abs(B.u - L.u) / max_abs(L.u), max_abs(B.S - L.S) / max_abs(L.S),
                                                max_abs(B.b - L.b) / max_abs(L.b), rel(B.J, L.J)});
                     m = "max rel = " + fmt(e);
                     return e < 1e-3;
                 }});
    c.push_back({"flat_limit_sum_to_one", [X](std::string& m) {
                     const OrdinaryKriging ok(KernelSpec(Family::Matern52, 2.0), X);
                     const auto mu = IntegrationMeasure::uniform(sobol_points(2, 128));
                     const FlatLimitDiagnostics f = flat_limit_diagnostics(ok.loo_matrix(), ok.weights(mu.points), mu);
                     m = "J0 = " + fmt(f.J0);
                     return f.sum_to_one && f.J0 < 1e-20;
                 }});
    c.push_back({"flat_limit_simple_kriging", [](std::string& m) {
                     const auto& s = small();
                     const FlatLimitDiagnostics f = flat_limit_diagnostics(s.R, s.W, s.mu);
                     m = "J0 = " + fmt(f.J0);
                     return !f.sum_to_one && f.rank_one_S && f.J0 > 0.0;
                 }});
    c.push_back({"ok_loo_shift_invariant", [X](std::string& m) {
                     const OrdinaryKriging ok(KernelSpec(Family::Matern32, 3.0), X);
                     const Vec y = sample_gp(KernelSpec(Family::Matern32, 3.0), X, 11);
                     const double a = ise_loo(ok.loo_residuals(y)).value;
                     const double b = ise_loo(ok.loo_residuals(Vec(y.array() + 5.0))).value;
                     m = "rel = " + fmt(rel(b, a));
                     return rel(b, a) < 1e-9;
                 }});
    c.push_back({"mixture_single_kernel", [](std::string& m) {
                     const auto& s = small();
                     const KernelSpec k(Family::Matern52, 5.0);
                     const MomentBundle A = build_bundle(s.R, s.W, k, s.X, s.mu);
                     const MomentBundle B = mixture_bundle({k}, Vec::Ones(1), s.R, s.W, s.X, s.mu);
                     const double e = max_abs(A.S - B.S) + max_abs(A.b - B.b);
                     m = "diff = " + fmt(e);
                     return e < 1e-14;
                 }});
    c.push_back({"kernels_unit_at_zero", [](std::string& m) {
                     for (Family f : {Family::Matern12, Family::Matern32, Family::Matern52, Family::Gaussian,
                                      Family::InverseMultiquadric})
                         if (psi(f, 0.0) != 1.0) {
                             m = family_name(f);
                             return false;
                         }
                     return true;
                 }});
    c.push_back({"kernel_golden_values", [](std::string& m) {
                     // psi at a = 1
                     const double e = std::max({rel(psi(Family::Matern12, 1.0), std::exp(-1.0)),
                                                rel(psi(Family::Matern32, 1.0), (1 + std::sqrt(3.0)) * std::exp(-std::sqrt(3.0))),
                                                rel(psi(Family::Matern52, 1.0), (1 + std::sqrt(5.0) + 5.0 / 3.0) * std::exp(-std::sqrt(5.0))),
                                                rel(psi(Family::Gaussian, 1.0), std::exp(-1.0)),
                                                rel(psi(Family::InverseMultiquadric, 1.0), 0.5)});
                     m = "max rel = " + fmt(e);
                     return e < 1e-15;
                 }});
    c.push_back({"nugget_diagonal_only", [X](std::string& m) {
                     const KernelSpec k(Family::Matern32, 2.0, 0.3);
                     const Mat K = kernel_matrix(k, X);
                     const Mat C = cross_matrix(k, X, X);
                     const double e = max_abs(K - C - 0.3 * Mat::Identity(X.rows(), X.rows()));
                     m = "diff = " + fmt(e);
                     return e < 1e-15;
                 }});
    c.push_back({"bordered_inverse", [X](std::string& m) {
                     const Mat K = kernel_matrix(KernelSpec(Family::Matern52, 3.0), X);
                     const Eigen::Index n = K.rows();
                     Mat A = Mat::Zero(n + 1, n + 1);
                     A.topLeftCorner(n, n) = K;
                     A.col(n).head(n).setOnes();
                     A.row(n).head(n).setOnes();
                     const double e = max_abs(A * bordered_inverse(K) - Mat::Identity(n + 1, n + 1));
                     m = "|A A^-1 - I| = " + fmt(e);
                     return e < 1e-8;
                 }});
    c.push_back({"golden_sobol_3d", [](std::string& m) {
                     const Mat P = sobol_points(3, 4);
                     Mat G(4, 3);
                     G << 0, 0, 0, 0.5, 0.5, 0.5, 0.75, 0.25, 0.25, 0.25, 0.75, 0.75;
                     const double e = max_abs(P - G);
                     m = "diff = " + fmt(e);
                     return e == 0.0;
                 }});
    c.push_back({"golden_table1_blup", [](std::string& m) {
                     const GridSetup s = grid_setup();
                     const Table1Row r = table1_row(*table1_blup(s.X), s);
                     const double e = std::max({rel(r.e_ise, 0.187), rel(r.e_loo, 0.731), rel(r.mse_loo, 0.338)});
                     m = "E{ISE} = " + fmt(r.e_ise) + ", max rel = " + fmt(e);
                     return e < 0.02;
                 }});
    c.push_back({"rng_deterministic", [](std::string& m) {
                     Rng a(42, 3), b(42, 3), d(42, 4);
                     const double x = a.normal();
                     m = "first normal = " + fmt(x);
                     return x == b.normal() && a.next_u64() == b.next_u64() && Rng(42, 3).next_u64() != d.next_u64();
                 }});
    c.push_back({"config_round_trip", [](std::string& m) {
                     Config cfg;
                     cfg.set("kernel.theta", "loo");
                     cfg.set("design.file", "a \"b\" # c");
                     const Config back = Config::parse(cfg.serialize());
                     m = std::to_string(cfg.serialize().size()) + " bytes";
                     return back == cfg;
                 }});
    c.push_back({"csv_round_trip", [](std::string& m) {
                     Table t;
                     t.header = {"x1", "x2"};
                     t.add({fmt(0.1), fmt(1.0 / 3.0)});
                     std::stringstream ss;
                     write_csv(ss, t);
                     const NumericCsv csv = read_csv(ss);
                     m = std::to_string(ss.str().size()) + " bytes";
                     return csv.data(0, 0) == 0.1 && csv.data(0, 1) == 1.0 / 3.0;
                 }});
    c.push_back({"packing_distinct", [](std::string& m) {
                     const Mat cand = sobol_points(2, 512);
                     const Mat D = greedy_packing(cand, 30, 0.2, 5);
                     const double pr = packing_radius(D);
                     m = "packing radius = " + fmt(pr);
                     return D.rows() == 30 && pr > 0.0;
                 }});
    c.push_back({"loo_estimator_mean", [](std::string& m) {
                     const auto& s = small();
                     const MomentBundle B = build_bundle(s.R, s.W, s.truth, s.X, s.mu);
                     const Eigen::Index n = s.X.rows();
                     const PerformanceReport r = performance_report(Vec::Constant(n, 1.0 / n), B, false);
                     const double e = rel(r.mean_estimate, B.u.mean());
                     m = "rel = " + fmt(e);
                     return e < 1e-12;
                 }});
    c.push_back({"theta_loo_finite", [X](std::string& m) {
                     const Vec y = sample_gp(KernelSpec(Family::Matern52, 4.0), X, 17);
                     const double t = theta_loo(y, X, Family::Matern52, MeanMode::Zero);
                     m = "theta = " + fmt(t);
                     return std::isfinite(t) && t >= 1e-2 && t <= 1e3;
                 }});
    return c;
}

}  // namespace

int run_selftest(std::ostream& out) {
    int failed = 0;
    const auto all = checks();
    for (const auto& ch : all) {
        const auto t0 = std::chrono::steady_clock::now();
        std::string msg;
        bool ok = false;
        try {
            ok = ch.run(msg);
        } catch (const std::exception& e) {
            msg = std::string("threw: ") + e.what();
        }
        const double ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        if (!ok) ++failed;
        out << (ok ? "PASS " : "FAIL ") << std::left << std::setw(28) << ch.name << " " << std::fixed
            << std::setprecision(1) << ms << " ms  " << std::defaultfloat << msg << "\n";
    }
    out << (all.size() - static_cast<std::size_t>(failed)) << "/" << all.size() << " checks passed\n";
    return failed;
}

}  // namespace wloo::cli
