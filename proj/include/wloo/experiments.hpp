#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "wloo/designs.hpp"
#include "wloo/estimators.hpp"
#include "wloo/io.hpp"
#include "wloo/predictors.hpp"

namespace wloo {

struct ExperimentOptions {
    std::uint64_t seed = 20240101;
    unsigned threads = 0;
    int replications = 0;  // 0 = experiment default
};

struct ExperimentResult {
    std::string id;
    std::vector<Table> tables;
    nlohmann::json manifest;
};

const std::vector<std::string>& experiment_ids();
ExperimentResult run_experiment(const std::string& id, const ExperimentOptions& opt = {});

// 10 x 10 grid, mu uniform on the first 2^10 Sobol' points, K = Matern 3/2 with theta 10.
struct GridSetup {
    Mat X;
    IntegrationMeasure mu;
    KernelSpec truth;
};
GridSetup grid_setup();

PredictorPtr table1_polynomial(const Mat& X);  // 50 Legendre terms, gamma^2 = 0.1
PredictorPtr table1_blup(const Mat& X);        // simple kriging, Matern 5/2 with theta 5

struct Table1Row {
    double e_ise = 0, mse_trivial = 0, e_loo = 0, mse_loo = 0, e_blp_inf = 0, mse_blp_inf = 0;
};
Table1Row table1_row(const LinearPredictor& p, const GridSetup& s);

struct SweepRow {
    double theta = 0;
    bool singular = false;
    double e_est = 0, mse = 0, bias = 0;
};
std::vector<double> fig3_grid();
// Exact mean and MSE of the (unclamped) BLP or BLUP estimator under s.truth for
// K^(e) = family(theta), V_n included.
std::vector<SweepRow> theta_sweep(const LinearPredictor& p, const GridSetup& s, const std::vector<double>& thetas,
                                  Family fe, bool unbiased);

// Environmental study: 2^12 Sobol' candidates doubling as the measure support.
struct EnvContext {
    Mat cand;
    IntegrationMeasure mu;
    Vec f;
};
EnvContext env_context();
Mat env_design(const EnvContext& c, std::uint64_t seed, Eigen::Index n = 200);

struct EnvCase {
    double omega = 0, theta_p = 0, ise = 0, ise_loo = 0, ise_blp = 0, ise_blp_trend = 0;
    double theta_loo = 0, theta_blp = 0, theta_loo_trend = 0, defect = 0;
    double packing_eff = 0, covering_eff = 0;
};
// theta_p <= 0 selects 1.5546 / (2 PR). With clamp, theta_BLP = clamp(theta_LOO, 5, 50).
EnvCase env_case(const EnvContext& c, const Mat& X, double theta_p, bool clamp_blp, bool with_trend);

struct SelectionCase {
    double oracle = 0, loo = 0, blp = 0, mean_predictor = 0;  // ISE / omega_n
    double theta_oracle = 0, theta_loo = 0, theta_blp = 0;
};
SelectionCase env_selection(const EnvContext& c, const Mat& X);

// Random functions f_m from a Matern 3/2 (theta 50) draw on Z_m, interpolated with
// Matern 3/2 at theta0 such that psi(theta0 D_n[5]) = 0.25.
struct RandomFnContext {
    int d = 4;
    Mat X;
    IntegrationMeasure mu;
    double theta0 = 0;
};
RandomFnContext random_fn_context(int d, Eigen::Index n, std::uint64_t seed, Eigen::Index N = 0);

struct RandomFnCase {
    double ise = 0, ise_loo = 0, ise_blp = 0, ise_blup = 0;
    double theta_p = 0, theta_blp = 0;
    double ise_mean_predictor = 0;
};
RandomFnCase random_fn_case(const RandomFnContext& c, Eigen::Index m, std::uint64_t seed);

struct NoisyCase {
    double ise = 0, ise_loo = 0, theta_p = 0;
    std::vector<double> factors;  // r^(e) / gamma^2
    std::vector<double> ise_blp, ise_blup, theta_blp;
};
NoisyCase noisy_case(const RandomFnContext& c, double gamma, const std::vector<double>& factors, std::uint64_t seed);

}  // namespace wloo
