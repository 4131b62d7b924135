#pragma once

#include <string>
#include <vector>

#include "wloo/moments.hpp"
#include "wloo/predictors.hpp"

namespace wloo {

struct IseEstimate {
    double value = 0.0;
    std::string estimator;  // LOO | BLP | BLP+ | BLUP | BLUP+
    Vec gamma;
    bool trend_correction = false;
    double trend_amount = 0.0;
    double tau_hat = 0.0;
};

IseEstimate ise_loo(const Vec& eps);

Vec blp_weights(const MomentBundle& B);
Vec blup_weights(const MomentBundle& B);

// Pointwise BLP of eps_n^2(x) over the cached support; needs c_n.
Vec blp_pointwise(const MomentBundle& B, const Vec& eps, bool clamp);
double blp_pointwise(const MomentBundle& B, const Vec& eps, const Vec& c, bool clamp);
Vec blup_pointwise(const MomentBundle& B, const Vec& eps, bool clamp);

// With clamp the estimate is the mu-sum of clamped pointwise values when c_n is
// cached; without a cache the linear form eps^2' S^{-1} b is returned unclamped.
IseEstimate ise_blp(const MomentBundle& B, const Vec& eps, bool clamp = true);
IseEstimate ise_blup(const MomentBundle& B, const Vec& eps, bool clamp = true);

struct PerformanceReport {
    double e_ise = 0.0;          // J_n
    double mean_estimate = 0.0;  // gamma' u_n
    double bias = 0.0;
    double variance = 0.0;
    double mse = 0.0;
    bool v_included = false;
};

// All moments taken from a bundle built under the generating kernel (sigma = 1).
PerformanceReport performance_report(const Vec& gamma, const MomentBundle& Btrue, bool include_V);

// -J / (1 + u' Q_n^{-1} u), Q_n = 2 (R'KR)^2, for the BLUP under a matched model.
double matched_blp_bias(const MomentBundle& B);

struct DominanceGaps {
    double loo_minus_oracle = 0.0;       // MSE(1/n) - MSE(oracle BLP), always >= 0
    double assumed_minus_oracle = 0.0;   // MSE(BLP under K^(e)) - MSE(oracle BLP), always >= 0
    double loo_minus_assumed = 0.0;      // informative only
    double loo_minus_oracle_qf = 0.0;
    double assumed_minus_oracle_qf = 0.0;
    double mse_loo = 0.0;
    double mse_oracle = 0.0;
};

DominanceGaps estimator_dominance_check(const MomentBundle& Be, const MomentBundle& Btrue);

// Constant trend: centre y by the BLUE of tau, estimate, then add tau^2 * int (1 - w'1)^2.
IseEstimate trend_corrected_ise(const Vec& y, const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                                const MomentBundle& Be, bool unbiased = false, bool clamp = true);

MomentBundle mixture_bundle(const std::vector<KernelSpec>& kernels, const Vec& nu, const Mat& R, const Mat& W,
                            const Mat& X, const IntegrationMeasure& mu, const BundleOptions& opt = {});

Vec optimal_mixture_weights(const Mat& E, const Vec& gamma);

struct Sigma2Estimates {
    double ml = 0.0, loo = 0.0, blp = 0.0, blup = 0.0;
};
// B must be built for the simple-kriging predictor of K^(e).
Sigma2Estimates sigma2_estimators(const Vec& y, const KernelSpec& ke, const Mat& X, const MomentBundle& B);

struct TailStats {
    double quantile = 0.0;
    double cvar = 0.0;
    bool unreliable = true;  // pointwise squared-error estimates are too smooth for tails
};
TailStats tail_stats(const Vec& values, double alpha);

struct EstimateSet {
    IseEstimate loo, blp, blup;
};
// LOO, clamped BLP and clamped BLUP for one realisation, with optional trend correction.
EstimateSet estimate_all(const Vec& y, const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                         const MomentBundle& Be, bool constant_trend);

}  // namespace wloo
