#pragma once

#include <memory>
#include <optional>

#include "wloo/designs.hpp"
#include "wloo/kernels.hpp"

namespace wloo {

// K(x,x) - 2 w'k(x) + w'K_n w, with K(x,x) = 1 + nugget.
double rho2(const Vec& w, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x);
double rho2_cross(const Vec& w, const Vec& w2, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x,
                  const Eigen::Ref<const Vec>& x2);
Vec t_vector(const Vec& w, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x);

struct BundleOptions {
    bool compute_V = false;
    bool keep_c = true;      // keep c_n(x) and rho_n^2(x) over the support
    bool factorize = true;   // factor S_n; failure raises FlatLimitSingular
};

// Normalised (sigma^2 = 1) second and fourth moments of LOO residuals and
// prediction errors under one kernel.
struct MomentBundle {
    Mat R;
    Mat Q;   // R' K R
    Vec u;
    Mat S;
    Vec b;
    double J = 0.0;
    std::optional<double> V;
    Mat C;     // n x N, column j is c_n(x^(j)); empty unless kept
    Vec rho2;  // N; empty unless kept
    Vec mu_weights;
    std::shared_ptr<const SpdFactorization> S_factor;

    const SpdFactorization& s_factor() const;
    bool has_c() const { return C.size() > 0; }
};

MomentBundle build_bundle(const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                          const IntegrationMeasure& mu, const BundleOptions& opt = {});

// theta -> infinity: K_n -> I and k_n(x) -> 0.
MomentBundle independent_limit_bundle(const Mat& R, const Mat& W, const IntegrationMeasure& mu,
                                      const BundleOptions& opt = {});

struct FlatLimitDiagnostics {
    double J0 = 0.0;
    Vec u0;
    Vec b0;
    bool sum_to_one = false;  // u(0) = 0 and b(0) = 0
    bool rank_one_S = false;  // S(0) = 3 u(0)u(0)' is rank one and singular for n > 1
};

FlatLimitDiagnostics flat_limit_diagnostics(const Mat& R, const Mat& W, const IntegrationMeasure& mu);

void factorize_S(MomentBundle& B);

}  // namespace wloo
