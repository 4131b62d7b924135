#include "wloo/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace wloo {

IseEstimate ise_loo(const Vec& eps) {
    if (eps.size() == 0) throw Error(Errc::EmptyInput, "no LOO residuals");
    IseEstimate e;
    e.estimator = "LOO";
    e.value = eps.squaredNorm() / static_cast<double>(eps.size());
    e.gamma = Vec::Constant(eps.size(), 1.0 / static_cast<double>(eps.size()));
    return e;
}

Vec blp_weights(const MomentBundle& B) { return solve(B.s_factor(), B.b); }

namespace {

struct BlupParts {
    Vec g;         // S^{-1} u
    double ugu;    // u' S^{-1} u
};

BlupParts blup_parts(const MomentBundle& B) {
    BlupParts p;
    p.g = solve(B.s_factor(), B.u);
    p.ugu = B.u.dot(p.g);
    if (!(p.ugu > 1e-14)) throw Error(Errc::DegenerateConstraint, "u' S^{-1} u vanishes");
    return p;
}

void check_eps(const MomentBundle& B, const Vec& eps) {
    if (eps.size() != B.u.size()) throw Error(Errc::DimensionMismatch, "residual length does not match bundle");
}

}  // namespace

Vec blup_weights(const MomentBundle& B) {
    const BlupParts p = blup_parts(B);
    const Vec g = blp_weights(B);
    return g + (B.J - B.u.dot(g)) / p.ugu * p.g;
}

double blp_pointwise(const MomentBundle& B, const Vec& eps, const Vec& c, bool clamp) {
    check_eps(B, eps);
    const Vec beta = solve(B.s_factor(), c);
    const double v = beta.dot(eps.array().square().matrix());
    return clamp ? std::max(v, 0.0) : v;
}

Vec blp_pointwise(const MomentBundle& B, const Vec& eps, bool clamp) {
    check_eps(B, eps);
    if (!B.has_c()) throw Error(Errc::InvalidArgument, "bundle has no c_n cache");
    const Vec a = solve(B.s_factor(), Vec(eps.array().square().matrix()));
    Vec v = B.C.transpose() * a;
    if (clamp) v = v.cwiseMax(0.0);
    return v;
}

Vec blup_pointwise(const MomentBundle& B, const Vec& eps, bool clamp) {
    check_eps(B, eps);
    if (!B.has_c()) throw Error(Errc::InvalidArgument, "bundle has no c_n cache");
    const BlupParts p = blup_parts(B);
    const Vec a = solve(B.s_factor(), Vec(eps.array().square().matrix()));
    const double au = a.dot(B.u);
    const Vec gc = B.C.transpose() * p.g;
    Vec v = B.C.transpose() * a + (au / p.ugu) * (B.rho2 - gc);
    if (clamp) v = v.cwiseMax(0.0);
    return v;
}

IseEstimate ise_blp(const MomentBundle& B, const Vec& eps, bool clamp) {
    check_eps(B, eps);
    IseEstimate e;
    e.gamma = blp_weights(B);
    if (clamp && B.has_c()) {
        e.estimator = "BLP+";
        e.value = blp_pointwise(B, eps, true).dot(B.mu_weights);
    } else {
        e.estimator = "BLP";
        e.value = e.gamma.dot(eps.array().square().matrix());
    }
    return e;
}

IseEstimate ise_blup(const MomentBundle& B, const Vec& eps, bool clamp) {
    check_eps(B, eps);
    IseEstimate e;
    e.gamma = blup_weights(B);
    if (clamp && B.has_c()) {
        e.estimator = "BLUP+";
        e.value = blup_pointwise(B, eps, true).dot(B.mu_weights);
    } else {
        e.estimator = "BLUP";
        e.value = e.gamma.dot(eps.array().square().matrix());
    }
    return e;
}

PerformanceReport performance_report(const Vec& gamma, const MomentBundle& Bt, bool include_V) {
    if (gamma.size() != Bt.u.size()) throw Error(Errc::DimensionMismatch, "gamma length does not match bundle");
    if (include_V && !Bt.V) throw Error(Errc::InvalidArgument, "bundle was built without V_n");
    PerformanceReport r;
    r.e_ise = Bt.J;
    r.mean_estimate = gamma.dot(Bt.u);
    r.bias = r.mean_estimate - Bt.J;
    const Mat Q2 = Bt.Q.array().square().matrix();
    r.variance = 2.0 * gamma.dot(Q2 * gamma);
    r.mse = gamma.dot(Bt.S * gamma) - 2.0 * gamma.dot(Bt.b) + Bt.J * Bt.J;
    if (include_V) r.mse += 2.0 * *Bt.V;
    r.v_included = include_V;
    return r;
}

double matched_blp_bias(const MomentBundle& B) {
    const Mat Qn = 2.0 * B.Q.array().square().matrix();
    const SpdFactorization F = spd_factorize(Qn, 1e-10);
    return -B.J / (1.0 + B.u.dot(solve(F, B.u)));
}

DominanceGaps estimator_dominance_check(const MomentBundle& Be, const MomentBundle& Bt) {
    if (Be.u.size() != Bt.u.size()) throw Error(Errc::DimensionMismatch, "bundles use different designs");
    const Eigen::Index n = Bt.u.size();
    const Vec g_loo = Vec::Constant(n, 1.0 / static_cast<double>(n));
    const Vec g_e = blp_weights(Be);
    const Vec g_o = blp_weights(Bt);
    DominanceGaps d;
    // without V_n the MSEs are shifted by a common constant; the gaps are unaffected
    const bool v = Bt.V.has_value();
    d.mse_loo = performance_report(g_loo, Bt, v).mse;
    d.mse_oracle = performance_report(g_o, Bt, v).mse;
    const double mse_e = performance_report(g_e, Bt, v).mse;
    d.loo_minus_oracle = d.mse_loo - d.mse_oracle;
    d.assumed_minus_oracle = mse_e - d.mse_oracle;
    d.loo_minus_assumed = d.mse_loo - mse_e;
    // the same gaps as quadratic forms (g - g_o)' S (g - g_o)
    const Vec dl = g_loo - g_o, de = g_e - g_o;
    d.loo_minus_oracle_qf = dl.dot(Bt.S * dl);
    d.assumed_minus_oracle_qf = de.dot(Bt.S * de);
    return d;
}

IseEstimate trend_corrected_ise(const Vec& y, const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                                const MomentBundle& Be, bool unbiased, bool clamp) {
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw Error(Errc::DimensionMismatch, "data length mismatch");
    const SpdFactorization F = spd_factorize(kernel_matrix(ke, X));
    const Vec a = solve(F, Vec(Vec::Ones(n)));
    const double s = a.sum();
    if (!(s > 0.0)) throw Error(Errc::SingularBorder, "1'K^{-1}1 must be positive");
    const double tau = y.dot(a) / s;
    const Vec z = y.array() - tau;
    const Vec eps = R.transpose() * z;
    IseEstimate e = unbiased ? ise_blup(Be, eps, clamp) : ise_blp(Be, eps, clamp);
    const Vec defect = (1.0 - W.colwise().sum().array()).transpose();
    e.tau_hat = tau;
    e.trend_amount = tau * tau * defect.array().square().matrix().dot(Be.mu_weights);
    e.trend_correction = true;
    e.value += e.trend_amount;
    return e;
}

MomentBundle mixture_bundle(const std::vector<KernelSpec>& kernels, const Vec& nu, const Mat& R, const Mat& W,
                            const Mat& X, const IntegrationMeasure& mu, const BundleOptions& opt) {
    if (kernels.empty() || nu.size() != static_cast<Eigen::Index>(kernels.size()))
        throw Error(Errc::DimensionMismatch, "one mixture weight per kernel required");
    if ((nu.array() < 0.0).any() || std::abs(nu.sum() - 1.0) > 1e-12)
        throw Error(Errc::WeightSimplexViolation, "mixture weights must be nonnegative and sum to 1");
    BundleOptions part = opt;
    part.factorize = false;
    part.compute_V = false;
    MomentBundle M;
    for (std::size_t t = 0; t < kernels.size(); ++t) {
        const double w = nu[static_cast<Eigen::Index>(t)];
        MomentBundle B = build_bundle(R, W, kernels[t], X, mu, part);
        if (t == 0) {
            M = B;
            M.Q *= w;
            M.u *= w;
            M.S *= w;
            M.b *= w;
            M.J *= w;
            if (M.has_c()) {
                M.C *= w;
                M.rho2 *= w;
            }
            continue;
        }
        M.Q += w * B.Q;
        M.u += w * B.u;
        M.S += w * B.S;
        M.b += w * B.b;
        M.J += w * B.J;
        if (M.has_c()) {
            M.C += w * B.C;
            M.rho2 += w * B.rho2;
        }
    }
    M.V.reset();
    if (opt.factorize) factorize_S(M);
    return M;
}

Vec optimal_mixture_weights(const Mat& E, const Vec& gamma) {
    if (E.cols() != gamma.size()) throw Error(Errc::DimensionMismatch, "E must be T x n");
    const Eigen::Index T = E.rows();
    const Mat G = E * gamma.asDiagonal() * E.transpose();
    Eigen::FullPivLU<Mat> lu(G);
    if (lu.rank() < T || lu.rcond() < 1e-12) throw Error(Errc::SingularGram, "E Gamma E' is singular");
    const Vec v = lu.solve(Vec(Vec::Ones(T)));
    const double s = v.sum();
    if (!(std::abs(s) > 0.0)) throw Error(Errc::SingularGram, "1'(E Gamma E')^{-1}1 vanishes");
    return v / s;
}

Sigma2Estimates sigma2_estimators(const Vec& y, const KernelSpec& ke, const Mat& X, const MomentBundle& B) {
    const Eigen::Index n = X.rows();
    if (y.size() != n) throw Error(Errc::DimensionMismatch, "data length mismatch");
    if (n < 2) throw Error(Errc::InvalidArgument, "LOO variance estimate needs n >= 2");
    const SpdFactorization F = spd_factorize(kernel_matrix(ke, X));
    const Mat M = solve(F, Mat(Mat::Identity(n, n)));
    const Vec My = M * y;
    Sigma2Estimates s;
    s.ml = y.dot(My) / static_cast<double>(n);
    s.loo = (My.array().square() / M.diagonal().array()).sum() / static_cast<double>(n);
    const Vec eps = B.R.transpose() * y;
    s.blp = ise_blp(B, eps, false).value / B.J;
    s.blup = ise_blup(B, eps, false).value / B.J;
    return s;
}

TailStats tail_stats(const Vec& values, double alpha) {
    if (values.size() == 0) throw Error(Errc::EmptyInput, "no values");
    if (!(alpha > 0.0 && alpha < 1.0)) throw Error(Errc::InvalidArgument, "alpha must lie in (0, 1)");
    std::vector<double> v(values.data(), values.data() + values.size());
    std::sort(v.begin(), v.end());
    const auto N = static_cast<double>(v.size());
    auto idx = static_cast<std::size_t>(std::ceil(alpha * N - 1e-12));
    idx = idx == 0 ? 0 : idx - 1;
    TailStats t;
    t.quantile = v[idx];
    double s = 0.0;
    std::size_t c = 0;
    for (double x : v)
        if (x >= t.quantile) {
            s += x;
            ++c;
        }
    t.cvar = s / static_cast<double>(c);
    return t;
}

EstimateSet estimate_all(const Vec& y, const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                         const MomentBundle& Be, bool constant_trend) {
    EstimateSet out;
    out.loo = ise_loo(R.transpose() * y);
    if (constant_trend) {
        out.blp = trend_corrected_ise(y, R, W, ke, X, Be, false, true);
        out.blup = trend_corrected_ise(y, R, W, ke, X, Be, true, true);
    } else {
        const Vec eps = R.transpose() * y;
        out.blp = ise_blp(Be, eps, true);
        out.blup = ise_blup(Be, eps, true);
    }
    return out;
}

}  // namespace wloo
