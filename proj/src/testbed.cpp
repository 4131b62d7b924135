#include "wloo/testbed.hpp"

#include <cmath>
#include <numbers>

namespace wloo {

Vec sample_gp(const KernelSpec& k, const Mat& X, Rng& rng) {
    const SpdFactorization F = spd_factorize(kernel_matrix(k, X));
    return F.llt().matrixL() * rng.normal_vector(X.rows());
}

Vec sample_gp(const KernelSpec& k, const Mat& X, std::uint64_t seed) {
    Rng rng(seed);
    return sample_gp(k, X, rng);
}

RandomFunction::RandomFunction(Mat Z, Vec y, KernelSpec interp) : Z_(std::move(Z)), y_(std::move(y)), k_(interp) {
    if (Z_.rows() != y_.size()) throw Error(Errc::DimensionMismatch, "one value per centre required");
    alpha_ = solve(spd_factorize(kernel_matrix(k_, Z_)), y_);
}

double RandomFunction::operator()(const Eigen::Ref<const Vec>& x) const { return cross_vector(k_, Z_, x).dot(alpha_); }

Vec RandomFunction::operator()(const Mat& points) const {
    return cross_matrix(k_, Z_, points).transpose() * alpha_;
}

RandomFunction random_fm(int d, Eigen::Index m, const KernelSpec& kernel_sim, const KernelSpec& kernel_interp,
                         std::uint64_t seed) {
    if (m < 2) throw Error(Errc::InvalidArgument, "random_fm needs m >= 2");
    Mat Z = sobol_points(d, m, seed);
    Rng rng(seed, 1);
    Vec y = sample_gp(kernel_sim, Z, rng);
    return RandomFunction(std::move(Z), std::move(y), kernel_interp);
}

namespace {
void check_unit(const Eigen::Ref<const Vec>& x, Eigen::Index d) {
    if (x.size() != d) throw Error(Errc::DimensionMismatch, "wrong input dimension");
    for (Eigen::Index i = 0; i < d; ++i)
        if (!(x[i] >= 0.0 && x[i] <= 1.0)) throw Error(Errc::DomainViolation, "input outside [0,1]^d");
}
}  // namespace

double environmental(const Eigen::Ref<const Vec>& x) {
    check_unit(x, 2);
    constexpr double M = 10.0, D = 0.07, L = 1.505, tau = 30.1525;
    constexpr double pi = std::numbers::pi;
    const double s = 3.0 * x[0];
    const double t = 1.0 + 59.0 * x[1];
    double c = M / std::sqrt(4.0 * pi * D * t) * std::exp(-s * s / (4.0 * D * t));
    if (t > tau) {
        const double dt = t - tau;
        c += M / std::sqrt(4.0 * pi * D * dt) * std::exp(-(s - L) * (s - L) / (4.0 * D * dt));
    }
    return std::sqrt(4.0 * pi) * c;
}

double piston4d(const Eigen::Ref<const Vec>& x) {
    check_unit(x, 4);
    const double M = 30.0 + 30.0 * x[0];
    const double S = 0.005 + 0.015 * x[1];
    const double V0 = 0.002 + 0.008 * x[2];
    const double k = 1000.0 + 4000.0 * x[3];
    constexpr double P0 = 1e5, Ta = 293.0, T0 = 350.0;
    const double A = P0 * S + 19.62 * M - k * V0 / S;
    const double V = S / (2.0 * k) * (std::sqrt(A * A + 4.0 * k * P0 * V0 * Ta / T0) - A);
    return 2.0 * std::numbers::pi * std::sqrt(M / (k + S * S * P0 * V0 * Ta / (T0 * V * V)));
}

Vec evaluate(const std::function<double(const Eigen::Ref<const Vec>&)>& f, const Mat& points) {
    Vec out(points.rows());
    for (Eigen::Index i = 0; i < points.rows(); ++i) out[i] = f(points.row(i).transpose());
    return out;
}

Vec add_noise(const Vec& y, double gamma, Rng& rng) {
    if (!(gamma >= 0.0)) throw Error(Errc::InvalidArgument, "noise level must be >= 0");
    if (gamma == 0.0) return y;
    return y + gamma * rng.normal_vector(y.size());
}

Vec add_noise(const Vec& y, double gamma, std::uint64_t seed) {
    Rng rng(seed, 0xA015EULL);
    return add_noise(y, gamma, rng);
}

double true_ise(const Vec& f_support, const Mat& W, const Vec& y, const Vec& mu_weights) {
    if (W.cols() != f_support.size() || W.rows() != y.size() || mu_weights.size() != f_support.size())
        throw Error(Errc::DimensionMismatch, "true_ise: inconsistent sizes");
    const Vec e = f_support - W.transpose() * y;
    return e.array().square().matrix().dot(mu_weights);
}

double omega_n(const Vec& y) {
    if (y.size() == 0) throw Error(Errc::EmptyInput, "no observations");
    const double m = y.mean();
    return (y.array() - m).square().mean();
}

}  // namespace wloo
