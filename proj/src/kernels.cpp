#include "wloo/kernels.hpp"

#include <cmath>

namespace wloo {

namespace {
const double kSqrt3 = std::sqrt(3.0);
const double kSqrt5 = std::sqrt(5.0);
}  // namespace

std::string family_name(Family f) {
    switch (f) {
        case Family::Matern12: return "matern12";
        case Family::Matern32: return "matern32";
        case Family::Matern52: return "matern52";
        case Family::Gaussian: return "gaussian";
        case Family::InverseMultiquadric: return "im";
    }
    return "unknown";
}

Family parse_family(const std::string& s) {
    if (s == "matern12" || s == "exponential") return Family::Matern12;
    if (s == "matern32") return Family::Matern32;
    if (s == "matern52") return Family::Matern52;
    if (s == "gaussian" || s == "se") return Family::Gaussian;
    if (s == "im" || s == "inverse_multiquadric") return Family::InverseMultiquadric;
    throw Error(Errc::ConfigError, "unknown kernel family '" + s + "'");
}

KernelSpec::KernelSpec(Family f, double t, double r) : family(f), theta(t), nugget(r) {
    if (!(t > 0.0)) throw Error(Errc::InvalidArgument, "kernel theta must be > 0");
    if (!(r >= 0.0)) throw Error(Errc::InvalidArgument, "kernel nugget must be >= 0");
}

double psi(Family f, double a) {
    switch (f) {
        case Family::Matern12: return std::exp(-a);
        case Family::Matern32: {
            const double s = kSqrt3 * a;
            return (1.0 + s) * std::exp(-s);
        }
        case Family::Matern52: {
            const double s = kSqrt5 * a;
            return (1.0 + s + s * s / 3.0) * std::exp(-s);
        }
        case Family::Gaussian: return std::exp(-a * a);
        case Family::InverseMultiquadric: return 1.0 / (1.0 + a * a);
    }
    return 0.0;
}

double eval(const KernelSpec& k, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& x2) {
    if (x.size() != x2.size()) throw Error(Errc::DimensionMismatch, "kernel eval: dimension mismatch");
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
        const double d = x[i] - x2[i];
        s += d * d;
    }
    const double r = std::sqrt(s);
    return psi(k.family, k.theta * r) + (s == 0.0 ? k.nugget : 0.0);
}

Mat pairwise_distances(const Mat& A, const Mat& B) {
    if (A.cols() != B.cols()) throw Error(Errc::DimensionMismatch, "distance: dimension mismatch");
    Mat D(A.rows(), B.rows());
    const Eigen::Index d = A.cols();
    for (Eigen::Index j = 0; j < B.rows(); ++j) {
        for (Eigen::Index i = 0; i < A.rows(); ++i) {
            double s = 0.0;
            for (Eigen::Index c = 0; c < d; ++c) {
                const double t = A(i, c) - B(j, c);
                s += t * t;
            }
            D(i, j) = std::sqrt(s);
        }
    }
    return D;
}

Mat kernel_matrix(const KernelSpec& k, const Mat& X) {
    const Eigen::Index n = X.rows();
    Mat K(n, n);
    const Mat D = pairwise_distances(X, X);
    for (Eigen::Index j = 0; j < n; ++j) {
        K(j, j) = 1.0 + k.nugget;
        for (Eigen::Index i = j + 1; i < n; ++i) {
            if (k.nugget == 0.0 && D(i, j) <= 1e-14)
                throw Error(Errc::DuplicatePoints, "design points coincide and nugget is zero");
            const double v = psi(k.family, k.theta * D(i, j));
            K(i, j) = v;
            K(j, i) = v;
        }
    }
    return K;
}

Mat cross_matrix(const KernelSpec& k, const Mat& X, const Mat& Y) {
    Mat C = pairwise_distances(X, Y);
    C = C.unaryExpr([&](double r) { return psi(k.family, k.theta * r); });
    return C;
}

Vec cross_vector(const KernelSpec& k, const Mat& X, const Eigen::Ref<const Vec>& x) {
    if (x.size() != X.cols()) throw Error(Errc::DimensionMismatch, "cross_vector: dimension mismatch");
    Vec out(X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i) {
        const double r = (X.row(i).transpose() - x).norm();
        out[i] = psi(k.family, k.theta * r);
    }
    return out;
}

}  // namespace wloo
