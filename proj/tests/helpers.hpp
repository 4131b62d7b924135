#pragma once

#include <cmath>

#include "wloo/designs.hpp"
#include "wloo/kernels.hpp"

namespace th {

using wloo::Mat;
using wloo::Vec;

// Textbook correlation functions, written out separately from the library.
inline double corr(wloo::Family f, double theta, double r) {
    const double a = theta * r;
    switch (f) {
        case wloo::Family::Matern12: return std::exp(-a);
        case wloo::Family::Matern32: return (1 + std::sqrt(3.0) * a) * std::exp(-std::sqrt(3.0) * a);
        case wloo::Family::Matern52: return (1 + std::sqrt(5.0) * a + 5.0 * a * a / 3.0) * std::exp(-std::sqrt(5.0) * a);
        case wloo::Family::Gaussian: return std::exp(-a * a);
        case wloo::Family::InverseMultiquadric: return 1.0 / (1.0 + a * a);
    }
    return NAN;
}

inline double dist(const Mat& A, Eigen::Index i, const Mat& B, Eigen::Index j) {
    return (A.row(i) - B.row(j)).norm();
}

inline Mat gram(const wloo::KernelSpec& k, const Mat& X) {
    Mat K(X.rows(), X.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < X.rows(); ++j) K(i, j) = corr(k.family, k.theta, dist(X, i, X, j)) + (i == j ? k.nugget : 0.0);
    return K;
}

inline Mat cross(const wloo::KernelSpec& k, const Mat& X, const Mat& P) {
    Mat C(X.rows(), P.rows());
    for (Eigen::Index i = 0; i < X.rows(); ++i)
        for (Eigen::Index j = 0; j < P.rows(); ++j) C(i, j) = corr(k.family, k.theta, dist(X, i, P, j));
    return C;
}

inline double max_abs(const Mat& A) { return A.size() ? A.cwiseAbs().maxCoeff() : 0.0; }

inline double rel(double a, double b) { return std::abs(a - b) / std::max(std::abs(b), 1e-300); }

inline Mat uniform_points(int d, Eigen::Index n, unsigned seed) {
    // simple LCG so the tests do not lean on the library generator
    unsigned long long s = 0x9E3779B97F4A7C15ULL ^ seed;
    Mat X(n, d);
    for (Eigen::Index i = 0; i < n; ++i)
        for (int k = 0; k < d; ++k) {
            s = s * 6364136223846793005ULL + 1442695040888963407ULL;
            X(i, k) = static_cast<double>(s >> 11) * 0x1.0p-53;
        }
    return X;
}

}  // namespace th
