#include "wloo/numerics.hpp"

#include <array>
#include <cmath>

namespace wloo {

double relative_asymmetry(const Mat& A) {
    const double scale = A.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    return (A - A.transpose()).cwiseAbs().maxCoeff() / scale;
}

double SpdFactorization::log_det() const {
    const Mat& L = llt_.matrixLLT();
    double s = 0.0;
    for (Eigen::Index i = 0; i < L.rows(); ++i) s += std::log(L(i, i));
    return 2.0 * s;
}

SpdFactorization spd_factorize(const Mat& A, double asym_tol) {
    if (A.rows() != A.cols()) throw Error(Errc::DimensionMismatch, "matrix is not square");
    if (A.rows() == 0) throw Error(Errc::DimensionMismatch, "empty matrix");
    if (relative_asymmetry(A) > asym_tol) throw Error(Errc::Asymmetric, "matrix is not symmetric");

    const Mat sym = 0.5 * (A + A.transpose());
    const double mean_diag = sym.diagonal().mean();
    constexpr std::array<double, 4> levels{0.0, 1e-12, 1e-10, 1e-8};
    for (double level : levels) {
        const double jitter = level * mean_diag;
        Mat B = sym;
        if (jitter > 0.0) B.diagonal().array() += jitter;
        Eigen::LLT<Mat> llt(B);
        if (llt.info() != Eigen::Success) continue;
        // With jitter the smallest pivot must be clearly above the added amount,
        // otherwise the factor describes the jitter rather than A (e.g. 11').
        const double min_pivot = llt.matrixLLT().diagonal().array().square().minCoeff();
        if (!(min_pivot > 2.0 * jitter)) continue;
        return SpdFactorization(std::move(llt), jitter);
    }
    throw Error(Errc::NotPositiveDefinite, "factorization failed after maximal jitter");
}

Mat solve(const SpdFactorization& F, const Mat& B) {
    if (B.rows() != F.size()) throw Error(Errc::DimensionMismatch, "solve: row count mismatch");
    return F.llt().solve(B);
}

Vec solve(const SpdFactorization& F, const Vec& b) {
    if (b.size() != F.size()) throw Error(Errc::DimensionMismatch, "solve: length mismatch");
    return F.llt().solve(b);
}

Mat bordered_inverse(const Mat& K) {
    const Eigen::Index n = K.rows();
    const SpdFactorization F = spd_factorize(K);
    const Vec ones = Vec::Ones(n);
    const Vec a = solve(F, ones);
    const double s = ones.dot(a);
    if (!(std::abs(s) > 0.0) || !std::isfinite(s)) throw Error(Errc::SingularBorder, "1'K^{-1}1 vanishes");
    Mat Minv = solve(F, Mat(Mat::Identity(n, n)));
    Mat out(n + 1, n + 1);
    out.topLeftCorner(n, n) = Minv - a * a.transpose() / s;
    out.topRightCorner(n, 1) = a / s;
    out.bottomLeftCorner(1, n) = a.transpose() / s;
    out(n, n) = -1.0 / s;
    return out;
}

}  // namespace wloo
