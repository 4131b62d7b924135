#pragma once

#include <Eigen/Dense>

#include "wloo/error.hpp"

namespace wloo {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

class SpdFactorization {
public:
    SpdFactorization() = default;
    SpdFactorization(Eigen::LLT<Mat> llt, double jitter) : llt_(std::move(llt)), jitter_(jitter) {}

    Mat lower() const { return llt_.matrixL(); }
    double jitter_applied() const { return jitter_; }
    Eigen::Index size() const { return llt_.rows(); }
    const Eigen::LLT<Mat>& llt() const { return llt_; }

    double log_det() const;

private:
    Eigen::LLT<Mat> llt_;
    double jitter_ = 0.0;
};

// Symmetrizes, then tries jitter 0, 1e-12, 1e-10, 1e-8 times mean(diag(A)).
SpdFactorization spd_factorize(const Mat& A, double asym_tol = 1e-12);

Mat solve(const SpdFactorization& F, const Mat& B);
Vec solve(const SpdFactorization& F, const Vec& b);

// Inverse of [[K, 1], [1', 0]].
Mat bordered_inverse(const Mat& K);

inline Mat hadamard_square(const Mat& A) { return A.array().square().matrix(); }

double relative_asymmetry(const Mat& A);

}  // namespace wloo
