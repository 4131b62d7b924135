#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wloo/kernels.hpp"

namespace wloo {

struct LooOperator {
    Mat R;  // eps_LOO = R' y
    bool full_rank = true;
};

bool numerically_full_rank(const Mat& R, double max_condition = 1e12);

class LinearPredictor {
public:
    explicit LinearPredictor(Mat X) : X_(std::move(X)) {}
    virtual ~LinearPredictor() = default;

    const Mat& design() const { return X_; }
    Eigen::Index n() const { return X_.rows(); }

    // n x N; column j holds w_n(points.row(j)).
    virtual Mat weights(const Mat& points) const = 0;
    virtual Mat loo_matrix() const = 0;
    virtual std::unique_ptr<LinearPredictor> rebind(const Mat& X) const = 0;
    virtual std::string name() const = 0;

    LooOperator loo_operator() const;
    Vec weights_at(const Eigen::Ref<const Vec>& x) const;
    Vec predict(const Vec& y, const Mat& points) const;
    double predict(const Vec& y, const Eigen::Ref<const Vec>& x) const;
    Vec loo_residuals(const Vec& y) const;

private:
    Mat X_;
};

using PredictorPtr = std::shared_ptr<const LinearPredictor>;

class SimpleKriging final : public LinearPredictor {
public:
    SimpleKriging(KernelSpec k, Mat X);
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override;
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "simple_kriging"; }
    const KernelSpec& kernel() const { return k_; }
    const Mat& inverse() const { return M_; }

private:
    KernelSpec k_;
    SpdFactorization F_;
    Mat M_;
};

class OrdinaryKriging final : public LinearPredictor {
public:
    OrdinaryKriging(KernelSpec k, Mat X);
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override;
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "ordinary_kriging"; }
    const Mat& bordered() const { return Mbar_; }

private:
    KernelSpec k_;
    SpdFactorization F_;
    Vec a_;  // K^{-1} 1
    double s_ = 0.0;
    Mat Mbar_;
};

// Tensorised Legendre basis orthonormal on [0,1]^d with prior variances lambda.
struct PolyBasis {
    std::vector<std::vector<int>> indices;
    Vec lambda;

    // The m multi-indices with the largest prod_i c * t^{-l_i}; ties in total degree
    // are broken by the shipped d=2, m=50 table when it applies, else lexicographically.
    static PolyBasis tensor_legendre(int d, int m, double c = 1e3, double t = 2.0);
    static PolyBasis table_d2_m50(double c = 1e3, double t = 2.0);

    Mat evaluate(const Mat& points) const;  // N x m
    int dim() const { return indices.empty() ? 0 : static_cast<int>(indices.front().size()); }
};

// phi_k(x) = sqrt(2k+1) P_k(2x-1)
double legendre01(int k, double x);

class BayesPolynomial final : public LinearPredictor {
public:
    BayesPolynomial(PolyBasis basis, double gamma2, Mat X);
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override;
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "bayes_polynomial"; }

private:
    PolyBasis basis_;
    double gamma2_;
    Mat Phi_;  // n x m
    SpdFactorization A_;  // gamma^2 Lambda^{-1} + Phi' Phi
};

class EmpiricalMean final : public LinearPredictor {
public:
    explicit EmpiricalMean(Mat X) : LinearPredictor(std::move(X)) {}
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override;
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "empirical_mean"; }
};

class FixedMixture final : public LinearPredictor {
public:
    FixedMixture(std::vector<PredictorPtr> parts, Vec nu);
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override;
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "mixture"; }
    const std::vector<PredictorPtr>& parts() const { return parts_; }
    const Vec& nu() const { return nu_; }

    // T x n matrix with entry (t, i) = eps_{-i,t}.
    Mat loo_errors(const Vec& y) const;

private:
    std::vector<PredictorPtr> parts_;
    Vec nu_;
};

// Weights given as a table over fixed points, with a user-supplied R.
class TablePredictor final : public LinearPredictor {
public:
    TablePredictor(Mat X, Mat points, Mat W, Mat R);
    Mat weights(const Mat& points) const override;
    Mat loo_matrix() const override { return R_; }
    std::unique_ptr<LinearPredictor> rebind(const Mat& X) const override;
    std::string name() const override { return "table"; }

private:
    Mat points_, W_, R_;
};

// n refits on X without x_i; column i of the result is the LOO map for y_i.
Mat brute_force_loo_matrix(const LinearPredictor& p);

}  // namespace wloo
