#include "wloo/predictors.hpp"

#include <algorithm>
#include <array>
#include <cmath>

namespace wloo {

bool numerically_full_rank(const Mat& R, double max_condition) {
    if (R.rows() == 0) return false;
    Eigen::PartialPivLU<Mat> lu(R);
    const double rc = lu.rcond();
    return std::isfinite(rc) && rc * max_condition > 1.0;
}

LooOperator LinearPredictor::loo_operator() const {
    if (n() < 2) throw Error(Errc::InvalidArgument, "LOO needs n >= 2");
    LooOperator op;
    op.R = loo_matrix();
    op.full_rank = numerically_full_rank(op.R);
    return op;
}

Vec LinearPredictor::weights_at(const Eigen::Ref<const Vec>& x) const {
    Mat p(1, x.size());
    p.row(0) = x.transpose();
    return weights(p).col(0);
}

Vec LinearPredictor::predict(const Vec& y, const Mat& points) const {
    if (y.size() != n()) throw Error(Errc::DimensionMismatch, "predict: data length mismatch");
    return weights(points).transpose() * y;
}

double LinearPredictor::predict(const Vec& y, const Eigen::Ref<const Vec>& x) const {
    if (y.size() != n()) throw Error(Errc::DimensionMismatch, "predict: data length mismatch");
    return weights_at(x).dot(y);
}

Vec LinearPredictor::loo_residuals(const Vec& y) const {
    if (y.size() != n()) throw Error(Errc::DimensionMismatch, "loo_residuals: data length mismatch");
    return loo_matrix().transpose() * y;
}

// simple kriging

SimpleKriging::SimpleKriging(KernelSpec k, Mat X) : LinearPredictor(std::move(X)), k_(k) {
    F_ = spd_factorize(kernel_matrix(k_, design()));
    M_ = solve(F_, Mat(Mat::Identity(n(), n())));
    M_ = (0.5 * (M_ + M_.transpose())).eval();
}

Mat SimpleKriging::weights(const Mat& points) const {
    return solve(F_, cross_matrix(k_, design(), points));
}

Mat SimpleKriging::loo_matrix() const { return M_ * M_.diagonal().cwiseInverse().asDiagonal(); }

std::unique_ptr<LinearPredictor> SimpleKriging::rebind(const Mat& X) const {
    return std::make_unique<SimpleKriging>(k_, X);
}

// ordinary kriging

OrdinaryKriging::OrdinaryKriging(KernelSpec k, Mat X) : LinearPredictor(std::move(X)), k_(k) {
    const Mat K = kernel_matrix(k_, design());
    F_ = spd_factorize(K);
    a_ = solve(F_, Vec(Vec::Ones(n())));
    s_ = a_.sum();
    Mbar_ = bordered_inverse(K);
}

Mat OrdinaryKriging::weights(const Mat& points) const {
    Mat W = solve(F_, cross_matrix(k_, design(), points));
    const Eigen::RowVectorXd defect = (1.0 - W.colwise().sum().array()).matrix() / s_;
    W += a_ * defect;
    return W;
}

Mat OrdinaryKriging::loo_matrix() const {
    const Mat P = Mbar_.topLeftCorner(n(), n());
    return P * P.diagonal().cwiseInverse().asDiagonal();
}

std::unique_ptr<LinearPredictor> OrdinaryKriging::rebind(const Mat& X) const {
    return std::make_unique<OrdinaryKriging>(k_, X);
}

// polynomial

double legendre01(int k, double x) {
    const double t = 2.0 * x - 1.0;
    double p0 = 1.0, p1 = t;
    if (k == 0) return 1.0;
    for (int j = 1; j < k; ++j) {
        const double p2 = ((2.0 * j + 1.0) * t * p1 - j * p0) / (j + 1.0);
        p0 = p1;
        p1 = p2;
    }
    return std::sqrt(2.0 * k + 1.0) * p1;
}

namespace {

constexpr std::array<int, 50> kL1{0, 0, 1, 1, 0, 2, 1, 2, 0, 3, 2, 1, 3, 0, 4, 2, 3, 1, 4, 0, 5, 3, 2, 4, 1,
                                  5, 0, 6, 2, 5, 3, 4, 1, 6, 0, 7, 3, 5, 2, 6, 4, 1, 7, 0, 8, 4, 5, 3, 6, 2};
constexpr std::array<int, 50> kL2{0, 1, 0, 1, 2, 0, 2, 1, 3, 0, 2, 3, 1, 4, 0, 3, 2, 4, 1, 5, 0, 3, 4, 2, 5,
                                  1, 6, 0, 5, 2, 4, 3, 6, 1, 7, 0, 5, 3, 6, 2, 4, 7, 1, 8, 0, 5, 4, 6, 3, 7};

Vec prior_weights(const std::vector<std::vector<int>>& idx, double c, double t) {
    Vec lam(static_cast<Eigen::Index>(idx.size()));
    for (std::size_t j = 0; j < idx.size(); ++j) {
        double v = 1.0;
        for (int l : idx[j]) v *= c * std::pow(t, -l);
        lam[static_cast<Eigen::Index>(j)] = v;
    }
    return lam;
}

}  // namespace

PolyBasis PolyBasis::table_d2_m50(double c, double t) {
    PolyBasis b;
    for (std::size_t j = 0; j < kL1.size(); ++j) b.indices.push_back({kL1[j], kL2[j]});
    b.lambda = prior_weights(b.indices, c, t);
    return b;
}

PolyBasis PolyBasis::tensor_legendre(int d, int m, double c, double t) {
    if (d < 1 || m < 1) throw Error(Errc::InvalidArgument, "polynomial basis needs d >= 1 and m >= 1");
    if (!(t > 1.0)) throw Error(Errc::InvalidArgument, "prior decay t must exceed 1");
    if (d == 2 && m <= 50) {
        PolyBasis b = table_d2_m50(c, t);
        b.indices.resize(static_cast<std::size_t>(m));
        b.lambda.conservativeResize(m);
        return b;
    }
    // enumerate by increasing total degree, lexicographic within a degree
    std::vector<std::vector<int>> out;
    for (int deg = 0; static_cast<int>(out.size()) < m; ++deg) {
        std::vector<int> cur(d, 0);
        std::vector<std::vector<int>> level;
        auto rec = [&](auto&& self, int pos, int left) -> void {
            if (pos == d - 1) {
                cur[pos] = left;
                level.push_back(cur);
                return;
            }
            for (int v = 0; v <= left; ++v) {
                cur[pos] = v;
                self(self, pos + 1, left - v);
            }
        };
        rec(rec, 0, deg);
        std::sort(level.begin(), level.end());
        for (auto& l : level) {
            if (static_cast<int>(out.size()) == m) break;
            out.push_back(l);
        }
    }
    PolyBasis b;
    b.indices = std::move(out);
    b.lambda = prior_weights(b.indices, c, t);
    return b;
}

Mat PolyBasis::evaluate(const Mat& points) const {
    const Eigen::Index N = points.rows();
    const int d = dim();
    if (points.cols() != d) throw Error(Errc::DimensionMismatch, "basis dimension mismatch");
    int maxdeg = 0;
    for (const auto& l : indices)
        for (int v : l) maxdeg = std::max(maxdeg, v);
    Mat out(N, static_cast<Eigen::Index>(indices.size()));
    std::vector<double> table(static_cast<std::size_t>(d * (maxdeg + 1)));
    for (Eigen::Index i = 0; i < N; ++i) {
        for (int c = 0; c < d; ++c)
            for (int k = 0; k <= maxdeg; ++k) table[c * (maxdeg + 1) + k] = legendre01(k, points(i, c));
        for (std::size_t j = 0; j < indices.size(); ++j) {
            double v = 1.0;
            for (int c = 0; c < d; ++c) v *= table[c * (maxdeg + 1) + indices[j][c]];
            out(i, static_cast<Eigen::Index>(j)) = v;
        }
    }
    return out;
}

// Posterior mean for alpha ~ N(0, Lambda) and noise gamma^2, written through
// A = gamma^2 Lambda^{-1} + Phi'Phi so that vague priors stay well conditioned.
BayesPolynomial::BayesPolynomial(PolyBasis basis, double gamma2, Mat X)
    : LinearPredictor(std::move(X)), basis_(std::move(basis)), gamma2_(gamma2) {
    if (!(gamma2_ > 0.0)) throw Error(Errc::InvalidArgument, "polynomial noise variance must be > 0");
    Phi_ = basis_.evaluate(design());
    Mat A = Phi_.transpose() * Phi_;
    A.diagonal().array() += gamma2_ * basis_.lambda.cwiseInverse().array();
    A_ = spd_factorize(A, 1e-10);
}

Mat BayesPolynomial::weights(const Mat& points) const {
    return Phi_ * solve(A_, Mat(basis_.evaluate(points).transpose()));
}

Mat BayesPolynomial::loo_matrix() const {
    Mat M = -Phi_ * solve(A_, Mat(Phi_.transpose()));
    M.diagonal().array() += 1.0;
    M /= gamma2_;
    M = (0.5 * (M + M.transpose())).eval();
    return M * M.diagonal().cwiseInverse().asDiagonal();
}

std::unique_ptr<LinearPredictor> BayesPolynomial::rebind(const Mat& X) const {
    return std::make_unique<BayesPolynomial>(basis_, gamma2_, X);
}

// empirical mean

Mat EmpiricalMean::weights(const Mat& points) const {
    return Mat::Constant(n(), points.rows(), 1.0 / static_cast<double>(n()));
}

Mat EmpiricalMean::loo_matrix() const {
    const double m = static_cast<double>(n()) - 1.0;
    Mat R = Mat::Constant(n(), n(), -1.0 / m);
    R.diagonal().setOnes();
    return R;
}

std::unique_ptr<LinearPredictor> EmpiricalMean::rebind(const Mat& X) const {
    return std::make_unique<EmpiricalMean>(X);
}

// mixture

FixedMixture::FixedMixture(std::vector<PredictorPtr> parts, Vec nu)
    : LinearPredictor(parts.empty() ? Mat() : parts.front()->design()), parts_(std::move(parts)), nu_(std::move(nu)) {
    if (parts_.empty()) throw Error(Errc::InvalidArgument, "mixture needs at least one predictor");
    if (nu_.size() != static_cast<Eigen::Index>(parts_.size()))
        throw Error(Errc::DimensionMismatch, "mixture weight count mismatch");
    if (std::abs(nu_.sum() - 1.0) > 1e-12) throw Error(Errc::WeightSimplexViolation, "mixture weights must sum to 1");
    for (const auto& p : parts_)
        if (p->n() != n()) throw Error(Errc::DimensionMismatch, "mixture parts use different designs");
}

Mat FixedMixture::weights(const Mat& points) const {
    Mat W = Mat::Zero(n(), points.rows());
    for (std::size_t t = 0; t < parts_.size(); ++t) W += nu_[static_cast<Eigen::Index>(t)] * parts_[t]->weights(points);
    return W;
}

Mat FixedMixture::loo_matrix() const {
    Mat R = Mat::Zero(n(), n());
    for (std::size_t t = 0; t < parts_.size(); ++t) R += nu_[static_cast<Eigen::Index>(t)] * parts_[t]->loo_matrix();
    return R;
}

Mat FixedMixture::loo_errors(const Vec& y) const {
    Mat E(static_cast<Eigen::Index>(parts_.size()), n());
    for (std::size_t t = 0; t < parts_.size(); ++t) E.row(static_cast<Eigen::Index>(t)) = parts_[t]->loo_residuals(y).transpose();
    return E;
}

std::unique_ptr<LinearPredictor> FixedMixture::rebind(const Mat& X) const {
    std::vector<PredictorPtr> parts;
    for (const auto& p : parts_) parts.push_back(PredictorPtr(p->rebind(X)));
    return std::make_unique<FixedMixture>(std::move(parts), nu_);
}

// table

TablePredictor::TablePredictor(Mat X, Mat points, Mat W, Mat R)
    : LinearPredictor(std::move(X)), points_(std::move(points)), W_(std::move(W)), R_(std::move(R)) {
    if (W_.rows() != n() || W_.cols() != points_.rows()) throw Error(Errc::DimensionMismatch, "weight table must be n x N");
    if (R_.rows() != n() || R_.cols() != n()) throw Error(Errc::DimensionMismatch, "LOO table must be n x n");
}

Mat TablePredictor::weights(const Mat& points) const {
    if (points.rows() != points_.rows() || points.cols() != points_.cols() || points != points_)
        throw Error(Errc::DomainViolation, "table predictor is only defined on its own support");
    return W_;
}

std::unique_ptr<LinearPredictor> TablePredictor::rebind(const Mat&) const {
    throw Error(Errc::InvalidArgument, "table predictor cannot be refitted");
}

Mat brute_force_loo_matrix(const LinearPredictor& p) {
    const Eigen::Index n = p.n();
    const Mat& X = p.design();
    Mat R = Mat::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
        Mat Xi(n - 1, X.cols());
        for (Eigen::Index j = 0, r = 0; j < n; ++j)
            if (j != i) Xi.row(r++) = X.row(j);
        const auto q = p.rebind(Xi);
        const Vec w = q->weights_at(X.row(i).transpose());
        R(i, i) = 1.0;
        for (Eigen::Index j = 0, r = 0; j < n; ++j)
            if (j != i) R(j, i) = -w[r++];
    }
    return R;
}

}  // namespace wloo
