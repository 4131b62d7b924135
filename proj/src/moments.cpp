#include "wloo/moments.hpp"

#include <cmath>

namespace wloo {

double rho2(const Vec& w, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x) {
    if (w.size() != X.rows()) throw Error(Errc::DimensionMismatch, "rho2: weight length mismatch");
    const Vec k = cross_vector(ke, X, x);
    const Mat K = kernel_matrix(ke, X);
    return 1.0 + ke.nugget - 2.0 * w.dot(k) + w.dot(K * w);
}

double rho2_cross(const Vec& w, const Vec& w2, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x,
                  const Eigen::Ref<const Vec>& x2) {
    if (w.size() != X.rows() || w2.size() != X.rows()) throw Error(Errc::DimensionMismatch, "rho2_cross: weight length mismatch");
    const Vec k = cross_vector(ke, X, x);
    const Vec k2 = cross_vector(ke, X, x2);
    const Mat K = kernel_matrix(ke, X);
    return eval(ke, x, x2) - w.dot(k2) - w2.dot(k) + w.dot(K * w2);
}

Vec t_vector(const Vec& w, const KernelSpec& ke, const Mat& X, const Eigen::Ref<const Vec>& x) {
    if (w.size() != X.rows()) throw Error(Errc::DimensionMismatch, "t_vector: weight length mismatch");
    return cross_vector(ke, X, x) - kernel_matrix(ke, X) * w;
}

const SpdFactorization& MomentBundle::s_factor() const {
    if (!S_factor) throw Error(Errc::InvalidArgument, "bundle was built without an S_n factorization");
    return *S_factor;
}

void factorize_S(MomentBundle& B) {
    try {
        B.S_factor = std::make_shared<const SpdFactorization>(spd_factorize(B.S, 1e-10));
    } catch (const Error& e) {
        if (e.code() == Errc::NotPositiveDefinite)
            throw Error(Errc::FlatLimitSingular, "S_n is numerically singular (flat-limit regime)");
        throw;
    }
}

namespace {

void check_inputs(const Mat& R, const Mat& W, const IntegrationMeasure& mu) {
    if (R.rows() != R.cols()) throw Error(Errc::DimensionMismatch, "R_n must be square");
    if (W.rows() != R.rows()) throw Error(Errc::DimensionMismatch, "weights must have n rows");
    if (W.cols() != mu.size()) throw Error(Errc::DimensionMismatch, "weights must have one column per support point");
    if (mu.size() == 0) throw Error(Errc::EmptyInput, "empty measure");
}

void finish(MomentBundle& B, const Vec& rho, const Mat& Tr, const IntegrationMeasure& mu,
            const BundleOptions& opt) {
    // Tr holds R' t_n(x) column-wise
    Mat C = B.u * rho.transpose();
    C.array() += 2.0 * Tr.array().square();
    B.b = C * mu.weights;
    B.J = rho.dot(mu.weights);
    B.mu_weights = mu.weights;
    if (opt.keep_c) {
        B.C = std::move(C);
        B.rho2 = rho;
    }
    if (opt.factorize) factorize_S(B);
}

}  // namespace

MomentBundle build_bundle(const Mat& R, const Mat& W, const KernelSpec& ke, const Mat& X,
                          const IntegrationMeasure& mu, const BundleOptions& opt) {
    check_inputs(R, W, mu);
    if (X.rows() != R.rows()) throw Error(Errc::DimensionMismatch, "design size must match R_n");
    MomentBundle B;
    B.R = R;
    const Mat K = kernel_matrix(ke, X);
    B.Q = R.transpose() * K * R;
    B.Q = (0.5 * (B.Q + B.Q.transpose())).eval();
    B.u = B.Q.diagonal();
    B.S = B.u * B.u.transpose();
    B.S.array() += 2.0 * B.Q.array().square();

    const Mat kx = cross_matrix(ke, X, mu.points);
    const Mat KW = K * W;
    const Vec rho = ((1.0 + ke.nugget) - 2.0 * (W.array() * kx.array()).colwise().sum() +
                     (W.array() * KW.array()).colwise().sum())
                        .transpose();
    const Mat Tr = R.transpose() * (kx - KW);

    if (opt.compute_V) {
        Mat Kmm = cross_matrix(ke, mu.points, mu.points);
        if (ke.nugget != 0.0) {
            const Mat D = pairwise_distances(mu.points, mu.points);
            Kmm.array() += ke.nugget * (D.array() == 0.0).cast<double>();
        }
        const Mat Wk = W.transpose() * kx;
        Mat P = Kmm - Wk - Wk.transpose() + W.transpose() * KW;
        B.V = mu.weights.dot(P.array().square().matrix() * mu.weights);
    }
    finish(B, rho, Tr, mu, opt);
    return B;
}

MomentBundle independent_limit_bundle(const Mat& R, const Mat& W, const IntegrationMeasure& mu,
                                      const BundleOptions& opt) {
    check_inputs(R, W, mu);
    MomentBundle B;
    B.R = R;
    B.Q = R.transpose() * R;
    B.Q = (0.5 * (B.Q + B.Q.transpose())).eval();
    B.u = B.Q.diagonal();
    B.S = B.u * B.u.transpose();
    B.S.array() += 2.0 * B.Q.array().square();
    const Vec rho = (1.0 + W.array().square().colwise().sum()).transpose();
    const Mat Tr = -(R.transpose() * W);
    if (opt.compute_V) {
        const Mat G = W.transpose() * W;
        Mat P = G;
        const Mat D = pairwise_distances(mu.points, mu.points);
        P.array() += (D.array() == 0.0).cast<double>();
        B.V = mu.weights.dot(P.array().square().matrix() * mu.weights);
    }
    finish(B, rho, Tr, mu, opt);
    return B;
}

FlatLimitDiagnostics flat_limit_diagnostics(const Mat& R, const Mat& W, const IntegrationMeasure& mu) {
    check_inputs(R, W, mu);
    FlatLimitDiagnostics f;
    const Vec defect = (1.0 - W.colwise().sum().array()).transpose();
    f.J0 = defect.array().square().matrix().dot(mu.weights);
    const Vec r1 = R.transpose() * Vec::Ones(R.rows());
    f.u0 = r1.array().square();
    f.b0 = 3.0 * f.J0 * f.u0;
    const double scale = std::max(1.0, R.cwiseAbs().maxCoeff());
    f.sum_to_one = f.u0.maxCoeff() <= 1e-20 * scale * scale;
    f.rank_one_S = !f.sum_to_one;
    return f;
}

}  // namespace wloo
