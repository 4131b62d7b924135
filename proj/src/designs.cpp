#include "wloo/designs.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <vector>

#include "wloo/rng.hpp"

namespace wloo {

namespace {

struct DirectionEntry {
    int s;
    unsigned a;
    std::array<unsigned, 7> m;
};

// new-joe-kuo-6.21201, dimensions 2..21
constexpr std::array<DirectionEntry, 20> kDirections{{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
    {5, 14, {1, 3, 5, 5, 31}},
    {6, 1, {1, 3, 3, 9, 7, 49}},
    {6, 13, {1, 1, 1, 15, 21, 21}},
    {6, 16, {1, 3, 1, 13, 27, 49}},
    {6, 19, {1, 1, 1, 15, 7, 5}},
    {6, 22, {1, 3, 1, 15, 13, 25}},
    {6, 25, {1, 1, 5, 5, 19, 61}},
    {7, 1, {1, 3, 7, 11, 23, 15, 103}},
    {7, 4, {1, 3, 7, 13, 13, 15, 69}},
}};

constexpr int kBits = 32;

std::array<std::uint32_t, kBits> direction_numbers(int dim) {
    std::array<std::uint32_t, kBits> v{};
    if (dim == 0) {
        for (int k = 0; k < kBits; ++k) v[k] = 1u << (kBits - 1 - k);
        return v;
    }
    const DirectionEntry& e = kDirections[dim - 1];
    const int s = e.s;
    for (int k = 0; k < s; ++k) v[k] = e.m[k] << (kBits - 1 - k);
    for (int k = s; k < kBits; ++k) {
        std::uint32_t x = v[k - s] ^ (v[k - s] >> s);
        for (int j = 1; j < s; ++j)
            if ((e.a >> (s - 1 - j)) & 1u) x ^= v[k - j];
        v[k] = x;
    }
    return v;
}

int rightmost_zero_bit(std::uint64_t i) {
    int c = 0;
    while (i & 1u) {
        i >>= 1;
        ++c;
    }
    return c;
}

}  // namespace

IntegrationMeasure IntegrationMeasure::uniform(Mat pts) {
    IntegrationMeasure m;
    const Eigen::Index N = pts.rows();
    if (N == 0) throw Error(Errc::EmptyInput, "measure has no support points");
    m.points = std::move(pts);
    m.weights = Vec::Constant(N, 1.0 / static_cast<double>(N));
    return m;
}

Mat sobol_points(int d, Eigen::Index N, std::optional<std::uint64_t> scramble_seed) {
    if (d < 1 || d > 21) throw Error(Errc::UnsupportedDimension, "sobol dimension must be in [1, 21]");
    if (N < 1) throw Error(Errc::InvalidArgument, "sobol count must be >= 1");
    if (static_cast<unsigned long long>(N) > (1ULL << kBits))
        throw Error(Errc::InvalidArgument, "sobol count exceeds 2^32");
    std::vector<std::array<std::uint32_t, kBits>> V(d);
    for (int j = 0; j < d; ++j) V[j] = direction_numbers(j);
    std::vector<std::uint32_t> shift(d, 0u);
    if (scramble_seed) {
        Rng rng(*scramble_seed, 0x50B01ULL);
        for (int j = 0; j < d; ++j) shift[j] = static_cast<std::uint32_t>(rng.next_u64() >> 32);
    }
    Mat P(N, d);
    std::vector<std::uint32_t> x(d, 0u);
    const double scale = std::ldexp(1.0, -kBits);
    for (Eigen::Index i = 0; i < N; ++i) {
        if (i > 0) {
            const int c = rightmost_zero_bit(static_cast<std::uint64_t>(i - 1));
            for (int j = 0; j < d; ++j) x[j] ^= V[j][c];
        }
        for (int j = 0; j < d; ++j) P(i, j) = static_cast<double>(x[j] ^ shift[j]) * scale;
    }
    return P;
}

Mat regular_grid(int d, int per_axis) {
    if (per_axis < 2) throw Error(Errc::InvalidArgument, "grid needs at least 2 points per axis");
    if (d < 1) throw Error(Errc::InvalidArgument, "grid dimension must be >= 1");
    Eigen::Index n = 1;
    for (int j = 0; j < d; ++j) n *= per_axis;
    Mat P(n, d);
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::Index r = i;
        // last coordinate varies fastest
        for (int j = d - 1; j >= 0; --j) {
            P(i, j) = static_cast<double>(r % per_axis) / static_cast<double>(per_axis - 1);
            r /= per_axis;
        }
    }
    return P;
}

Mat greedy_packing(const Mat& candidates, Eigen::Index n, double a, std::uint64_t seed) {
    const Eigen::Index N = candidates.rows();
    if (N == 0) throw Error(Errc::EmptyCandidates, "no candidate points");
    if (n > N) throw Error(Errc::TooManyPoints, "more design points requested than candidates");
    if (n < 1) throw Error(Errc::InvalidArgument, "design size must be >= 1");
    if (!(a >= 0.0 && a < 1.0)) throw Error(Errc::InvalidArgument, "relaxation must lie in [0, 1)");
    const Eigen::Index d = candidates.cols();
    Mat X(n, d);
    X.row(0).setConstant(0.5);
    std::vector<double> mind(N);
    std::vector<Eigen::Index> nearest(N, 0);
    for (Eigen::Index j = 0; j < N; ++j) mind[j] = (candidates.row(j) - X.row(0)).norm();
    Rng rng(seed, 0x6EEDULL);
    for (Eigen::Index k = 1; k < n; ++k) {
        Eigen::Index best = 0;
        for (Eigen::Index j = 1; j < N; ++j)
            if (mind[j] > mind[best]) best = j;
        const double alpha = a > 0.0 ? rng.uniform(0.0, a) : 0.0;
        X.row(k) = alpha * X.row(nearest[best]) + (1.0 - alpha) * candidates.row(best);
        for (Eigen::Index j = 0; j < N; ++j) {
            const double dist = (candidates.row(j) - X.row(k)).norm();
            if (dist < mind[j]) {
                mind[j] = dist;
                nearest[j] = k;
            }
        }
    }
    return X;
}

double nn_distance(const Mat& eval_points, const Mat& design, Eigen::Index k) {
    const Eigen::Index n = design.rows();
    if (k < 1 || k > n) throw Error(Errc::KTooLarge, "neighbour index out of range");
    if (eval_points.cols() != design.cols()) throw Error(Errc::DimensionMismatch, "nn_distance: dimension mismatch");
    std::vector<double> dist(n);
    double worst = 0.0;
    for (Eigen::Index j = 0; j < eval_points.rows(); ++j) {
        for (Eigen::Index i = 0; i < n; ++i) dist[i] = (design.row(i) - eval_points.row(j)).norm();
        std::nth_element(dist.begin(), dist.begin() + (k - 1), dist.end());
        worst = std::max(worst, dist[k - 1]);
    }
    return worst;
}

double packing_radius(const Mat& design) {
    const Eigen::Index n = design.rows();
    if (n < 2) throw Error(Errc::SinglePoint, "packing radius needs two points");
    double m = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = i + 1; j < n; ++j) m = std::min(m, (design.row(i) - design.row(j)).norm());
    return 0.5 * m;
}

double covering_radius(const Mat& eval_points, const Mat& design) { return nn_distance(eval_points, design, 1); }

EfficiencyBounds efficiency_bounds(const Mat& candidates, const Mat& design) {
    const Eigen::Index n = design.rows();
    const Eigen::Index N = candidates.rows();
    if (n < 2) throw Error(Errc::SinglePoint, "efficiency needs two design points");
    // Farthest-point run on the candidates: the k-th selection distance delta_k
    // equals the covering radius of the first k-1 points and bounds the optimum.
    std::vector<double> mind(N, std::numeric_limits<double>::infinity());
    std::vector<double> delta;
    Eigen::Index cur = 0;
    for (Eigen::Index j = 0; j < N; ++j)
        mind[j] = (candidates.row(j) - candidates.row(0)).norm();
    for (Eigen::Index k = 1; k <= std::min(n, N - 1); ++k) {
        cur = static_cast<Eigen::Index>(std::max_element(mind.begin(), mind.end()) - mind.begin());
        delta.push_back(mind[cur]);
        for (Eigen::Index j = 0; j < N; ++j)
            mind[j] = std::min(mind[j], (candidates.row(j) - candidates.row(cur)).norm());
    }
    EfficiencyBounds e;
    // delta[k-1] = CR of the first k reference points = min distance of the first k+1.
    const double cr_ref_nm1 = delta[n - 2];
    e.packing = packing_radius(design) / cr_ref_nm1;
    const double cr = covering_radius(candidates, design);
    if (n < N) e.covering = 0.5 * delta[n - 1] / cr;
    else e.covering = 1.0;
    return e;
}

double theta_from_coverage(Family family, double D, double target) {
    if (!(target > 0.0 && target < 1.0)) throw Error(Errc::NoRoot, "coverage target must lie in (0, 1)");
    if (!(D > 0.0)) throw Error(Errc::InvalidArgument, "coverage distance must be > 0");
    double lo = std::log(1e-6), hi = std::log(1e6);
    auto g = [&](double lt) { return psi(family, std::exp(lt) * D) - target; };
    if (g(lo) < 0.0 || g(hi) > 0.0) throw Error(Errc::NoRoot, "target not bracketed on [1e-6, 1e6]");
    while (hi - lo > 1e-12) {
        const double mid = 0.5 * (lo + hi);
        if (g(mid) > 0.0) lo = mid;
        else hi = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double loo_objective(const Vec& y, const Mat& X, Family family, double theta, MeanMode mode, double nugget) {
    const Eigen::Index n = X.rows();
    Mat P;
    try {
        const Mat K = kernel_matrix(KernelSpec(family, theta, nugget), X);
        const SpdFactorization F = spd_factorize(K);
        // jittered or numerically singular K gives spuriously small residuals
        const Vec dl = F.llt().matrixLLT().diagonal();
        const double rc = dl.minCoeff() / dl.maxCoeff();
        if (F.jitter_applied() > 0.0 || rc * rc < 1e-12) return std::numeric_limits<double>::infinity();
        if (mode == MeanMode::Zero)
            P = solve(F, Mat(Mat::Identity(n, n)));
        else
            P = bordered_inverse(K).topLeftCorner(n, n);
    } catch (const Error&) {
        return std::numeric_limits<double>::infinity();
    }
    const Vec Py = P * y;
    double s = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
        const double e = Py[i] / P(i, i);
        s += e * e;
    }
    const double v = s / static_cast<double>(n);
    return std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
}

double theta_loo(const Vec& y, const Mat& X, Family family, MeanMode mode, double nugget) {
    const Eigen::Index n = X.rows();
    if (n < 3) throw Error(Errc::InvalidArgument, "theta_loo needs n >= 3");
    if (y.size() != n) throw Error(Errc::DimensionMismatch, "theta_loo: data length mismatch");
    if (mode == MeanMode::Constant) {
        const double m = y.mean();
        if ((y.array() - m).abs().maxCoeff() <= 1e-14 * std::max(1.0, std::abs(m)))
            throw Error(Errc::DegenerateData, "constant data: LOO residuals vanish for every theta");
    }
    constexpr int nodes = 60;
    const double l0 = std::log(1e-2), l1 = std::log(1e3);
    std::vector<double> lt(nodes), f(nodes);
    int best = 0;
    for (int i = 0; i < nodes; ++i) {
        lt[i] = l0 + (l1 - l0) * i / (nodes - 1);
        f[i] = loo_objective(y, X, family, std::exp(lt[i]), mode, nugget);
        if (f[i] < f[best]) best = i;
    }
    if (!std::isfinite(f[best])) throw Error(Errc::NotPositiveDefinite, "theta_loo: no admissible theta");
    double a = lt[std::max(best - 1, 0)], b = lt[std::min(best + 1, nodes - 1)];
    const double invphi = (std::sqrt(5.0) - 1.0) / 2.0;
    double c = b - invphi * (b - a), d = a + invphi * (b - a);
    auto obj = [&](double t) { return loo_objective(y, X, family, std::exp(t), mode, nugget); };
    double fc = obj(c), fd = obj(d);
    // width in log theta approximates relative width in theta
    while (b - a > 1e-4) {
        if (fc < fd) {
            b = d;
            d = c;
            fd = fc;
            c = b - invphi * (b - a);
            fc = obj(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + invphi * (b - a);
            fd = obj(d);
        }
    }
    double t_best = lt[best], f_best = f[best];
    if (fc < f_best) { t_best = c; f_best = fc; }
    if (fd < f_best) { t_best = d; f_best = fd; }
    return std::exp(t_best);
}

}  // namespace wloo
