#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "wloo/kernels.hpp"

namespace wloo {

struct Design {
    Mat points;  // n x d, one point per row
    std::string tag;  // grid | sobol | packing | user
};

struct IntegrationMeasure {
    Mat points;   // N x d
    Vec weights;  // sums to 1

    static IntegrationMeasure uniform(Mat pts);
    Eigen::Index size() const { return points.rows(); }
};

// Gray-code ordered Sobol' points, optionally digitally shifted by a seeded key.
Mat sobol_points(int d, Eigen::Index N, std::optional<std::uint64_t> scramble_seed = std::nullopt);

Mat regular_grid(int d, int per_axis);

// Relaxed greedy packing over a finite candidate set, starting from the centre.
Mat greedy_packing(const Mat& candidates, Eigen::Index n, double a, std::uint64_t seed);

// max over eval points of the distance to their k-th nearest design point (k >= 1).
double nn_distance(const Mat& eval_points, const Mat& design, Eigen::Index k);

double packing_radius(const Mat& design);
double covering_radius(const Mat& eval_points, const Mat& design);

// Lower bounds on packing and covering efficiency relative to the optimal
// n-point designs on the candidate set, using a farthest-point reference run.
struct EfficiencyBounds {
    double packing = 0.0;
    double covering = 0.0;
};
EfficiencyBounds efficiency_bounds(const Mat& candidates, const Mat& design);

double theta_from_coverage(Family family, double D, double target);

enum class MeanMode { Zero, Constant };

// Mean squared LOO residual of the simple (Zero) or ordinary (Constant) kriging
// predictor for family(theta); +inf when K needs jitter or is numerically singular.
double loo_objective(const Vec& y, const Mat& X, Family family, double theta, MeanMode mode,
                     double nugget = 0.0);

double theta_loo(const Vec& y, const Mat& X, Family family, MeanMode mode, double nugget = 0.0);

inline double clamp_theta(double t, double lo, double hi) { return t < lo ? lo : (t > hi ? hi : t); }

}  // namespace wloo
