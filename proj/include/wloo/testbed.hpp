#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "wloo/designs.hpp"
#include "wloo/kernels.hpp"
#include "wloo/rng.hpp"

namespace wloo {

// y = L z with K = L L', sigma^2 = 1.
Vec sample_gp(const KernelSpec& k, const Mat& X, Rng& rng);
Vec sample_gp(const KernelSpec& k, const Mat& X, std::uint64_t seed);

// f_m: simple-kriging interpolator of one GP draw on m scrambled Sobol' points.
class RandomFunction {
public:
    RandomFunction(Mat Z, Vec y, KernelSpec interp);
    double operator()(const Eigen::Ref<const Vec>& x) const;
    Vec operator()(const Mat& points) const;
    const Mat& centres() const { return Z_; }
    const Vec& values() const { return y_; }

private:
    Mat Z_;
    Vec y_;
    Vec alpha_;
    KernelSpec k_;
};

RandomFunction random_fm(int d, Eigen::Index m, const KernelSpec& kernel_sim, const KernelSpec& kernel_interp,
                         std::uint64_t seed);

// Renormalised from (s, t) in [0,3] x [1,60].
double environmental(const Eigen::Ref<const Vec>& x);
// Renormalised from (M, S, V0, k); P0, Ta, T0 at their mid-ranges.
double piston4d(const Eigen::Ref<const Vec>& x);

Vec evaluate(const std::function<double(const Eigen::Ref<const Vec>&)>& f, const Mat& points);

Vec add_noise(const Vec& y, double gamma, Rng& rng);
Vec add_noise(const Vec& y, double gamma, std::uint64_t seed);

// mu-weighted sum of (f - eta)^2 with eta = W' y over the support.
double true_ise(const Vec& f_support, const Mat& W, const Vec& y, const Vec& mu_weights);

// variance of the observations with denominator n
double omega_n(const Vec& y);

}  // namespace wloo
