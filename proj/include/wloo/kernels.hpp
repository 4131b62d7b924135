#pragma once

#include <string>

#include "wloo/numerics.hpp"

namespace wloo {

enum class Family { Matern12, Matern32, Matern52, Gaussian, InverseMultiquadric };

std::string family_name(Family f);
Family parse_family(const std::string& s);

// Isotropic correlation psi(theta * |x - x'|), plus nugget on exact coincidence.
struct KernelSpec {
    Family family = Family::Matern32;
    double theta = 1.0;
    double nugget = 0.0;

    KernelSpec() = default;
    KernelSpec(Family f, double t, double r = 0.0);
};

// psi at scaled distance a = theta * r.
double psi(Family f, double a);

// Points are stored one per row.
double eval(const KernelSpec& k, const Eigen::Ref<const Vec>& x, const Eigen::Ref<const Vec>& x2);

Mat kernel_matrix(const KernelSpec& k, const Mat& X);

// Column j is k_n(Y_j); the nugget is never added here.
Mat cross_matrix(const KernelSpec& k, const Mat& X, const Mat& Y);
Vec cross_vector(const KernelSpec& k, const Mat& X, const Eigen::Ref<const Vec>& x);

Mat pairwise_distances(const Mat& A, const Mat& B);

}  // namespace wloo
