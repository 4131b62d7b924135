#pragma once

#include <cstdint>

#include "wloo/numerics.hpp"

namespace wloo {

std::uint64_t splitmix64(std::uint64_t x);

// Counter-based: draw k is mix(key + k * golden) with key = f(seed, stream), so a
// stream never depends on the order in which replications run. Normals use
// Box-Muller and do not depend on the standard library.
class Rng {
public:
    explicit Rng(std::uint64_t seed, std::uint64_t stream = 0);

    std::uint64_t next_u64();
    std::uint64_t counter() const { return ctr_; }
    double uniform();  // [0, 1)
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    double normal();
    Vec normal_vector(Eigen::Index n);

private:
    std::uint64_t key_;
    std::uint64_t ctr_ = 0;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

}  // namespace wloo
