#pragma once

#include <cstdint>

#include "bellsim/core/random.hpp"
#include "bellsim/core/vec3.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::dynamics {

/// Deterministic Gaussian force stream. The force at step t is a pure function
/// of (seed, t, component); each component has mean 0 and standard deviation
/// `sigma`.
class BrownianSource {
public:
    BrownianSource() = default;
    BrownianSource(std::uint64_t seed, double sigma) : stream_(rng::derive(seed, 0x42524f574eull)), seed_(seed), sigma_(sigma) {}
    BrownianSource(std::uint64_t seed, const PhysParams& p) : BrownianSource(seed, p.force_sigma()) {}

    std::uint64_t seed() const noexcept { return seed_; }
    double sigma() const noexcept { return sigma_; }

    Vec3 sample(std::uint64_t t) const noexcept {
        return {sigma_ * stream_.gaussian(t, 0), sigma_ * stream_.gaussian(t, 1), sigma_ * stream_.gaussian(t, 2)};
    }

    /// Standard-normal value behind component `c` at step t.
    double unit(std::uint64_t t, std::uint64_t c) const noexcept { return stream_.gaussian(t, c); }

private:
    rng::CounterStream stream_;
    std::uint64_t seed_ = 0;
    double sigma_ = 0.0;
};

inline Vec3 sample_brownian_force(const BrownianSource& src, std::uint64_t t) noexcept { return src.sample(t); }

}  // namespace bellsim::dynamics
