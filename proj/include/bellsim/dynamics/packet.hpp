#pragma once

// Initial ensembles for a free Gaussian wave packet in one dimension.
//
// Positions are drawn from N(x0, sigma0^2) and velocities from
// N(hbar k0 / m0, (hbar / (2 m0 sigma0))^2), the position and velocity
// spreads of the minimum-uncertainty packet. Trajectories alternate between
// the A and B sub-ensembles by id so both start with matched statistics.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/random.hpp"
#include "bellsim/dynamics/brownian.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::dynamics {

struct PacketSpec {
    std::size_t trajectories = 100'000;
    double sigma0 = 1.0;
    double x0 = 0.0;
    double k0 = 0.0;
    double bin_width = 0.0;  // <= 0: sigma0 / 5
};

struct PacketEnsemble {
    EnsembleState state;
    std::vector<BrownianSource> sources;
};

inline PacketEnsemble make_gaussian_packet(const PacketSpec& spec, const PhysParams& p, std::uint64_t seed) {
    BELLSIM_REQUIRE(spec.trajectories >= 1, PreconditionError, "packet needs at least one trajectory");
    BELLSIM_REQUIRE(spec.sigma0 > 0.0, PreconditionError, "packet width must be positive");
    const rng::CounterStream init(rng::derive(seed, 0x494e4954ull));
    const double sigma_v = p.hbar / (2.0 * p.m0 * spec.sigma0);
    const double v0 = p.hbar * spec.k0 / p.m0;
    PacketEnsemble out;
    out.state.bins = BinGrid::along_x(spec.bin_width > 0.0 ? spec.bin_width : spec.sigma0 / 5.0);
    out.state.trajectories.resize(spec.trajectories);
    out.sources.resize(spec.trajectories);
    for (std::size_t i = 0; i < spec.trajectories; ++i) {
        auto& t = out.state.trajectories[i];
        t.id = i;
        t.position = {spec.x0 + spec.sigma0 * init.gaussian(i, 0), 0.0, 0.0};
        t.velocity = {v0 + sigma_v * init.gaussian(i, 1), 0.0, 0.0};
        t.ensemble = i % 2 == 0 ? Ensemble::A : Ensemble::B;
        t.spin = Spin::Up;
        out.sources[i] = BrownianSource(rng::derive(seed, 0x1000000ull + i), p);
    }
    return out;
}

/// sigma0^2 + (hbar t / (2 m0 sigma0))^2
constexpr double free_packet_variance(double sigma0, double hbar, double m0, double t) noexcept {
    const double s = hbar * t / (2.0 * m0 * sigma0);
    return sigma0 * sigma0 + s * s;
}

/// Sub-ensemble sizes for a weighted superposition sum_i a_i |i>: size_i is
/// proportional to total * a_i^2, rounded by largest remainder so the sizes
/// sum to `total` exactly. Remainder ties go to the lower index.
inline std::vector<std::size_t> superposition_sizes(std::size_t total, const std::vector<double>& amplitudes) {
    BELLSIM_REQUIRE(!amplitudes.empty(), PreconditionError, "superposition needs at least one amplitude");
    double norm2 = 0.0;
    for (double a : amplitudes) {
        BELLSIM_REQUIRE(std::isfinite(a), PreconditionError, "amplitudes must be finite");
        norm2 += a * a;
    }
    BELLSIM_REQUIRE(norm2 > 0.0, PreconditionError, "amplitudes must not all vanish");
    std::vector<std::size_t> sizes(amplitudes.size());
    std::vector<double> rem(amplitudes.size());
    std::size_t used = 0;
    for (std::size_t i = 0; i < amplitudes.size(); ++i) {
        const double exact = static_cast<double>(total) * amplitudes[i] * amplitudes[i] / norm2;
        sizes[i] = static_cast<std::size_t>(std::floor(exact));
        rem[i] = exact - static_cast<double>(sizes[i]);
        used += sizes[i];
    }
    std::vector<std::size_t> order(amplitudes.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return rem[a] > rem[b]; });
    for (std::size_t k = 0; used < total; ++k, ++used) ++sizes[order[k % order.size()]];
    return sizes;
}

}  // namespace bellsim::dynamics
