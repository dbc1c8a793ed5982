#pragma once

// Stern-Gerlach detection at the end of the flight. Detector axes lie in the
// y-z plane at angle a from +z (the axis of the source preparation).

#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <numbers>
#include <utility>

#include "bellsim/core/labels.hpp"
#include "bellsim/core/random.hpp"
#include "bellsim/epr/config.hpp"
#include "bellsim/spin/singlet.hpp"
#include "bellsim/spin/spinor.hpp"

namespace bellsim::epr {

namespace tag {
inline constexpr std::uint64_t kStation1 = 0x53544131;
inline constexpr std::uint64_t kStation2 = 0x53544132;
inline constexpr std::uint64_t kOracle = 0x4f52434c;
}  // namespace tag

/// Degrees folded into [0, 360).
inline double normalize_deg(double deg) {
    BELLSIM_REQUIRE(std::isfinite(deg), PreconditionError, "detector angle must be finite");
    double r = std::fmod(deg, 360.0);
    if (r < 0.0) r += 360.0;
    return r >= 360.0 ? 0.0 : r;
}

/// Angle between the detector axis and +z, in [0, pi].
inline double detector_polar_angle(double deg) {
    const double a = normalize_deg(deg);
    return (a > 180.0 ? 360.0 - a : a) * (std::numbers::pi / 180.0);
}

/// Counter used to address station randomness for a given local setting.
inline std::uint64_t setting_counter(double deg) {
    return static_cast<std::uint64_t>(std::llround(normalize_deg(deg) * 1e6));
}

struct DetectionInput {
    std::size_t pair = 0;
    std::uint64_t lambda1 = 0, lambda2 = 0;
    double mu_deg = 0.0, nu_deg = 0.0;  // wing 1 and wing 2 detector angles
    Spin final1 = Spin::Up, final2 = Spin::Down;
    double u1 = 0.5, u2 = 0.5;  // shared value as seen by wing 1 and wing 2
};

/// Maps one pair at the detectors to (outcome 1, outcome 2).
using Detector = std::function<std::pair<Spin, Spin>(const DetectionInput&)>;

/// Final spin, flipped iff u >= cos^2(theta/2).
inline Spin threshold_outcome(Spin final_spin, double deg, double u) {
    const double c = std::cos(0.5 * detector_polar_angle(deg));
    return u >= c * c ? flipped(final_spin) : final_spin;
}

/// Born-rule sample with randomness private to the station and its setting.
inline Spin born_outcome(Spin final_spin, double deg, std::uint64_t lambda, int wing) {
    const auto [p_up, p_down] = spin::measurement_probs(final_spin, detector_polar_angle(deg));
    (void)p_down;
    const rng::CounterStream s(rng::derive(lambda, wing == 1 ? tag::kStation1 : tag::kStation2));
    return s.uniform(setting_counter(deg), 0) < p_up ? Spin::Up : Spin::Down;
}

/// Joint sample from the singlet outcome distribution.
inline std::pair<Spin, Spin> oracle_outcome(std::uint64_t lambda, double mu_deg, double nu_deg) {
    const auto p = spin::quantum_joint_probs(spin::Axis::planar(mu_deg * std::numbers::pi / 180.0),
                                             spin::Axis::planar(nu_deg * std::numbers::pi / 180.0));
    const rng::CounterStream s(rng::derive(lambda, tag::kOracle));
    const double u = s.uniform(setting_counter(mu_deg), setting_counter(nu_deg));
    constexpr std::array<std::pair<Spin, Spin>, 4> cells{
        {{Spin::Up, Spin::Up}, {Spin::Up, Spin::Down}, {Spin::Down, Spin::Up}, {Spin::Down, Spin::Down}}};
    double acc = 0.0;
    for (std::size_t k = 0; k < 3; ++k) {
        acc += std::max(0.0, p[k]);
        if (u < acc) return cells[k];
    }
    return cells[3];
}

inline Detector make_detector(MeasurementModel m) {
    switch (m) {
        case MeasurementModel::IndependentBorn:
            return [](const DetectionInput& in) {
                return std::pair{born_outcome(in.final1, in.mu_deg, in.lambda1, 1),
                                 born_outcome(in.final2, in.nu_deg, in.lambda2, 2)};
            };
        case MeasurementModel::SharedStreamThreshold:
            return [](const DetectionInput& in) {
                return std::pair{threshold_outcome(in.final1, in.mu_deg, in.u1),
                                 threshold_outcome(in.final2, in.nu_deg, in.u2)};
            };
        case MeasurementModel::AnalyticQuantumOracle:
            return [](const DetectionInput& in) { return oracle_outcome(in.lambda1, in.mu_deg, in.nu_deg); };
    }
    throw PreconditionError("unknown measurement model");
}

}  // namespace bellsim::epr
