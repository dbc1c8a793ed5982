#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>

#include "bellsim/core/error.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::epr {

/// Detection rule applied at the end of the flight.
///   IndependentBorn        each station samples its outcome from the Born
///                          probabilities of its own final spin, with fresh
///                          station-local randomness.
///   SharedStreamThreshold  outcome = final spin, flipped iff U >= cos^2(a/2),
///                          where U is the pair's shared Brownian value at the
///                          detection step mapped to (0,1) and a is the local
///                          detector angle.
///   AnalyticQuantumOracle  joint sampling from the singlet probabilities. Not
///                          a station-local rule; used to validate estimators.
enum class MeasurementModel : std::uint8_t { IndependentBorn, SharedStreamThreshold, AnalyticQuantumOracle };

constexpr std::string_view to_string(MeasurementModel m) noexcept {
    switch (m) {
        case MeasurementModel::IndependentBorn: return "IndependentBorn";
        case MeasurementModel::SharedStreamThreshold: return "SharedStreamThreshold";
        case MeasurementModel::AnalyticQuantumOracle: return "AnalyticQuantumOracle";
    }
    return "?";
}

inline MeasurementModel measurement_model_from_string(std::string_view s) {
    for (auto m : {MeasurementModel::IndependentBorn, MeasurementModel::SharedStreamThreshold,
                   MeasurementModel::AnalyticQuantumOracle})
        if (s == to_string(m)) return m;
    throw ConfigError("unknown measurement model '" + std::string(s) + "'");
}

struct PairConfig {
    std::size_t pairs = 10'000;
    std::uint64_t master_seed = 1;
    double flight_time = 0.5;
    double dt = 0.1;
    MeasurementModel model = MeasurementModel::SharedStreamThreshold;
    dynamics::PhysParams physics = dynamics::PhysParams::natural(1.0, 1.0, 1.0, 0.1);
    std::size_t ensemble_size = 64;  // pairs simulated together in one wing ensemble
    double drift_speed = 1.0;        // mean initial speed away from the source
    double velocity_spread = std::numeric_limits<double>::quiet_NaN();  // per component; NaN: thermal speed
    double bin_width = std::numeric_limits<double>::infinity();         // along the flight axis; inf: one bin
    dynamics::ExchangeSelection selection = dynamics::ExchangeSelection::ExtremePair;
    std::size_t window = 16;

    double spread() const noexcept { return std::isnan(velocity_spread) ? physics.thermal_speed() : velocity_spread; }

    std::size_t steps() const {
        const double n = std::round(flight_time / dt);
        BELLSIM_REQUIRE(n >= 1.0 && std::abs(n * dt - flight_time) <= 1e-9 * flight_time, PreconditionError,
                        "flight_time must be a whole number of time steps");
        return static_cast<std::size_t>(n);
    }

    void validate() const {
        BELLSIM_REQUIRE(pairs >= 1, PreconditionError, "pairs must be at least 1");
        BELLSIM_REQUIRE(dt > 0.0 && std::isfinite(dt), PreconditionError, "dt must be positive");
        BELLSIM_REQUIRE(dt <= flight_time, PreconditionError, "dt must not exceed flight_time");
        BELLSIM_REQUIRE(dt <= physics.tau, PreconditionError, "dt must not exceed tau");
        BELLSIM_REQUIRE(ensemble_size >= 1, PreconditionError, "ensemble_size must be at least 1");
        BELLSIM_REQUIRE(std::isfinite(drift_speed), PreconditionError, "drift_speed must be finite");
        BELLSIM_REQUIRE(spread() >= 0.0 && std::isfinite(spread()), PreconditionError,
                        "velocity_spread must be finite and nonnegative");
        BELLSIM_REQUIRE(bin_width > 0.0, PreconditionError, "bin_width must be positive");
        BELLSIM_REQUIRE(window >= 1, PreconditionError, "exchange window must be at least 1");
        physics.validate();
        (void)steps();
    }
};

}  // namespace bellsim::epr
