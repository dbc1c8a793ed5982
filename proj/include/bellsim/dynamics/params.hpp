#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "bellsim/core/error.hpp"

namespace bellsim::dynamics {

/// Physical constants of the A/B Langevin ensembles.
///
/// The diffusion coefficient is fixed twice: nu = hbar / (2 m0) and
/// nu = kB T tau / m0. Given hbar, m0, tau and kB this determines the
/// heat-bath temperature, T = hbar / (2 kB tau). tau = infinity switches
/// friction and Brownian forces off.
struct PhysParams {
    double m0 = 1.0;
    double hbar = 1.0;
    double tau = 1.0;
    double tau_coll = 0.1;
    double kB = 1.0;
    double temperature = 0.5;
    double c_max = std::numeric_limits<double>::infinity();

    static PhysParams natural(double m0, double hbar, double tau, double tau_coll, double kB = 1.0,
                              double c_max = std::numeric_limits<double>::quiet_NaN()) {
        PhysParams p;
        p.m0 = m0;
        p.hbar = hbar;
        p.tau = tau;
        p.tau_coll = tau_coll;
        p.kB = kB;
        p.temperature = std::isinf(tau) ? 0.0 : hbar / (2.0 * kB * tau);
        p.c_max = std::isnan(c_max) ? p.default_c_max() : c_max;
        p.validate();
        return p;
    }

    double nu() const noexcept { return hbar / (2.0 * m0); }
    double nu_thermal() const noexcept { return std::isinf(tau) ? nu() : kB * temperature * tau / m0; }
    double thermal_speed() const noexcept { return std::sqrt(kB * temperature / m0); }
    double default_c_max() const noexcept {
        const double v = 100.0 * thermal_speed();
        return v > 0.0 ? v : std::numeric_limits<double>::infinity();
    }
    /// Standard deviation of each Brownian force component, sqrt(m0 kB T / (2 tau_coll^2)).
    double force_sigma() const noexcept { return std::sqrt(m0 * kB * temperature / 2.0) / tau_coll; }
    bool friction_enabled() const noexcept { return std::isfinite(tau); }

    void validate() const {
        BELLSIM_REQUIRE(m0 > 0.0 && std::isfinite(m0), PreconditionError, "m0 must be positive");
        BELLSIM_REQUIRE(hbar > 0.0 && std::isfinite(hbar), PreconditionError, "hbar must be positive");
        BELLSIM_REQUIRE(tau > 0.0, PreconditionError, "tau must be positive");
        BELLSIM_REQUIRE(tau_coll > 0.0 && std::isfinite(tau_coll), PreconditionError, "tau_coll must be positive");
        BELLSIM_REQUIRE(kB > 0.0 && std::isfinite(kB), PreconditionError, "kB must be positive");
        BELLSIM_REQUIRE(temperature >= 0.0 && std::isfinite(temperature), PreconditionError,
                        "temperature must be finite and nonnegative");
        BELLSIM_REQUIRE(c_max > 0.0, PreconditionError, "c_max must be positive");
        if (std::isfinite(tau)) {
            const double rel = std::abs(nu_thermal() - nu()) / nu();
            BELLSIM_REQUIRE(rel <= 1e-12, PreconditionError,
                            "kB T tau / m0 = " + std::to_string(nu_thermal()) + " disagrees with hbar / (2 m0) = " +
                                std::to_string(nu()));
        } else {
            BELLSIM_REQUIRE(temperature == 0.0, PreconditionError, "tau = infinity requires temperature 0");
        }
    }
};

}  // namespace bellsim::dynamics
