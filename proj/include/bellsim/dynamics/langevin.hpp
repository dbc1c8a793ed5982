#pragma once

#include <cmath>
#include <string>

#include "bellsim/core/error.hpp"
#include "bellsim/core/vec3.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::dynamics {

/// One semi-implicit Euler step of
///   m0 dv/dt = F_ext + F_brown -/+ (m0 / tau) v      (B: -, A: +)
/// followed by x' = x + v' dt. The speed is clipped to p.c_max; `capped` is
/// incremented when that happens.
inline Trajectory step_langevin(const Trajectory& traj, const Vec3& f_ext, const Vec3& f_brown, const PhysParams& p,
                                double dt, std::size_t* capped = nullptr) {
    BELLSIM_REQUIRE(dt > 0.0 && dt <= p.tau, PreconditionError, "time step must satisfy 0 < dt <= tau");
    BELLSIM_REQUIRE(is_finite(f_ext) && is_finite(f_brown), PreconditionError,
                    "non-finite force on trajectory " + std::to_string(traj.id));
    Trajectory out = traj;
    Vec3 accel = (f_ext + f_brown) / p.m0;
    if (p.friction_enabled()) {
        const double sign = traj.ensemble == Ensemble::A ? 1.0 : -1.0;
        accel += (sign / p.tau) * traj.velocity;
    }
    out.velocity = traj.velocity + dt * accel;
    const double speed = norm(out.velocity);
    BELLSIM_REQUIRE(std::isfinite(speed), NumericalError, "velocity diverged on trajectory " + std::to_string(traj.id));
    if (speed > p.c_max) {
        out.velocity *= p.c_max / speed;
        if (capped) ++*capped;
    }
    out.position = traj.position + dt * out.velocity;
    return out;
}

}  // namespace bellsim::dynamics
