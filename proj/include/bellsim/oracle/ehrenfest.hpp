#pragma once

// Ehrenfest check: m0 d<v>/dt = <F_ext> = -<dV/dx>, with d<v>/dt from
// centered differences of the snapshot series.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/dynamics/params.hpp"
#include "bellsim/oracle/wavefunction.hpp"

namespace bellsim::oracle {

/// <-dV/dx> with a centered difference inside and one-sided ones at the ends.
inline double mean_force(const WaveFunction& w, const Potential& v) {
    BELLSIM_REQUIRE(v.size() == w.size(), PreconditionError, "one potential value per grid point is required");
    const std::size_t n = w.size();
    const double dx = w.grid.dx();
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dv = i == 0       ? (v[1] - v[0]) / dx
                          : i == n - 1 ? (v[n - 1] - v[n - 2]) / dx
                                       : (v[i + 1] - v[i - 1]) / (2.0 * dx);
        s -= dv * std::norm(w.psi[i]);
    }
    return s * dx / w.norm2();
}

struct EhrenfestReport {
    double max_residual = 0.0;  // max |d<v>/dt - <F>/m0| over interior snapshots
    std::size_t worst_index = 0;
    std::vector<double> mean_velocity;
    std::vector<double> residuals;  // one per interior snapshot
};

/// `dt` is the (uniform) spacing between consecutive snapshots.
inline EhrenfestReport ehrenfest_check(const std::vector<WaveFunction>& snapshots, double dt, const Potential& v,
                                       const dynamics::PhysParams& p) {
    BELLSIM_REQUIRE(snapshots.size() >= 3, PreconditionError, "Ehrenfest check needs at least 3 snapshots");
    BELLSIM_REQUIRE(dt > 0.0, PreconditionError, "snapshot spacing must be positive");
    EhrenfestReport r;
    for (const auto& s : snapshots) r.mean_velocity.push_back(s.mean_velocity(p.hbar, p.m0));
    for (std::size_t k = 1; k + 1 < snapshots.size(); ++k) {
        const double dvdt = (r.mean_velocity[k + 1] - r.mean_velocity[k - 1]) / (2.0 * dt);
        const double res = std::abs(dvdt - mean_force(snapshots[k], v) / p.m0);
        r.residuals.push_back(res);
        if (res > r.max_residual || k == 1) {
            r.max_residual = res;
            r.worst_index = k;
        }
    }
    return r;
}

/// Overload taking the snapshot times; they must be uniformly spaced.
inline EhrenfestReport ehrenfest_check(const std::vector<WaveFunction>& snapshots, const std::vector<double>& times,
                                       const Potential& v, const dynamics::PhysParams& p) {
    BELLSIM_REQUIRE(times.size() == snapshots.size(), PreconditionError, "one time per snapshot is required");
    BELLSIM_REQUIRE(times.size() >= 3, PreconditionError, "Ehrenfest check needs at least 3 snapshots");
    const double dt = times[1] - times[0];
    for (std::size_t k = 1; k < times.size(); ++k)
        BELLSIM_REQUIRE(std::abs(times[k] - times[k - 1] - dt) <= 1e-9 * std::abs(dt), PreconditionError,
                        "snapshots must be uniformly spaced in time");
    return ehrenfest_check(snapshots, dt, v, p);
}

}  // namespace bellsim::oracle
