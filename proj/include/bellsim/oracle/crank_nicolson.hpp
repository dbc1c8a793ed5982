#pragma once

// Crank-Nicolson propagation of i hbar dpsi/dt = (-hbar^2/(2 m0) d2/dx2 + V) psi:
//   (1 + i dt H / (2 hbar)) psi' = (1 - i dt H / (2 hbar)) psi,
// with H the three-point discretization on the interior points and psi = 0 on
// both end points. The Cayley form is unitary for Hermitian H.

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/dynamics/params.hpp"
#include "bellsim/oracle/wavefunction.hpp"

namespace bellsim::oracle {

/// Reusable propagator for a fixed grid, potential and time step. The
/// forward-elimination coefficients of the tridiagonal solve are computed once.
class CrankNicolson {
public:
    CrankNicolson(const Grid1D& g, const Potential& v, const dynamics::PhysParams& p, double dt) : grid_(g) {
        g.validate();
        BELLSIM_REQUIRE(v.size() == g.n, PreconditionError, "one potential value per grid point is required");
        BELLSIM_REQUIRE(dt > 0.0 && std::isfinite(dt), PreconditionError, "dt must be positive");
        for (double x : v) BELLSIM_REQUIRE(std::isfinite(x), PreconditionError, "potential must be finite");
        const double dx = g.dx();
        const double kin = p.hbar * p.hbar / (2.0 * p.m0 * dx * dx);
        const cplx f{0.0, dt / (2.0 * p.hbar)};
        off_ = -kin * f;  // off-diagonal of i dt H / (2 hbar)
        const std::size_t m = g.n - 2;
        diag_.resize(m);
        for (std::size_t k = 0; k < m; ++k) diag_[k] = (2.0 * kin + v[k + 1]) * f;

        // Forward sweep for (1 + A): a = c = off_, b_k = 1 + diag_k.
        cprime_.resize(m);
        inv_.resize(m);
        cplx prev = 0.0;
        for (std::size_t k = 0; k < m; ++k) {
            const cplx denom = 1.0 + diag_[k] - off_ * prev;
            BELLSIM_REQUIRE(std::abs(denom) > 1e-300, NumericalError, "singular Crank-Nicolson system");
            inv_[k] = 1.0 / denom;
            prev = cprime_[k] = off_ * inv_[k];
        }
    }

    void step(WaveFunction& w) const {
        BELLSIM_REQUIRE(w.grid == grid_, PreconditionError, "wave function lives on a different grid");
        const std::size_t m = diag_.size();
        auto& psi = w.psi;
        // rhs = (1 - A) psi on interior points, then Thomas substitution.
        std::vector<cplx> rhs(m);
        for (std::size_t k = 0; k < m; ++k) {
            const std::size_t i = k + 1;
            rhs[k] = (1.0 - diag_[k]) * psi[i] - off_ * (psi[i - 1] + psi[i + 1]);
        }
        cplx prev = 0.0;
        for (std::size_t k = 0; k < m; ++k) prev = rhs[k] = (rhs[k] - off_ * prev) * inv_[k];
        for (std::size_t k = m - 1; k-- > 0;) rhs[k] -= cprime_[k] * rhs[k + 1];
        psi.front() = psi.back() = 0.0;
        for (std::size_t k = 0; k < m; ++k) psi[k + 1] = rhs[k];
    }

    const Grid1D& grid() const noexcept { return grid_; }

private:
    Grid1D grid_;
    cplx off_;
    std::vector<cplx> diag_, cprime_, inv_;
};

inline WaveFunction crank_nicolson_step(WaveFunction psi, const Potential& v, const dynamics::PhysParams& p, double dt) {
    CrankNicolson(psi.grid, v, p, dt).step(psi);
    return psi;
}

struct SchrodingerRun {
    WaveFunction final_state;
    std::vector<WaveFunction> snapshots;  // including t = 0, if requested
    std::vector<double> times;
    std::size_t steps = 0;
};

/// Evolves psi0 to t_final, which must be a whole number of steps dt.
/// snapshot_every = k > 0 stores the state at t = 0 and after every k steps.
inline SchrodingerRun evolve_schrodinger(const WaveFunction& psi0, const Potential& v, const dynamics::PhysParams& p,
                                         double t_final, double dt, std::size_t snapshot_every = 0) {
    BELLSIM_REQUIRE(dt > 0.0 && t_final >= dt * (1.0 - 1e-12), PreconditionError, "t_final must be at least dt");
    const double ratio = t_final / dt;
    const auto steps = static_cast<std::size_t>(std::llround(ratio));
    BELLSIM_REQUIRE(std::abs(ratio - static_cast<double>(steps)) <= 1e-9 * ratio, PreconditionError,
                    "t_final must be a whole number of steps");
    const CrankNicolson cn(psi0.grid, v, p, dt);
    SchrodingerRun r;
    r.steps = steps;
    r.final_state = psi0;
    if (snapshot_every) {
        r.snapshots.push_back(psi0);
        r.times.push_back(0.0);
    }
    for (std::size_t s = 1; s <= steps; ++s) {
        cn.step(r.final_state);
        if (snapshot_every && s % snapshot_every == 0) {
            r.snapshots.push_back(r.final_state);
            r.times.push_back(static_cast<double>(s) * dt);
        }
    }
    return r;
}

}  // namespace bellsim::oracle
