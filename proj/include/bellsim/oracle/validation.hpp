#pragma once

// Free-packet check of the ensemble dynamics against the Schrodinger oracle:
// the same Gaussian packet is evolved as a Langevin A/B ensemble and as a wave
// function, and the position densities and variances are compared.

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/dynamics/evolve.hpp"
#include "bellsim/dynamics/packet.hpp"
#include "bellsim/oracle/compare.hpp"
#include "bellsim/oracle/crank_nicolson.hpp"

namespace bellsim::oracle {

struct DensityConfig {
    std::uint64_t master_seed = 1;
    std::size_t trajectories = 100'000;
    double sigma0 = 1.0;
    double x0 = 0.0;
    double k0 = 0.0;
    dynamics::PhysParams physics = dynamics::PhysParams::natural(1.0, 1.0, 200.0, 1.0);
    double dt = 0.02;
    double t_final = std::numeric_limits<double>::quiet_NaN();  // NaN: time at which the variance doubles
    double exchange_bin_width = 0.2;
    dynamics::ExchangeSelection selection = dynamics::ExchangeSelection::MinResidual;
    Grid1D grid{-20.0, 20.0, 2001};
    double oracle_dt = 0.002;
    double histogram_width = 0.1;
    double ks_threshold = 0.05;
    double variance_tolerance = 0.05;  // relative, ensemble vs analytic

    /// 2 m0 sigma0^2 / hbar, where sigma^2(t) = 2 sigma0^2.
    double doubling_time() const noexcept { return 2.0 * physics.m0 * sigma0 * sigma0 / physics.hbar; }
    double final_time() const noexcept { return std::isnan(t_final) ? doubling_time() : t_final; }

    void validate() const {
        physics.validate();
        grid.validate();
        BELLSIM_REQUIRE(trajectories >= 2, PreconditionError, "density check needs at least two trajectories");
        BELLSIM_REQUIRE(sigma0 > 0.0 && std::isfinite(sigma0), PreconditionError, "sigma0 must be positive");
        BELLSIM_REQUIRE(std::isfinite(x0) && std::isfinite(k0), PreconditionError, "x0 and k0 must be finite");
        BELLSIM_REQUIRE(dt > 0.0 && oracle_dt > 0.0, PreconditionError, "time steps must be positive");
        BELLSIM_REQUIRE(final_time() > 0.0 && std::isfinite(final_time()), PreconditionError,
                        "t_final must be positive");
        for (double h : {dt, oracle_dt}) {
            const double r = final_time() / h;
            BELLSIM_REQUIRE(r >= 1.0 - 1e-12 && std::abs(r - std::round(r)) <= 1e-9 * r, PreconditionError,
                            "t_final must be a whole number of steps of dt and oracle_dt");
        }
        BELLSIM_REQUIRE(exchange_bin_width > 0.0, PreconditionError, "exchange bin width must be positive");
        BELLSIM_REQUIRE(histogram_width > 0.0 && histogram_width < grid.x_max - grid.x_min, PreconditionError,
                        "histogram width must be positive and smaller than the grid");
        BELLSIM_REQUIRE(x0 - 8.0 * sigma0 > grid.x_min && x0 + 8.0 * sigma0 < grid.x_max, PreconditionError,
                        "the grid must extend at least 8 sigma0 beyond the packet centre");
    }
};

struct DensityResult {
    double time = 0.0;
    double analytic_variance = 0.0;
    double ensemble_variance = 0.0;
    double oracle_variance = 0.0;
    double oracle_variance_refined = 0.0;  // grid spacing and oracle_dt halved
    double ks_distance = 0.0;
    double l1_distance = 0.0;
    double outside_fraction = 0.0;  // trajectories beyond the oracle grid
    std::size_t swaps = 0;
    std::size_t capped = 0;
    bool ks_ok = false;
    bool variance_ok = false;
    BinnedDensity histogram;
    WaveFunction oracle;

    double ensemble_variance_error() const noexcept { return std::abs(ensemble_variance / analytic_variance - 1.0); }
    double oracle_variance_error() const noexcept { return std::abs(oracle_variance / analytic_variance - 1.0); }
    double oracle_refined_error() const noexcept {
        return std::abs(oracle_variance_refined / analytic_variance - 1.0);
    }
    bool warning() const noexcept { return !(ks_ok && variance_ok); }
};

inline double oracle_free_variance(const DensityConfig& cfg, const Grid1D& g, double dt) {
    const auto run = evolve_schrodinger(gaussian_packet(g, cfg.sigma0, cfg.x0, cfg.k0), zero_potential(g), cfg.physics,
                                        cfg.final_time(), dt);
    return run.final_state.variance_x();
}

inline DensityResult run_density_validation(const DensityConfig& cfg, unsigned threads = 1) {
    cfg.validate();
    DensityResult r;
    r.time = cfg.final_time();
    r.analytic_variance = dynamics::free_packet_variance(cfg.sigma0, cfg.physics.hbar, cfg.physics.m0, r.time);

    dynamics::PacketSpec spec{cfg.trajectories, cfg.sigma0, cfg.x0, cfg.k0, cfg.exchange_bin_width};
    auto packet = dynamics::make_gaussian_packet(spec, cfg.physics, cfg.master_seed);
    dynamics::EvolveOptions eo;
    eo.dt = cfg.dt;
    eo.steps = static_cast<std::size_t>(std::llround(r.time / cfg.dt));
    eo.exchange.selection = cfg.selection;
    eo.threads = threads;
    const auto ev = dynamics::evolve(packet.state, packet.sources, dynamics::zero_force(), cfg.physics, eo);
    for (const auto& d : ev.diagnostics) {
        r.swaps += d.swaps;
        r.capped += d.capped;
    }

    std::vector<double> xs;
    xs.reserve(cfg.trajectories);
    for (const auto& t : packet.state.trajectories) xs.push_back(t.position.x);
    double mean = 0.0;
    for (double x : xs) mean += x;
    mean /= static_cast<double>(xs.size());
    double var = 0.0;
    for (double x : xs) var += (x - mean) * (x - mean);
    r.ensemble_variance = var / static_cast<double>(xs.size());

    const auto run = evolve_schrodinger(gaussian_packet(cfg.grid, cfg.sigma0, cfg.x0, cfg.k0),
                                        zero_potential(cfg.grid), cfg.physics, r.time, cfg.oracle_dt);
    r.oracle = run.final_state;
    r.oracle_variance = r.oracle.variance_x();
    const Grid1D fine{cfg.grid.x_min, cfg.grid.x_max, 2 * cfg.grid.n - 1};
    r.oracle_variance_refined = oracle_free_variance(cfg, fine, cfg.oracle_dt / 2.0);

    // Histogram on the grid span; trajectories outside it are reported, not binned.
    const auto bins = static_cast<std::size_t>(std::floor((cfg.grid.x_max - cfg.grid.x_min) / cfg.histogram_width));
    const double lo = 0.5 * (cfg.grid.x_min + cfg.grid.x_max) - 0.5 * cfg.histogram_width * static_cast<double>(bins);
    const double hi = lo + cfg.histogram_width * static_cast<double>(bins);
    auto h = histogram(xs, lo, hi, bins);
    std::size_t outside = 0;
    for (double x : xs) outside += !(x >= lo && x < hi);
    BELLSIM_REQUIRE(outside < xs.size(), NumericalError, "no trajectory ended inside the oracle grid");
    r.outside_fraction = static_cast<double>(outside) / static_cast<double>(xs.size());
    const double inside = h.mass();
    for (double& v : h.rho) v /= inside;
    const auto c = compare_density(h, r.oracle);
    r.ks_distance = c.ks_distance;
    r.l1_distance = c.l1_distance;
    r.histogram = std::move(h);
    r.ks_ok = r.ks_distance < cfg.ks_threshold;
    r.variance_ok = r.ensemble_variance_error() <= cfg.variance_tolerance;
    return r;
}

}  // namespace bellsim::oracle
