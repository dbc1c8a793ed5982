#pragma once

// Time loop: Brownian forces -> Langevin step for every trajectory ->
// exchange procedure.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/parallel.hpp"
#include "bellsim/dynamics/brownian.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/dynamics/langevin.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::dynamics {

/// External force on a trajectory at a given step (pre-step state) and time.
using ForceField = std::function<Vec3(const Trajectory&, std::uint64_t step, double t)>;

inline ForceField zero_force() {
    return [](const Trajectory&, std::uint64_t, double) { return Vec3{}; };
}

struct StepDiagnostics {
    std::uint64_t step = 0;
    double time = 0.0;
    double mean_speed_a = 0.0;  // after exchange
    double mean_speed_b = 0.0;
    double gap = 0.0;              // |mean_speed_a - mean_speed_b|, global
    double residual_before = 0.0;  // weighted per-bin |Delta| before exchange
    double residual_after = 0.0;
    std::size_t swaps = 0;
    std::size_t capped = 0;
};

struct EvolveOptions {
    std::size_t steps = 1;
    double dt = 0.01;
    ExchangeOptions exchange;
    bool exchange_enabled = true;
    unsigned threads = 1;
};

struct EvolveResult {
    std::vector<StepDiagnostics> diagnostics;
    std::vector<SwapRecord> swap_log;
};

/// Called after every completed step with the new state and that step's exchange result.
using StepObserver = std::function<void(const EnsembleState&, const ExchangeResult&)>;

/// Called after the Langevin update of a step, before its exchange.
using PreExchangeObserver = std::function<void(const EnsembleState&)>;

inline void mean_speeds(const EnsembleState& s, double& a, double& b) {
    double sa = 0, sb = 0;
    std::size_t na = 0, nb = 0;
    for (const auto& t : s.trajectories) {
        if (t.ensemble == Ensemble::A) {
            sa += norm(t.velocity);
            ++na;
        } else {
            sb += norm(t.velocity);
            ++nb;
        }
    }
    a = na ? sa / static_cast<double>(na) : 0.0;
    b = nb ? sb / static_cast<double>(nb) : 0.0;
}

/// Advances `state` by opt.steps steps. sources[i] drives trajectories[i].
inline EvolveResult evolve(EnsembleState& state, const std::vector<BrownianSource>& sources, const ForceField& f_ext,
                           const PhysParams& p, const EvolveOptions& opt, const StepObserver& observer = {},
                           const PreExchangeObserver& pre_exchange = {}) {
    BELLSIM_REQUIRE(opt.steps >= 1, PreconditionError, "evolve needs at least one step");
    BELLSIM_REQUIRE(sources.size() == state.trajectories.size(), PreconditionError,
                    "one Brownian source per trajectory is required");
    p.validate();
    state.validate();
    const bool brownian = p.force_sigma() > 0.0;

    EvolveResult res;
    res.diagnostics.reserve(opt.steps);
    std::vector<std::size_t> caps(state.trajectories.size());
    ExchangeOptions xopt = opt.exchange;
    xopt.threads = opt.threads;

    for (std::size_t s = 0; s < opt.steps; ++s) {
        const std::uint64_t k = state.step;
        const double t = state.time;
        std::fill(caps.begin(), caps.end(), 0);
        parallel_for(state.trajectories.size(), opt.threads, [&](std::size_t i) {
            const Trajectory& tr = state.trajectories[i];
            const Vec3 fb = brownian ? sources[i].sample(k) : Vec3{};
            state.trajectories[i] = step_langevin(tr, f_ext ? f_ext(tr, k, t) : Vec3{}, fb, p, opt.dt, &caps[i]);
        });
        state.step = k + 1;
        state.time = t + opt.dt;

        StepDiagnostics d;
        d.step = state.step;
        d.time = state.time;
        for (std::size_t c : caps) d.capped += c;
        if (pre_exchange) pre_exchange(state);
        ExchangeResult x;
        if (opt.exchange_enabled) {
            x = exchange_in_place(state, xopt);
            d.residual_before = x.weighted_residual(false);
            d.residual_after = x.weighted_residual(true);
            d.swaps = x.log.size();
            res.swap_log.insert(res.swap_log.end(), x.log.begin(), x.log.end());
        }
        mean_speeds(state, d.mean_speed_a, d.mean_speed_b);
        d.gap = std::abs(d.mean_speed_a - d.mean_speed_b);
        res.diagnostics.push_back(d);
        if (observer) observer(state, x);
    }
    return res;
}

}  // namespace bellsim::dynamics
