#pragma once

// Flight of the particle pairs from the source to the detectors.
//
// Each pair j carries a value lambda_j fixed at the source. Everything a wing
// needs is derived from it: the initial spin of wing 1 (wing 2 gets the
// opposite), the shared A/B label and initial velocity, and the Brownian
// force stream, which is therefore identical on both wings. Pairs are
// simulated in groups of `ensemble_size`; the wing-1 members of a group form
// one A/B ensemble, the wing-2 members another. Each wing is integrated in its
// own frame, with x pointing away from the source; lab positions of wing 2 are
// the mirror image. Swaps run in superposition mode, so every A<->B change
// flips the spin label.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/core/parallel.hpp"
#include "bellsim/core/random.hpp"
#include "bellsim/dynamics/brownian.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/evolve.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/epr/config.hpp"

namespace bellsim::epr {

namespace tag {
inline constexpr std::uint64_t kPair = 0x50414952;      // master -> lambda_j
inline constexpr std::uint64_t kInit = 0x494e4954;      // lambda -> initial state
inline constexpr std::uint64_t kForce = 0x464f524345;   // lambda -> Brownian stream
inline constexpr std::uint64_t kDisturb = 0x44495354;   // master -> disturbance streams
}  // namespace tag

/// lambda_j for j = 0..pairs-1; each is an independent key split off the master seed.
inline std::vector<std::uint64_t> generate_pair_seeds(std::uint64_t master_seed, std::size_t pairs) {
    BELLSIM_REQUIRE(pairs >= 1, PreconditionError, "pairs must be at least 1");
    const std::uint64_t root = rng::derive(master_seed, tag::kPair);
    std::vector<std::uint64_t> out(pairs);
    for (std::size_t j = 0; j < pairs; ++j) out[j] = rng::derive(root, j);
    return out;
}

struct PairInit {
    Spin spin1 = Spin::Up;  // wing 1; wing 2 starts with the opposite label
    dynamics::Ensemble ensemble = dynamics::Ensemble::A;
    Vec3 velocity;  // in the wing frame, x away from the source
};

inline PairInit pair_initial_state(std::uint64_t lambda, const PairConfig& cfg) {
    const rng::CounterStream s(rng::derive(lambda, tag::kInit));
    const auto w = s.block(0, 0);
    PairInit init;
    init.spin1 = (w[0] & 1u) ? Spin::Down : Spin::Up;
    init.ensemble = (w[1] & 1u) ? dynamics::Ensemble::B : dynamics::Ensemble::A;
    const double sd = cfg.spread();
    init.velocity = {cfg.drift_speed + sd * s.gaussian(1, 0), sd * s.gaussian(1, 1), sd * s.gaussian(1, 2)};
    return init;
}

inline dynamics::BrownianSource pair_force_source(std::uint64_t lambda, const dynamics::PhysParams& p) {
    return {rng::derive(lambda, tag::kForce), p};
}

/// Value U in (0,1) shared by both wings of a pair: the Brownian stream's unit
/// normal at the detection step (never used as a force) mapped through Phi.
inline double shared_uniform(std::uint64_t lambda, const dynamics::PhysParams& p, std::size_t detection_step) {
    return rng::normal_cdf(pair_force_source(lambda, p).unit(detection_step, 0));
}

enum class DisturbanceLaw : std::uint8_t { Gaussian, Uniform };

/// Small fluctuating velocity offsets delta_j(t) on one wing: the disturbed
/// velocity at step t is the undisturbed one plus delta_j(t), drawn afresh at
/// every step. Each component has zero mean; E|delta|^2 = magnitude^2.
struct DisturbanceSpec {
    double magnitude = 0.0;
    int target_wing = 2;
    DisturbanceLaw law = DisturbanceLaw::Gaussian;
};

/// Unit-RMS kick direction for pair j at step t; the realized kick is magnitude times this.
inline Vec3 disturbance_unit(std::uint64_t master_seed, DisturbanceLaw law, std::uint64_t j, std::uint64_t t) {
    const rng::CounterStream s(rng::derive(rng::derive(master_seed, tag::kDisturb), j));
    Vec3 u;
    for (std::size_t c = 0; c < 3; ++c)
        u[c] = law == DisturbanceLaw::Gaussian ? s.gaussian(t, c) / std::sqrt(3.0) : 2.0 * s.uniform(t, c) - 1.0;
    return u;
}

/// Statistics of an undisturbed wing used to judge a disturbance: for every
/// trajectory and step, the distance of its speed from |vbar| of its bin in
/// units of the unit kick it would receive (pre-exchange values).
struct ReferenceStats {
    std::vector<double> ratios;
    double speed_sum = 0.0, speed_sq = 0.0;
    std::size_t speed_n = 0;
    double center_gap_sum = 0.0;  // population-weighted | |vbar| - |mean v_A| |
    double center_gap_weight = 0.0;

    void merge(const ReferenceStats& o) {
        ratios.insert(ratios.end(), o.ratios.begin(), o.ratios.end());
        speed_sum += o.speed_sum;
        speed_sq += o.speed_sq;
        speed_n += o.speed_n;
        center_gap_sum += o.center_gap_sum;
        center_gap_weight += o.center_gap_weight;
    }

    double speed_std() const noexcept {
        if (speed_n < 2) return 0.0;
        const double m = speed_sum / static_cast<double>(speed_n);
        return std::sqrt(std::max(0.0, speed_sq / static_cast<double>(speed_n) - m * m));
    }
    /// Half width at half maximum of a normal law with the observed speed spread.
    double half_width() const noexcept { return speed_std() * std::sqrt(2.0 * std::log(2.0)); }
    double center_gap() const noexcept { return center_gap_weight > 0.0 ? center_gap_sum / center_gap_weight : 0.0; }
};

struct WingOptions {
    bool record_spins = false;
    bool record_swaps = false;
    bool record_positions = false;
    std::optional<DisturbanceSpec> disturbance;  // applied only if it targets this wing
    bool collect_reference = false;
};

struct WingGroupResult {
    std::vector<Spin> initial;
    std::vector<Spin> final_spin;
    std::vector<double> shared_u;
    std::vector<std::vector<Spin>> spins;      // [member][step 0..T], if recorded
    std::vector<std::vector<Vec3>> positions;  // [step 1..T][member], lab frame, if recorded
    std::vector<dynamics::SwapRecord> swaps;   // if recorded
    std::size_t capped = 0;
    ReferenceStats reference;
};

/// Simulates one wing (1 or 2) for the pairs whose lambdas are given; member k has id first_id + k.
inline WingGroupResult simulate_wing_group(const PairConfig& cfg, std::span<const std::uint64_t> lambdas,
                                           std::size_t first_id, int wing, const WingOptions& opt = {}) {
    BELLSIM_REQUIRE(wing == 1 || wing == 2, PreconditionError, "wing must be 1 or 2");
    BELLSIM_REQUIRE(!lambdas.empty(), PreconditionError, "empty pair group");
    const std::size_t n = lambdas.size();
    const std::size_t steps = cfg.steps();
    const auto& p = cfg.physics;

    dynamics::EnsembleState state;
    state.bins = dynamics::BinGrid::along_x(cfg.bin_width);
    state.trajectories.resize(n);
    std::vector<dynamics::BrownianSource> sources(n);
    WingGroupResult out;
    out.initial.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        const auto init = pair_initial_state(lambdas[k], cfg);
        auto& t = state.trajectories[k];
        t.id = first_id + k;
        t.velocity = init.velocity;
        t.ensemble = init.ensemble;
        t.spin = wing == 1 ? init.spin1 : flipped(init.spin1);
        out.initial[k] = t.spin;
        sources[k] = pair_force_source(lambdas[k], p);
    }

    dynamics::ForceField force = dynamics::zero_force();
    const bool disturbed = opt.disturbance && opt.disturbance->target_wing == wing && opt.disturbance->magnitude != 0.0;
    if (disturbed) {
        // The disturbed velocity is v(t) + delta(t): the force replaces last
        // step's offset, as propagated by this step's friction, with a fresh one.
        const DisturbanceSpec d = *opt.disturbance;
        const std::uint64_t seed = cfg.master_seed;
        const double dt = cfg.dt;
        force = [=](const dynamics::Trajectory& tr, std::uint64_t step, double) {
            Vec3 target = d.magnitude * disturbance_unit(seed, d.law, tr.id, step);
            if (step > 0) {
                double carry = 1.0;
                if (p.friction_enabled()) carry += (tr.ensemble == dynamics::Ensemble::A ? dt : -dt) / p.tau;
                target -= carry * d.magnitude * disturbance_unit(seed, d.law, tr.id, step - 1);
            }
            return (p.m0 / dt) * target;
        };
    }

    if (opt.record_spins) {
        out.spins.assign(n, {});
        for (std::size_t k = 0; k < n; ++k) {
            out.spins[k].reserve(steps + 1);
            out.spins[k].push_back(out.initial[k]);
        }
    }
    const double mirror = wing == 1 ? 1.0 : -1.0;
    const auto observer = [&](const dynamics::EnsembleState& s, const dynamics::ExchangeResult&) {
        if (opt.record_spins)
            for (std::size_t k = 0; k < n; ++k) out.spins[k].push_back(s.trajectories[k].spin);
        if (opt.record_positions) {
            std::vector<Vec3> pos(n);
            for (std::size_t k = 0; k < n; ++k) {
                pos[k] = s.trajectories[k].position;
                pos[k].x *= mirror;
            }
            out.positions.push_back(std::move(pos));
        }
    };
    dynamics::PreExchangeObserver pre;
    if (opt.collect_reference) {
        const DisturbanceLaw law = opt.disturbance ? opt.disturbance->law : DisturbanceLaw::Gaussian;
        pre = [&, law](const dynamics::EnsembleState& s) {
            const std::uint64_t step = s.step - 1;  // the step whose kick would have produced these velocities
            for (const auto& [key, idx] : dynamics::group_by_bin(s)) {
                Vec3 vbar, va{};
                std::size_t na = 0, nb = 0;
                dynamics::detail::bin_delta(s.trajectories, idx, vbar, na, nb);
                const double vb = norm(vbar);
                for (std::size_t i : idx) {
                    const auto& t = s.trajectories[i];
                    const double speed = norm(t.velocity);
                    out.reference.speed_sum += speed;
                    out.reference.speed_sq += speed * speed;
                    ++out.reference.speed_n;
                    if (t.ensemble == dynamics::Ensemble::A) va += t.velocity;
                    if (na == 0 || nb == 0) continue;
                    const double kick = norm(disturbance_unit(cfg.master_seed, law, t.id, step));
                    out.reference.ratios.push_back(kick > 0.0 ? std::abs(speed - vb) / kick
                                                              : std::numeric_limits<double>::infinity());
                }
                if (na > 0 && nb > 0) {
                    const double w = static_cast<double>(na + nb);
                    out.reference.center_gap_sum += w * std::abs(vb - norm(va / static_cast<double>(na)));
                    out.reference.center_gap_weight += w;
                }
            }
        };
    }

    dynamics::EvolveOptions eo;
    eo.steps = steps;
    eo.dt = cfg.dt;
    eo.exchange.superposition = true;
    eo.exchange.selection = cfg.selection;
    eo.exchange.window = cfg.window;
    auto res = dynamics::evolve(state, sources, force, p, eo, observer, pre);

    out.final_spin.resize(n);
    out.shared_u.resize(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.final_spin[k] = state.trajectories[k].spin;
        out.shared_u[k] = rng::normal_cdf(sources[k].unit(steps, 0));
    }
    for (const auto& d : res.diagnostics) out.capped += d.capped;
    if (opt.record_swaps) out.swaps = std::move(res.swap_log);
    return out;
}

struct FlightOptions {
    unsigned threads = 1;
    bool record_spins = false;
    bool record_swaps = false;
    std::optional<DisturbanceSpec> disturbance;
};

/// Per-pair state at the detectors.
struct FlightResult {
    std::size_t steps = 0;
    std::vector<std::uint64_t> lambda1, lambda2;
    std::vector<Spin> initial1, initial2, final1, final2;
    std::vector<double> u1, u2;                   // shared value as seen by each wing
    std::vector<std::vector<Spin>> spins1, spins2;  // spin trajectories, if recorded
    std::vector<dynamics::SwapRecord> swaps1, swaps2;
    std::size_t capped = 0;
    ReferenceStats reference;  // of the undisturbed wing, if a disturbance was given

    std::size_t pairs() const noexcept { return final1.size(); }
};

/// Flies all pairs. Wing 1 is driven by lambda1, wing 2 by lambda2; in an
/// ordinary run both lists are the same.
inline FlightResult simulate_flight(const PairConfig& cfg, const std::vector<std::uint64_t>& lambda1,
                                    const std::vector<std::uint64_t>& lambda2, const FlightOptions& opt = {}) {
    cfg.validate();
    BELLSIM_REQUIRE(lambda1.size() == cfg.pairs && lambda2.size() == cfg.pairs, PreconditionError,
                    "one lambda per pair and wing is required");
    if (opt.disturbance) {
        BELLSIM_REQUIRE(opt.disturbance->target_wing == 1 || opt.disturbance->target_wing == 2, PreconditionError,
                        "disturbance target wing must be 1 or 2");
        BELLSIM_REQUIRE(std::isfinite(opt.disturbance->magnitude) && opt.disturbance->magnitude >= 0.0,
                        PreconditionError, "disturbance magnitude must be finite and nonnegative");
    }
    const std::size_t g = cfg.ensemble_size;
    const std::size_t groups = (cfg.pairs + g - 1) / g;
    std::vector<WingGroupResult> r1(groups), r2(groups);
    parallel_for(groups, opt.threads, [&](std::size_t gi) {
        const std::size_t lo = gi * g, hi = std::min(cfg.pairs, lo + g);
        WingOptions wo;
        wo.record_spins = opt.record_spins;
        wo.record_swaps = opt.record_swaps;
        wo.disturbance = opt.disturbance;
        const int reference_wing = opt.disturbance ? 3 - opt.disturbance->target_wing : 0;
        wo.collect_reference = reference_wing == 1;
        r1[gi] = simulate_wing_group(cfg, std::span(lambda1).subspan(lo, hi - lo), lo, 1, wo);
        wo.collect_reference = reference_wing == 2;
        r2[gi] = simulate_wing_group(cfg, std::span(lambda2).subspan(lo, hi - lo), lo, 2, wo);
    });

    FlightResult f;
    f.steps = cfg.steps();
    f.lambda1 = lambda1;
    f.lambda2 = lambda2;
    auto append = [](auto& dst, const auto& src) { dst.insert(dst.end(), src.begin(), src.end()); };
    for (std::size_t gi = 0; gi < groups; ++gi) {
        append(f.initial1, r1[gi].initial);
        append(f.initial2, r2[gi].initial);
        append(f.final1, r1[gi].final_spin);
        append(f.final2, r2[gi].final_spin);
        append(f.u1, r1[gi].shared_u);
        append(f.u2, r2[gi].shared_u);
        append(f.spins1, r1[gi].spins);
        append(f.spins2, r2[gi].spins);
        append(f.swaps1, r1[gi].swaps);
        append(f.swaps2, r2[gi].swaps);
        f.capped += r1[gi].capped + r2[gi].capped;
        f.reference.merge(r1[gi].reference);
        f.reference.merge(r2[gi].reference);
    }
    return f;
}

}  // namespace bellsim::epr
