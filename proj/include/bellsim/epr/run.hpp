#pragma once

// Experiment drivers: a full EPR run, the two-source variant, detection of one
// flight under many settings, and the disturbance sweep.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/parallel.hpp"
#include "bellsim/epr/config.hpp"
#include "bellsim/epr/detect.hpp"
#include "bellsim/epr/flight.hpp"
#include "bellsim/epr/stats.hpp"

namespace bellsim::epr {

/// Outcome written by the detectors for one pair.
struct DetectorRecord {
    std::size_t pair = 0;
    Setting setting;
    Spin out1 = Spin::Up, out2 = Spin::Up;
    std::size_t source = 0;  // 0: S1 (wing 1 prepared up), 1: S2

    friend bool operator==(const DetectorRecord&, const DetectorRecord&) = default;
};

struct RunOptions {
    unsigned threads = 1;
    bool record_spins = false;
    bool record_swaps = false;
};

struct EprRun {
    RunStats stats;
    FlightResult flight;
    std::vector<DetectorRecord> records;
};

/// Settings cycled over the pairs: pair j gets settings[j % settings.size()].
inline std::vector<Setting> round_robin(const std::vector<Setting>& settings, std::size_t pairs) {
    BELLSIM_REQUIRE(!settings.empty(), PreconditionError, "at least one setting is required");
    std::vector<Setting> out(pairs);
    for (std::size_t j = 0; j < pairs; ++j) out[j] = settings[j % settings.size()];
    return out;
}

inline DetectionInput detection_input(const FlightResult& f, std::size_t j, const Setting& s) {
    return {j, f.lambda1[j], f.lambda2[j], s.mu_deg, s.nu_deg, f.final1[j], f.final2[j], f.u1[j], f.u2[j]};
}

/// Applies the detector to every pair with its assigned setting.
inline EprRun detect(FlightResult flight, const std::vector<Setting>& assignments, const Detector& detector) {
    BELLSIM_REQUIRE(assignments.size() == flight.pairs(), PreconditionError,
                    "one setting assignment per pair is required");
    EprRun run;
    run.records.resize(flight.pairs());
    for (std::size_t j = 0; j < flight.pairs(); ++j) {
        const Setting s = Setting::of(assignments[j].mu_deg, assignments[j].nu_deg);
        const auto [o1, o2] = detector(detection_input(flight, j, s));
        const std::size_t source = flight.initial1[j] == Spin::Up ? 0 : 1;
        run.records[j] = {j, s, o1, o2, source};
        run.stats.add(s, source, o1, o2);
    }
    run.flight = std::move(flight);
    return run;
}

inline EprRun run_epr(const PairConfig& cfg, const std::vector<Setting>& assignments, const RunOptions& opt = {},
                      const Detector& detector = {}) {
    cfg.validate();
    BELLSIM_REQUIRE(assignments.size() == cfg.pairs, PreconditionError, "one setting assignment per pair is required");
    for (const auto& s : assignments) (void)Setting::of(s.mu_deg, s.nu_deg);
    const auto lambdas = generate_pair_seeds(cfg.master_seed, cfg.pairs);
    FlightOptions fo{opt.threads, opt.record_spins, opt.record_swaps, std::nullopt};
    return detect(simulate_flight(cfg, lambdas, lambdas, fo), assignments,
                  detector ? detector : make_detector(cfg.model));
}

/// Two sources, one per wing. Each receives the pair values from its own
/// master seed; when both seeds agree the sources share a common past and
/// behave as one entangled source.
inline EprRun entanglement_swap_scenario(const PairConfig& cfg, const std::vector<Setting>& assignments,
                                         std::uint64_t second_source_seed, const RunOptions& opt = {}) {
    cfg.validate();
    BELLSIM_REQUIRE(assignments.size() == cfg.pairs, PreconditionError, "one setting assignment per pair is required");
    const auto l1 = generate_pair_seeds(cfg.master_seed, cfg.pairs);
    const auto l2 = generate_pair_seeds(second_source_seed, cfg.pairs);
    FlightOptions fo{opt.threads, opt.record_spins, opt.record_swaps, std::nullopt};
    return detect(simulate_flight(cfg, l1, l2, fo), assignments, make_detector(cfg.model));
}

/// Detects every pair of one flight under every (mu, nu) combination. Each
/// setting pair therefore sees the same pairs; station randomness depends only
/// on the local setting.
inline RunStats detect_all_settings(const FlightResult& flight, const std::vector<double>& mu_deg,
                                    const std::vector<double>& nu_deg, const Detector& detector,
                                    unsigned threads = 1) {
    BELLSIM_REQUIRE(!mu_deg.empty() && !nu_deg.empty(), PreconditionError, "setting lists must not be empty");
    const std::size_t cells = mu_deg.size() * nu_deg.size();
    std::vector<SettingCounts> counts(cells);
    parallel_for(cells, threads, [&](std::size_t c) {
        const Setting s = Setting::of(mu_deg[c / nu_deg.size()], nu_deg[c % nu_deg.size()]);
        SettingCounts& out = counts[c];
        out.mu_deg = s.mu_deg;
        out.nu_deg = s.nu_deg;
        for (std::size_t j = 0; j < flight.pairs(); ++j) {
            const auto [o1, o2] = detector(detection_input(flight, j, s));
            ++out.counts[flight.initial1[j] == Spin::Up ? 0 : 1][outcome_index(o1, o2)];
        }
    });
    RunStats stats;
    for (const auto& c : counts) stats.add(c);
    return stats;
}

struct ChshScan {
    Estimate best;
    double mu = 0, mu_p = 0, nu = 0, nu_p = 0;
    std::size_t combinations = 0;
};

/// Maximum CHSH estimate over all quadruples drawn from the angle lists.
inline ChshScan chsh_scan(const RunStats& stats, const std::vector<double>& mu_deg, const std::vector<double>& nu_deg) {
    const std::size_t m = mu_deg.size(), n = nu_deg.size();
    std::vector<Estimate> e(m * n);
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t k = 0; k < n; ++k) e[i * n + k] = estimate_correlation(stats, mu_deg[i], nu_deg[k]);
    ChshScan r;
    r.best.value = -1.0;
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t ap = 0; ap < m; ++ap)
            for (std::size_t b = 0; b < n; ++b)
                for (std::size_t bp = 0; bp < n; ++bp) {
                    ++r.combinations;
                    const double s =
                        std::abs(e[a * n + b].value + e[a * n + bp].value + e[ap * n + b].value - e[ap * n + bp].value);
                    if (s > r.best.value) {
                        const auto sq = [](const Estimate& x) { return x.std_error * x.std_error; };
                        r.best = {s, std::sqrt(sq(e[a * n + b]) + sq(e[a * n + bp]) + sq(e[ap * n + b]) + sq(e[ap * n + bp])),
                                  std::min({e[a * n + b].n, e[a * n + bp].n, e[ap * n + b].n, e[ap * n + bp].n})};
                        r.mu = mu_deg[a];
                        r.mu_p = mu_deg[ap];
                        r.nu = nu_deg[b];
                        r.nu_p = nu_deg[bp];
                    }
                }
    return r;
}

/// Fraction of pairs whose outcomes are opposite.
inline double anticorrelated_fraction(const EprRun& run) {
    std::size_t k = 0;
    for (const auto& r : run.records) k += r.out1 != r.out2;
    return run.records.empty() ? 0.0 : static_cast<double>(k) / static_cast<double>(run.records.size());
}

struct DisturbanceRow {
    double magnitude = 0.0;        // |delta|
    double relative = 0.0;         // |delta| / half width
    double efficiency = 0.0;       // anticorrelated fraction at equal axes
    double efficiency_drop = 0.0;  // reference efficiency minus this one
    double altered_fraction = 0.0;
    bool small = true;  // |delta| below a tenth of both the half width and the centre gap
};

struct DisturbanceResult {
    double half_width = 0.0;
    double center_gap = 0.0;
    double reference_efficiency = 0.0;
    std::vector<DisturbanceRow> rows;
};

inline constexpr double kSmallFraction = 0.1;

/// Re-runs the equal-axis experiment with kicks of each magnitude on the
/// target wing. With `relative` set, magnitudes are
/// fractions of the half width of the undisturbed speed distribution. The
/// altered fraction counts undisturbed trajectory-steps whose speed lies within
/// the realized |delta| of |vbar| in its bin, the only ones a kick can move
/// across the exchange threshold.
inline DisturbanceResult disturbance_sweep(const PairConfig& cfg, const DisturbanceSpec& spec,
                                           const std::vector<double>& magnitudes, bool relative = true,
                                           double axis_deg = 0.0, unsigned threads = 1) {
    cfg.validate();
    BELLSIM_REQUIRE(!magnitudes.empty(), PreconditionError, "at least one disturbance magnitude is required");
    for (double m : magnitudes)
        BELLSIM_REQUIRE(std::isfinite(m) && m >= 0.0, PreconditionError, "magnitudes must be finite and nonnegative");
    const auto lambdas = generate_pair_seeds(cfg.master_seed, cfg.pairs);
    const std::vector<Setting> equal(cfg.pairs, Setting::of(axis_deg, axis_deg));
    const Detector det = make_detector(cfg.model);

    auto run_with = [&](double magnitude) {
        DisturbanceSpec d = spec;
        d.magnitude = magnitude;
        FlightOptions fo;
        fo.threads = threads;
        fo.disturbance = d;
        return detect(simulate_flight(cfg, lambdas, lambdas, fo), equal, det);
    };

    const EprRun reference = run_with(0.0);
    DisturbanceResult res;
    res.half_width = reference.flight.reference.half_width();
    res.center_gap = reference.flight.reference.center_gap();
    res.reference_efficiency = anticorrelated_fraction(reference);
    auto ratios = reference.flight.reference.ratios;
    std::sort(ratios.begin(), ratios.end());

    for (double m : magnitudes) {
        DisturbanceRow row;
        row.magnitude = relative ? m * res.half_width : m;
        row.relative = res.half_width > 0.0 ? row.magnitude / res.half_width : 0.0;
        row.efficiency = row.magnitude == 0.0 ? res.reference_efficiency : anticorrelated_fraction(run_with(row.magnitude));
        row.efficiency_drop = res.reference_efficiency - row.efficiency;
        const auto below = std::lower_bound(ratios.begin(), ratios.end(), row.magnitude) - ratios.begin();
        row.altered_fraction = ratios.empty() ? 0.0 : static_cast<double>(below) / static_cast<double>(ratios.size());
        row.small = row.magnitude <= kSmallFraction * res.half_width && row.magnitude <= kSmallFraction * res.center_gap;
        res.rows.push_back(row);
    }
    return res;
}

}  // namespace bellsim::epr
