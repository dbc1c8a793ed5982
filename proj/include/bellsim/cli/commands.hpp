#pragma once

// Subcommand drivers. Each turns a resolved configuration into an in-memory
// bundle of named files (config echo plus CSV tables) and an exit code:
// 0 success, 1 an invariant failed.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "bellsim/cli/configs.hpp"
#include "bellsim/core/csv.hpp"
#include "bellsim/epr/run.hpp"
#include "bellsim/epr/stats.hpp"
#include "bellsim/oracle/compare.hpp"
#include "bellsim/oracle/validation.hpp"
#include "bellsim/oracle/wavefunction.hpp"
#include "bellsim/probspace/bell.hpp"
#include "bellsim/probspace/lemma.hpp"
#include "bellsim/probspace/locality.hpp"
#include "bellsim/probspace/quantum_model.hpp"
#include "bellsim/probspace/random_models.hpp"

namespace bellsim::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvariant = 1;
inline constexpr int kExitUsage = 2;

struct Bundle {
    std::vector<std::pair<std::string, std::string>> files;  // name -> content, in write order
    int exit_code = kExitOk;
    std::vector<std::string> notes;  // one-line human summaries

    void add(std::string name, std::string content) { files.emplace_back(std::move(name), std::move(content)); }
    void add(std::string name, const csv::Table& t) { add(std::move(name), t.str()); }
    void add_config(const json& echo) { add("config.json", echo.dump(2) + "\n"); }

    const std::string& file(const std::string& name) const {
        for (const auto& [n, c] : files)
            if (n == name) return c;
        throw PreconditionError("bundle has no file " + name);
    }

    void write(const std::filesystem::path& dir) const {
        std::filesystem::create_directories(dir);
        for (const auto& [n, c] : files) {
            std::ofstream f(dir / n, std::ios::binary | std::ios::trunc);
            if (!f) throw std::runtime_error("cannot write " + (dir / n).string());
            f << c;
        }
    }
};

namespace detail {

inline std::string fmt(double v) { return csv::format_double(v); }

/// Correlation table; estimates need at least kMinCounts pairs and are left empty otherwise.
inline csv::Table correlation_table(const epr::RunStats& stats) {
    csv::Table t({"mu_deg", "nu_deg", "n", "e_hat", "std_error", "anticorrelated_fraction", "p_up_1", "p_up_2"});
    for (const auto& e : stats.entries()) {
        const double n = static_cast<double>(e.n());
        std::string ev, se;
        if (e.n() >= epr::kMinCounts) {
            const auto est = epr::estimate_correlation(stats, e.mu_deg, e.nu_deg);
            ev = fmt(est.value);
            se = fmt(est.std_error);
        }
        t.add_row({e.mu_deg, e.nu_deg, e.n(), ev, se, static_cast<double>(e.anticorrelated()) / n,
                   static_cast<double>(e.up(1)) / n, static_cast<double>(e.up(2)) / n});
    }
    return t;
}

inline csv::Table counts_table(const epr::RunStats& stats) {
    csv::Table t({"mu_deg", "nu_deg", "source", "uu", "ud", "du", "dd", "n"});
    for (const auto& e : stats.entries())
        for (std::size_t s = 0; s < 2; ++s)
            t.add_row({e.mu_deg, e.nu_deg, s == 0 ? "S1" : "S2", e.counts[s][0], e.counts[s][1], e.counts[s][2],
                       e.counts[s][3], e.n_source(s)});
    return t;
}

inline bool has_remote_variation(const epr::RunStats& stats) {
    const auto& es = stats.entries();
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = i + 1; j < es.size(); ++j)
            if (epr::same_deg(es[i].mu_deg, es[j].mu_deg) || epr::same_deg(es[i].nu_deg, es[j].nu_deg)) return true;
    return false;
}

inline double equal_axis_min_anticorrelation(const epr::RunStats& stats, bool& any) {
    double m = 1.0;
    any = false;
    for (const auto& e : stats.entries())
        if (epr::same_deg(e.mu_deg, e.nu_deg) && e.n() > 0) {
            any = true;
            m = std::min(m, static_cast<double>(e.anticorrelated()) / static_cast<double>(e.n()));
        }
    return m;
}

inline std::vector<epr::Setting> checked_assignments(const EprConfig& c) {
    return epr::round_robin(c.settings(), c.pair.pairs);
}

}  // namespace detail

inline Bundle cmd_verify_theorem(const VerifyConfig& c) {
    using namespace probspace;
    Bundle b;
    b.add_config(c.echo());
    csv::Table report({"check", "value", "criterion", "pass"});
    bool all = true;
    auto row = [&](const std::string& name, double value, const std::string& criterion, bool pass) {
        report.add_row({name, value, criterion, pass});
        all = all && pass;
    };

    const auto scan = conditional_chsh_bound_scan(c.grid_step);
    row("chsh_scan_max", scan.max_value, "<= 2 + " + detail::fmt(c.tolerance), scan.max_value <= 2.0 + c.tolerance);
    row("chsh_scan_points", static_cast<double>(scan.points), "info", true);

    constexpr double deg = std::numbers::pi / 180.0;
    const double mu = c.chsh_deg[0], mu_p = c.chsh_deg[1], nu = c.chsh_deg[2], nu_p = c.chsh_deg[3];
    const auto q = build_quantum_epr_model({SettingPair::degrees(mu, nu), SettingPair::degrees(mu, nu_p),
                                            SettingPair::degrees(mu_p, nu), SettingPair::degrees(mu_p, nu_p)});
    const double s = chsh(q, mu * deg, mu_p * deg, nu * deg, nu_p * deg);
    const double s_expected = std::abs(-std::cos((mu - nu) * deg) - std::cos((mu - nu_p) * deg) -
                                       std::cos((mu_p - nu) * deg) + std::cos((mu_p - nu_p) * deg));
    row("quantum_chsh", s, "= " + detail::fmt(s_expected) + " +- 1e-10", std::abs(s - s_expected) <= 1e-10);
    const auto active = is_actively_local(q, c.tolerance);
    row("quantum_active_locality_deviation", active.max_deviation, "<= " + detail::fmt(c.tolerance), active.ok);
    const auto passive = is_passively_local(q, c.tolerance);
    row("quantum_passive_locality_gap", passive.max_deviation, "> " + detail::fmt(c.tolerance) + " (fails)",
        !passive.ok);

    RandomModelStats st;
    const auto models = random_lemma_models(c.master_seed, c.lemma_models, &st);
    std::size_t nondeterministic = 0, missing_witness = 0;
    double worst = 0.0;
    csv::Table witnesses({"model", "setting", "witness_cells", "p_out1_up", "p_witness", "p_out1_up_and_witness"});
    for (std::size_t i = 0; i < models.size(); ++i) {
        const auto rep = deterministic_passive_locality_check(models[i]);
        nondeterministic += !rep.is_deterministic;
        missing_witness += rep.witnesses.empty();
        worst = std::max(worst, rep.max_indicator_deviation);
        for (const auto& w : rep.witnesses) {
            std::string cells;
            for (std::size_t k : w.cells) cells += (cells.empty() ? "S" : " S") + std::to_string(k + 1);
            witnesses.add_row({i, w.setting.label(), cells, w.p_out1_up, w.p_witness, w.p_out1_up_and_witness});
        }
    }
    row("lemma_models", static_cast<double>(models.size()), "= " + std::to_string(c.lemma_models),
        models.size() == c.lemma_models);
    row("lemma_nondeterministic", static_cast<double>(nondeterministic), "= 0", nondeterministic == 0);
    row("lemma_max_indicator_deviation", worst, "<= 1e-9", worst <= 1e-9);
    row("lemma_missing_witness", static_cast<double>(missing_witness), "= 0", missing_witness == 0);
    row("lemma_rejected_anticorrelation", static_cast<double>(st.rejected_anticorrelation), "info", true);
    row("lemma_rejected_passive", static_cast<double>(st.rejected_passive), "info", true);

    b.add("theorem_report.csv", report);
    b.add("lemma_witnesses.csv", witnesses);
    b.exit_code = all ? kExitOk : kExitInvariant;
    b.notes.push_back("max CHSH under locality " + detail::fmt(scan.max_value) + ", quantum CHSH " + detail::fmt(s) +
                      ", " + std::to_string(models.size()) + " lemma models checked");
    return b;
}

inline void add_epr_reports(Bundle& b, const epr::RunStats& stats, const EprConfig& c) {
    b.add("counts.csv", detail::counts_table(stats));
    b.add("correlations.csv", detail::correlation_table(stats));

    csv::Table ns({"wing", "local_deg", "remote_a_deg", "remote_b_deg", "shift", "std_error", "pass"});
    std::string ns_shift, ns_pass;
    if (detail::has_remote_variation(stats)) {
        const auto r = epr::no_signaling_test(stats);
        for (const auto& x : r.comparisons)
            ns.add_row({x.wing, x.local_deg, x.remote_a, x.remote_b, x.shift, x.std_error, x.pass});
        ns_shift = detail::fmt(r.max_marginal_shift);
        ns_pass = r.pass ? "1" : "0";
    }
    b.add("no_signaling.csv", ns);

    const auto f = epr::passive_factorization_test(stats);
    csv::Table ft({"mu_deg", "nu_deg", "source", "out1", "out2", "joint", "product", "gap", "std_error"});
    for (const auto& x : f.cells)
        ft.add_row({x.mu_deg, x.nu_deg, x.source == 0 ? "S1" : "S2", to_string(x.out1), to_string(x.out2), x.joint,
                    x.product, x.gap, x.std_error});
    b.add("factorization.csv", ft);

    if (!c.chsh_deg.empty()) {
        const auto& a = c.chsh_deg;
        for (double m : {a[0], a[1]})
            for (double n : {a[2], a[3]}) {
                const auto* e = stats.find(m, n);
                if (!e || e->n() < epr::kMinCounts)
                    throw ConfigError("chsh_deg needs setting " + epr::setting_label(m, n) + " with at least " +
                                      std::to_string(epr::kMinCounts) + " pairs");
            }
        const auto s = epr::chsh_estimate(stats, a[0], a[1], a[2], a[3]);
        csv::Table ct({"mu_deg", "mu_p_deg", "nu_deg", "nu_p_deg", "s_hat", "std_error", "n_min"});
        ct.add_row({a[0], a[1], a[2], a[3], s.value, s.std_error, s.n});
        b.add("chsh.csv", ct);
        b.notes.push_back("CHSH S_hat = " + detail::fmt(s.value) + " +- " + detail::fmt(s.std_error));
    }

    bool any_equal = false;
    const double anti = detail::equal_axis_min_anticorrelation(stats, any_equal);
    const auto balance = epr::source_balance_test(stats);
    csv::Table sum({"pairs", "model", "settings", "equal_axis_min_anticorrelation", "no_signaling_max_shift",
                    "no_signaling_pass", "factorization_max_gap", "factorization_pass", "source_balance_pass"});
    sum.add_row({stats.total(), epr::to_string(c.pair.model), stats.entries().size(),
                 any_equal ? detail::fmt(anti) : std::string(), ns_shift, ns_pass, f.max_gap, f.pass, balance.pass});
    b.add("summary.csv", sum);
    if (any_equal) b.notes.push_back("equal-axis anticorrelation " + detail::fmt(anti));
    // Exactness contract of the shared-stream model.
    if (c.pair.model == epr::MeasurementModel::SharedStreamThreshold && any_equal && anti != 1.0)
        b.exit_code = kExitInvariant;
}

inline Bundle cmd_epr(const EprConfig& c, unsigned threads = 1) {
    Bundle b;
    b.add_config(c.echo());
    epr::RunOptions opt;
    opt.threads = threads;
    const auto run = epr::run_epr(c.pair, detail::checked_assignments(c), opt);
    add_epr_reports(b, run.stats, c);
    return b;
}

inline Bundle cmd_swap(const SwapConfig& c, unsigned threads = 1) {
    Bundle b;
    b.add_config(c.echo());
    epr::RunOptions opt;
    opt.threads = threads;
    const auto run =
        epr::entanglement_swap_scenario(c.base.pair, detail::checked_assignments(c.base), c.second_source_seed, opt);
    add_epr_reports(b, run.stats, c.base);
    // Different sources are not expected to reproduce the exact anticorrelation.
    if (c.second_source_seed != c.base.pair.master_seed) b.exit_code = kExitOk;
    b.notes.push_back(c.second_source_seed == c.base.pair.master_seed ? "sources share a common past"
                                                                      : "independent sources");
    return b;
}

inline Bundle cmd_density(const DensityCliConfig& c, unsigned threads = 1) {
    Bundle b;
    b.add_config(c.echo());
    const auto r = oracle::run_density_validation(c.density, threads);
    b.add("density.csv", oracle::density_table(r.histogram, r.oracle));
    b.add("wavefunction.csv", oracle::snapshot_table(r.oracle));
    csv::Table s({"time", "analytic_variance", "ensemble_variance", "ensemble_variance_error", "oracle_variance",
                  "oracle_variance_error", "oracle_variance_refined", "oracle_refined_error", "ks_distance",
                  "l1_distance", "outside_fraction", "swaps", "capped", "ks_ok", "variance_ok", "warning"});
    s.add_row({r.time, r.analytic_variance, r.ensemble_variance, r.ensemble_variance_error(), r.oracle_variance,
               r.oracle_variance_error(), r.oracle_variance_refined, r.oracle_refined_error(), r.ks_distance,
               r.l1_distance, r.outside_fraction, r.swaps, r.capped, r.ks_ok, r.variance_ok, r.warning()});
    b.add("summary.csv", s);
    b.notes.push_back("KS " + detail::fmt(r.ks_distance) + ", variance " + detail::fmt(r.ensemble_variance) +
                      " vs analytic " + detail::fmt(r.analytic_variance) + (r.warning() ? " (warning)" : ""));
    return b;
}

inline Bundle cmd_disturbance(const DisturbanceConfig& c, unsigned threads = 1) {
    Bundle b;
    b.add_config(c.echo());
    epr::DisturbanceSpec spec;
    spec.target_wing = c.target_wing;
    spec.law = c.law;
    const auto r = epr::disturbance_sweep(c.pair, spec, c.magnitudes, c.relative, c.axis_deg, threads);
    csv::Table t({"magnitude", "relative", "efficiency", "efficiency_drop", "altered_fraction", "small",
                  "precondition_violated"});
    for (const auto& row : r.rows)
        t.add_row({row.magnitude, row.relative, row.efficiency, row.efficiency_drop, row.altered_fraction, row.small,
                   !row.small});
    b.add("disturbance.csv", t);
    csv::Table s({"half_width", "center_gap", "reference_efficiency", "pairs", "target_wing"});
    s.add_row({r.half_width, r.center_gap, r.reference_efficiency, c.pair.pairs, c.target_wing});
    b.add("summary.csv", s);
    b.notes.push_back("speed half width " + detail::fmt(r.half_width) + ", reference efficiency " +
                      detail::fmt(r.reference_efficiency));
    return b;
}

inline Bundle cmd_chsh_scan(const ChshScanConfig& c, unsigned threads = 1) {
    Bundle b;
    b.add_config(c.echo());
    if (c.pair.pairs < epr::kMinCounts)
        throw ConfigError("chsh-scan needs at least " + std::to_string(epr::kMinCounts) + " pairs");
    const auto angles = c.angles();
    const auto lambdas = epr::generate_pair_seeds(c.pair.master_seed, c.pair.pairs);
    epr::FlightOptions fo;
    fo.threads = threads;
    const auto flight = epr::simulate_flight(c.pair, lambdas, lambdas, fo);
    const auto stats = epr::detect_all_settings(flight, angles, angles, epr::make_detector(c.pair.model), threads);

    constexpr double deg = std::numbers::pi / 180.0;
    csv::Table corr({"mu_deg", "nu_deg", "n", "e_hat", "std_error", "factorized_reference"});
    for (double m : angles)
        for (double n : angles) {
            const auto e = epr::estimate_correlation(stats, m, n);
            corr.add_row({m, n, e.n, e.value, e.std_error, -std::cos(m * deg) * std::cos(n * deg)});
        }
    b.add("correlations.csv", corr);
    const auto scan = epr::chsh_scan(stats, angles, angles);
    csv::Table t({"s_hat", "std_error", "mu_deg", "mu_p_deg", "nu_deg", "nu_p_deg", "combinations", "pairs"});
    t.add_row({scan.best.value, scan.best.std_error, scan.mu, scan.mu_p, scan.nu, scan.nu_p, scan.combinations,
               c.pair.pairs});
    b.add("chsh_scan.csv", t);
    b.notes.push_back("max S_hat " + detail::fmt(scan.best.value) + " +- " + detail::fmt(scan.best.std_error) +
                      " at (" + detail::fmt(scan.mu) + ", " + detail::fmt(scan.mu_p) + ", " + detail::fmt(scan.nu) +
                      ", " + detail::fmt(scan.nu_p) + ")");
    return b;
}

}  // namespace bellsim::cli
