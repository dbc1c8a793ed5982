#pragma once

// Run configurations of the CLI subcommands. Each has parse() from a JSON
// document (plus an optional --seed override) and echo(), which writes every
// resolved value so that the echo reproduces the run on its own.

#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/cli/config_reader.hpp"
#include "bellsim/dynamics/exchange.hpp"
#include "bellsim/dynamics/params.hpp"
#include "bellsim/epr/config.hpp"
#include "bellsim/epr/flight.hpp"
#include "bellsim/epr/stats.hpp"
#include "bellsim/oracle/validation.hpp"

namespace bellsim::cli {

inline std::uint64_t resolve_seed(Reader& r, std::optional<std::uint64_t> override_seed) {
    const bool present = r.has("master_seed");
    const std::uint64_t s = r.uint("master_seed", 0);
    if (override_seed) return *override_seed;
    if (!present) throw ConfigError("master_seed is required (in the config or via --seed)");
    return s;
}

/// The echo names its subcommand; a config naming a different one is rejected.
inline void check_command(Reader& r, const std::string& name) {
    const auto c = r.string("command", name);
    if (c != name) throw ConfigError("config is for '" + c + "', not '" + name + "'");
}

inline dynamics::ExchangeSelection selection_from_string(const std::string& s) {
    if (s == "MinResidual") return dynamics::ExchangeSelection::MinResidual;
    if (s == "ExtremePair") return dynamics::ExchangeSelection::ExtremePair;
    throw ConfigError("unknown exchange selection '" + s + "' (MinResidual, ExtremePair)");
}

inline std::string to_string(dynamics::ExchangeSelection s) {
    return s == dynamics::ExchangeSelection::MinResidual ? "MinResidual" : "ExtremePair";
}

inline dynamics::PhysParams parse_physics(Reader r, const dynamics::PhysParams& d) {
    const double m0 = r.number("m0", d.m0), hbar = r.number("hbar", d.hbar), tau = r.number("tau", d.tau);
    const double tau_coll = r.number("tau_coll", d.tau_coll), kB = r.number("kB", d.kB);
    const double c_max = r.number("c_max", std::numeric_limits<double>::quiet_NaN());
    r.finish();
    try {
        return dynamics::PhysParams::natural(m0, hbar, tau, tau_coll, kB, c_max);
    } catch (const PreconditionError& e) {
        throw ConfigError(std::string("physics: ") + e.what());
    }
}

inline json echo_physics(const dynamics::PhysParams& p) {
    json j;
    j["m0"] = p.m0;
    j["hbar"] = p.hbar;
    j["tau"] = number_or_inf(p.tau);
    j["tau_coll"] = p.tau_coll;
    j["kB"] = p.kB;
    j["c_max"] = number_or_inf(p.c_max);
    return j;
}

/// Pair-flight fields shared by epr, swap, disturbance and chsh-scan.
inline epr::PairConfig parse_pair(Reader& r, epr::PairConfig d, std::optional<std::uint64_t> seed) {
    d.master_seed = resolve_seed(r, seed);
    d.pairs = r.uint("pairs", d.pairs);
    d.model = epr::measurement_model_from_string(r.string("model", std::string(epr::to_string(d.model))));
    d.flight_time = r.number("flight_time", d.flight_time);
    d.dt = r.number("dt", d.dt);
    d.physics = parse_physics(r.child("physics"), d.physics);
    d.ensemble_size = r.uint("ensemble_size", d.ensemble_size);
    d.drift_speed = r.number("drift_speed", d.drift_speed);
    d.velocity_spread = r.number("velocity_spread", d.velocity_spread);
    d.bin_width = r.number("bin_width", d.bin_width);
    auto ex = r.child("exchange");
    d.selection = selection_from_string(ex.string("selection", to_string(d.selection)));
    d.window = ex.uint("window", d.window);
    ex.finish();
    try {
        d.validate();
    } catch (const PreconditionError& e) {
        throw ConfigError(e.what());
    }
    return d;
}

inline void echo_pair(json& j, const epr::PairConfig& c) {
    j["master_seed"] = c.master_seed;
    j["pairs"] = c.pairs;
    j["model"] = std::string(epr::to_string(c.model));
    j["flight_time"] = c.flight_time;
    j["dt"] = c.dt;
    j["physics"] = echo_physics(c.physics);
    j["ensemble_size"] = c.ensemble_size;
    j["drift_speed"] = c.drift_speed;
    j["velocity_spread"] = c.spread();
    j["bin_width"] = number_or_inf(c.bin_width);
    j["exchange"] = {{"selection", to_string(c.selection)}, {"window", c.window}};
}

inline void require_angles(const std::vector<double>& v, const std::string& what, std::size_t exact = 0) {
    for (double a : v)
        if (!std::isfinite(a)) throw ConfigError(what + " must hold finite angles in degrees");
    if (exact && v.size() != exact)
        throw ConfigError(what + " must hold exactly " + std::to_string(exact) + " angles");
    if (!exact && v.empty()) throw ConfigError(what + " must not be empty");
}

struct VerifyConfig {
    std::uint64_t master_seed = 1;
    double grid_step = 0.05;
    std::size_t lemma_models = 1000;
    std::vector<double> chsh_deg{0, 90, 45, 315};  // mu, mu', nu, nu'
    double tolerance = 1e-12;

    static VerifyConfig parse(const json& doc, std::optional<std::uint64_t> seed) {
        Reader r(doc, "");
        check_command(r, "verify-theorem");
        VerifyConfig c;
        c.master_seed = resolve_seed(r, seed);
        c.grid_step = r.number("grid_step", c.grid_step);
        c.lemma_models = r.uint("lemma_models", c.lemma_models);
        c.chsh_deg = r.numbers("chsh_deg", c.chsh_deg);
        c.tolerance = r.number("tolerance", c.tolerance);
        r.finish();
        if (!(c.grid_step > 0.0 && c.grid_step <= 0.5)) throw ConfigError("grid_step must lie in (0, 0.5]");
        if (!(c.tolerance > 0.0)) throw ConfigError("tolerance must be positive");
        require_angles(c.chsh_deg, "chsh_deg", 4);
        return c;
    }

    json echo() const {
        json j;
        j["command"] = "verify-theorem";
        j["master_seed"] = master_seed;
        j["grid_step"] = grid_step;
        j["lemma_models"] = lemma_models;
        j["chsh_deg"] = chsh_deg;
        j["tolerance"] = tolerance;
        return j;
    }
};

struct EprConfig {
    epr::PairConfig pair;
    std::vector<double> mu_deg{0, 90};
    std::vector<double> nu_deg{0, 45, 90, 315};
    std::vector<double> chsh_deg{0, 90, 45, 315};  // empty: no CHSH summary

    static EprConfig parse(const json& doc, std::optional<std::uint64_t> seed) { return parse(doc, seed, "epr", {}); }

    static EprConfig parse(const json& doc, std::optional<std::uint64_t> seed, const std::string& command,
                           EprConfig c) {
        Reader r(doc, "");
        check_command(r, command);
        c.pair = parse_pair(r, c.pair, seed);
        c.mu_deg = r.numbers("mu_deg", c.mu_deg);
        c.nu_deg = r.numbers("nu_deg", c.nu_deg);
        c.chsh_deg = r.numbers("chsh_deg", c.chsh_deg);
        r.finish();
        require_angles(c.mu_deg, "mu_deg");
        require_angles(c.nu_deg, "nu_deg");
        if (!c.chsh_deg.empty()) require_angles(c.chsh_deg, "chsh_deg", 4);
        return c;
    }

    /// Cartesian product of the angle lists, mu-major.
    std::vector<epr::Setting> settings() const {
        std::vector<epr::Setting> s;
        for (double m : mu_deg)
            for (double n : nu_deg) s.push_back(epr::Setting::of(m, n));
        return s;
    }

    json echo(const std::string& command = "epr") const {
        json j;
        j["command"] = command;
        echo_pair(j, pair);
        j["mu_deg"] = mu_deg;
        j["nu_deg"] = nu_deg;
        j["chsh_deg"] = chsh_deg;
        return j;
    }
};

struct SwapConfig {
    EprConfig base;
    std::uint64_t second_source_seed = 1;

    static SwapConfig parse(const json& doc, std::optional<std::uint64_t> seed) {
        json rest = doc;
        std::optional<std::uint64_t> second;
        if (doc.contains("second_source_seed")) {
            Reader r(doc, "");
            second = r.uint("second_source_seed", 0);
            rest.erase("second_source_seed");
        }
        SwapConfig c;
        EprConfig defaults;
        defaults.mu_deg = {0};
        defaults.nu_deg = {0, 90};
        defaults.chsh_deg = {};
        c.base = EprConfig::parse(rest, seed, "swap", defaults);
        c.second_source_seed = second.value_or(c.base.pair.master_seed);
        return c;
    }

    json echo() const {
        json j = base.echo("swap");
        j["second_source_seed"] = second_source_seed;
        return j;
    }
};

struct DisturbanceConfig {
    epr::PairConfig pair;
    std::vector<double> magnitudes{0.0, 0.001, 0.003, 0.01, 0.03, 0.1, 0.3, 1.0};
    bool relative = true;  // magnitudes in units of the speed half width
    int target_wing = 2;
    epr::DisturbanceLaw law = epr::DisturbanceLaw::Gaussian;
    double axis_deg = 0.0;

    static DisturbanceConfig parse(const json& doc, std::optional<std::uint64_t> seed) {
        Reader r(doc, "");
        check_command(r, "disturbance");
        DisturbanceConfig c;
        c.pair = parse_pair(r, c.pair, seed);
        c.magnitudes = r.numbers("magnitudes", c.magnitudes);
        c.relative = r.boolean("relative", c.relative);
        c.target_wing = static_cast<int>(r.uint("target_wing", 2));
        const auto law = r.string("law", "Gaussian");
        c.axis_deg = r.number("axis_deg", c.axis_deg);
        r.finish();
        if (law == "Gaussian") c.law = epr::DisturbanceLaw::Gaussian;
        else if (law == "Uniform") c.law = epr::DisturbanceLaw::Uniform;
        else throw ConfigError("unknown disturbance law '" + law + "' (Gaussian, Uniform)");
        if (c.target_wing != 1 && c.target_wing != 2) throw ConfigError("target_wing must be 1 or 2");
        if (c.magnitudes.empty()) throw ConfigError("magnitudes must not be empty");
        for (double m : c.magnitudes)
            if (!(std::isfinite(m) && m >= 0.0)) throw ConfigError("magnitudes must be finite and nonnegative");
        require_angles({c.axis_deg}, "axis_deg");
        return c;
    }

    json echo() const {
        json j;
        j["command"] = "disturbance";
        echo_pair(j, pair);
        j["magnitudes"] = magnitudes;
        j["relative"] = relative;
        j["target_wing"] = target_wing;
        j["law"] = law == epr::DisturbanceLaw::Gaussian ? "Gaussian" : "Uniform";
        j["axis_deg"] = axis_deg;
        return j;
    }
};

struct ChshScanConfig {
    epr::PairConfig pair;
    double angle_step_deg = 10.0;

    ChshScanConfig() {
        pair.pairs = 100'000;
        pair.model = epr::MeasurementModel::IndependentBorn;
    }

    static ChshScanConfig parse(const json& doc, std::optional<std::uint64_t> seed) {
        Reader r(doc, "");
        check_command(r, "chsh-scan");
        ChshScanConfig c;
        c.pair = parse_pair(r, c.pair, seed);
        c.angle_step_deg = r.number("angle_step_deg", c.angle_step_deg);
        r.finish();
        if (!(c.angle_step_deg > 0.0 && c.angle_step_deg <= 180.0))
            throw ConfigError("angle_step_deg must lie in (0, 180]");
        return c;
    }

    /// 0, step, 2 step, ... below 360.
    std::vector<double> angles() const {
        std::vector<double> a;
        for (std::size_t k = 0; static_cast<double>(k) * angle_step_deg < 360.0 - 1e-9; ++k)
            a.push_back(static_cast<double>(k) * angle_step_deg);
        return a;
    }

    json echo() const {
        json j;
        j["command"] = "chsh-scan";
        echo_pair(j, pair);
        j["angle_step_deg"] = angle_step_deg;
        return j;
    }
};

struct DensityCliConfig {
    oracle::DensityConfig density;

    static DensityCliConfig parse(const json& doc, std::optional<std::uint64_t> seed) {
        Reader r(doc, "");
        check_command(r, "density");
        DensityCliConfig c;
        auto& d = c.density;
        d.master_seed = resolve_seed(r, seed);
        d.trajectories = r.uint("trajectories", d.trajectories);
        d.sigma0 = r.number("sigma0", d.sigma0);
        d.x0 = r.number("x0", d.x0);
        d.k0 = r.number("k0", d.k0);
        d.physics = parse_physics(r.child("physics"), d.physics);
        d.dt = r.number("dt", d.dt);
        d.t_final = r.number("t_final", d.t_final);
        d.exchange_bin_width = r.number("exchange_bin_width", d.exchange_bin_width);
        auto ex = r.child("exchange");
        d.selection = selection_from_string(ex.string("selection", to_string(d.selection)));
        ex.finish();
        auto g = r.child("grid");
        d.grid.x_min = g.number("x_min", d.grid.x_min);
        d.grid.x_max = g.number("x_max", d.grid.x_max);
        d.grid.n = g.uint("n", d.grid.n);
        g.finish();
        d.oracle_dt = r.number("oracle_dt", d.oracle_dt);
        d.histogram_width = r.number("histogram_width", d.histogram_width);
        d.ks_threshold = r.number("ks_threshold", d.ks_threshold);
        d.variance_tolerance = r.number("variance_tolerance", d.variance_tolerance);
        r.finish();
        try {
            d.validate();
        } catch (const PreconditionError& e) {
            throw ConfigError(e.what());
        }
        return c;
    }

    json echo() const {
        const auto& d = density;
        json j;
        j["command"] = "density";
        j["master_seed"] = d.master_seed;
        j["trajectories"] = d.trajectories;
        j["sigma0"] = d.sigma0;
        j["x0"] = d.x0;
        j["k0"] = d.k0;
        j["physics"] = echo_physics(d.physics);
        j["dt"] = d.dt;
        j["t_final"] = d.final_time();
        j["exchange_bin_width"] = d.exchange_bin_width;
        j["exchange"] = {{"selection", to_string(d.selection)}};
        j["grid"] = {{"x_min", d.grid.x_min}, {"x_max", d.grid.x_max}, {"n", d.grid.n}};
        j["oracle_dt"] = d.oracle_dt;
        j["histogram_width"] = d.histogram_width;
        j["ks_threshold"] = d.ks_threshold;
        j["variance_tolerance"] = d.variance_tolerance;
        return j;
    }
};

}  // namespace bellsim::cli
