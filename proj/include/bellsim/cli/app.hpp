#pragma once

// Command-line front end: bellsim <subcommand> [--config PATH] [--seed N]
// [--out DIR] [--threads N]. Exit codes: 0 success, 1 invariant failure or
// numerical breakdown, 2 usage or configuration error.

#include <cstdint>
#include <exception>
#include <functional>
#include <map>
#include <optional>
#include <ostream>
#include <string>

#include <CLI11.hpp>

#include "bellsim/cli/commands.hpp"

namespace bellsim::cli {

struct GlobalOptions {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::string out_dir = "bellsim_out";
    unsigned threads = 1;
};

using CommandFn = std::function<Bundle(const json&, const GlobalOptions&)>;

inline const std::map<std::string, std::pair<std::string, CommandFn>>& command_table() {
    static const std::map<std::string, std::pair<std::string, CommandFn>> table{
        {"verify-theorem",
         {"CHSH bound under locality, quantum model audit, deterministic passive locality battery",
          [](const json& d, const GlobalOptions& g) { return cmd_verify_theorem(VerifyConfig::parse(d, g.seed)); }}},
        {"epr",
         {"simulated EPR experiment: counts, correlations, CHSH, no-signaling, factorization",
          [](const json& d, const GlobalOptions& g) { return cmd_epr(EprConfig::parse(d, g.seed), g.threads); }}},
        {"swap",
         {"two pair sources in one exchange environment",
          [](const json& d, const GlobalOptions& g) { return cmd_swap(SwapConfig::parse(d, g.seed), g.threads); }}},
        {"density",
         {"free Gaussian packet: ensemble density and variance against the Schrodinger solver",
          [](const json& d, const GlobalOptions& g) {
              return cmd_density(DensityCliConfig::parse(d, g.seed), g.threads);
          }}},
        {"disturbance",
         {"equal-axis efficiency under small velocity disturbances",
          [](const json& d, const GlobalOptions& g) {
              return cmd_disturbance(DisturbanceConfig::parse(d, g.seed), g.threads);
          }}},
        {"chsh-scan",
         {"CHSH maximum over a grid of detector settings",
          [](const json& d, const GlobalOptions& g) {
              return cmd_chsh_scan(ChshScanConfig::parse(d, g.seed), g.threads);
          }}},
    };
    return table;
}

/// Runs one subcommand, writing its bundle to --out. Messages go to `out`/`err`.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"bellsim: stochastic-mechanics EPR simulator and checks", "bellsim"};
    GlobalOptions g;
    std::uint64_t seed = 0;
    app.add_option("--config", g.config_path, "JSON run configuration")->check(CLI::ExistingFile);
    auto* seed_opt = app.add_option("--seed", seed, "master seed, overrides the config");
    app.add_option("--out", g.out_dir, "output directory")->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (results do not depend on it)")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.require_subcommand(1);
    for (const auto& [name, entry] : command_table()) app.add_subcommand(name, entry.first)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }
    if (*seed_opt) g.seed = seed;

    const std::string name = app.get_subcommands().front()->get_name();
    try {
        const json doc = g.config_path.empty() ? json::object() : load_config_file(g.config_path);
        const Bundle b = command_table().at(name).second(doc, g);
        b.write(g.out_dir);
        for (const auto& n : b.notes) out << name << ": " << n << "\n";
        out << name << ": wrote " << b.files.size() << " files to " << g.out_dir << "\n";
        if (b.exit_code != kExitOk) err << name << ": invariant check failed\n";
        return b.exit_code;
    } catch (const ConfigError& e) {
        err << name << ": configuration error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const PreconditionError& e) {
        err << name << ": invalid parameters: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        err << name << ": " << e.what() << "\n";
        return kExitInvariant;
    }
}

}  // namespace bellsim::cli
