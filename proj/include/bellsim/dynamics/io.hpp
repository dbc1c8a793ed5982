#pragma once

#include <string>
#include <vector>

#include "bellsim/core/csv.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/evolve.hpp"
#include "bellsim/dynamics/exchange.hpp"

namespace bellsim::dynamics {

inline csv::Table snapshot_table(const EnsembleState& s) {
    csv::Table t({"id", "x", "y", "z", "vx", "vy", "vz", "ensemble", "spin"});
    for (const auto& tr : s.trajectories)
        t.add_row({tr.id, tr.position.x, tr.position.y, tr.position.z, tr.velocity.x, tr.velocity.y, tr.velocity.z,
                   to_string(tr.ensemble), to_string(tr.spin)});
    return t;
}

inline csv::Table diagnostics_table(const std::vector<StepDiagnostics>& diag) {
    csv::Table t({"step", "time", "mean_speed_a", "mean_speed_b", "gap", "residual_before", "residual_after", "swaps",
                  "capped"});
    for (const auto& d : diag)
        t.add_row({d.step, d.time, d.mean_speed_a, d.mean_speed_b, d.gap, d.residual_before, d.residual_after, d.swaps,
                   d.capped});
    return t;
}

inline csv::Table swap_log_table(const std::vector<SwapRecord>& log) {
    csv::Table t({"step", "time", "a_id", "b_id", "bin_x", "bin_y", "bin_z"});
    for (const auto& r : log)
        t.add_row({r.step, r.time, r.a_id, r.b_id, static_cast<long long>(r.bin[0]), static_cast<long long>(r.bin[1]),
                   static_cast<long long>(r.bin[2])});
    return t;
}

}  // namespace bellsim::dynamics
