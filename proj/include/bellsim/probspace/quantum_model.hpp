#pragma once

#include <algorithm>
#include <array>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/probspace/setting_model.hpp"
#include "bellsim/spin/singlet.hpp"

namespace bellsim::probspace {

/// Singlet statistics attached to a source partition: for every setting the
/// joint table in each source cell is w_k times the projector probabilities,
/// so the detector outcomes carry no information about the source cell.
inline SettingIndexedModel build_quantum_epr_model(const std::vector<SettingPair>& settings,
                                                   std::vector<double> source_weights = {0.5, 0.5}) {
    BELLSIM_REQUIRE(!settings.empty(), PreconditionError, "quantum model needs at least one setting");
    SettingIndexedModel model(source_weights);
    for (const auto& s : settings) {
        const auto q = spin::quantum_joint_probs(spin::Axis::planar(s.mu), spin::Axis::planar(s.nu));
        JointTable t(source_weights.size());
        for (std::size_t k = 0; k < t.size(); ++k)
            for (std::size_t j = 0; j < 4; ++j) t[k][j] = source_weights[k] * std::max(0.0, q[j]);
        model.add_setting(s, std::move(t));
    }
    return model;
}

}  // namespace bellsim::probspace
