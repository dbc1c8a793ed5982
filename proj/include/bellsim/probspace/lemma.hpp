#pragma once

// Deterministic passive locality: under perfect equal-axis anticorrelation
// and passive locality, conditional outcome probabilities given the source
// are indicators, and the detector event coincides with a source event.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/probspace/finite_space.hpp"
#include "bellsim/probspace/locality.hpp"
#include "bellsim/probspace/setting_model.hpp"

namespace bellsim::probspace {

struct EqualAxisWitness {
    SettingPair setting;
    std::vector<std::size_t> cells;  // source cells whose union is equivalent to out1 = up
    double p_out1_up = 0.0;
    double p_witness = 0.0;
    double p_out1_up_and_witness = 0.0;
};

struct LemmaReport {
    bool is_deterministic = true;
    double max_indicator_deviation = 0.0;  // distance of conditionals from {0, 1}
    std::vector<EqualAxisWitness> witnesses;
};

/// Preconditions, each reported by name when violated:
///   equal-axis setting present, perfect anticorrelation there
///   (P(up,up) = P(down,down) = 0), and passive locality.
inline LemmaReport deterministic_passive_locality_check(const SettingIndexedModel& model,
                                                        double tol = kLemmaTol) {
    std::vector<std::size_t> equal;
    for (std::size_t i = 0; i < model.settings().size(); ++i)
        if (model.settings()[i].equal_axes()) equal.push_back(i);
    if (equal.empty()) throw PreconditionError("precondition 'equal-axis setting present' failed");

    for (std::size_t i : equal) {
        const auto p = model.joint(i);
        if (p[joint_index(Spin::Up, Spin::Up)] > kEqualityTol || p[joint_index(Spin::Down, Spin::Down)] > kEqualityTol)
            throw PreconditionError("precondition 'equal-axis anticorrelation' failed at " +
                                    model.settings()[i].label());
    }
    const auto passive = is_passively_local(model);
    if (!passive.ok)
        throw PreconditionError("precondition 'passive locality' failed (max deviation " +
                                std::to_string(passive.max_deviation) + " at " + passive.witness + ")");

    LemmaReport rep;
    const Partition cells = model.source_partition();
    for (std::size_t i : equal) {
        const FiniteProbSpace sp = model.space(i);
        EqualAxisWitness w{model.settings()[i], {}, 0.0, 0.0, 0.0};
        for (const Event& e : {model.out1_event(Spin::Up), model.out1_event(Spin::Down), model.out2_event(Spin::Up),
                               model.out2_event(Spin::Down)}) {
            const auto c = conditional_probability(sp, e, cells);
            for (std::size_t k = 0; k < cells.size(); ++k) {
                const double v = c.on_cell(k);
                rep.max_indicator_deviation = std::max(rep.max_indicator_deviation, std::min(v, 1.0 - v));
            }
        }
        const auto up1 = conditional_probability(sp, model.out1_event(Spin::Up), cells);
        Event x;
        for (std::size_t k = 0; k < cells.size(); ++k)
            if (up1.on_cell(k) >= 0.5) {
                w.cells.push_back(k);
                x = unite(x, cells.cells[k]);
            }
        w.p_out1_up = sp.probability(model.out1_event(Spin::Up));
        w.p_witness = sp.probability(x);
        w.p_out1_up_and_witness = sp.probability(intersect(model.out1_event(Spin::Up), x));
        if (std::abs(w.p_out1_up - w.p_witness) > tol || std::abs(w.p_out1_up_and_witness - w.p_witness) > tol)
            rep.is_deterministic = false;
        rep.witnesses.push_back(std::move(w));
    }
    if (rep.max_indicator_deviation > tol) rep.is_deterministic = false;
    return rep;
}

}  // namespace bellsim::probspace
