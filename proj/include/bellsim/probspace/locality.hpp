#pragma once

// Active locality (remote settings leave local marginals unchanged) and
// passive locality (joint outcomes factorize given the source event).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>

#include "bellsim/core/labels.hpp"
#include "bellsim/probspace/finite_space.hpp"
#include "bellsim/probspace/setting_model.hpp"

namespace bellsim::probspace {

struct LocalityReport {
    bool ok = true;
    double max_deviation = 0.0;
    std::string witness;  // worst offending setting pair / cell, empty if none
};

namespace detail {

inline void record(LocalityReport& r, double dev, double tol, const std::string& where) {
    if (dev > r.max_deviation || (r.witness.empty() && dev > tol)) {
        r.max_deviation = std::max(r.max_deviation, dev);
        r.witness = where;
    }
    if (dev > tol) r.ok = false;
}

}  // namespace detail

/// Compares each wing's outcome probabilities, unconditional and given each
/// source cell, across every pair of settings that share that wing's axis.
inline LocalityReport is_actively_local(const SettingIndexedModel& model, double tol = kEqualityTol) {
    LocalityReport rep;
    const auto& st = model.settings();
    const Partition cells = model.source_partition();
    bool compared = false;
    for (std::size_t i = 0; i < st.size(); ++i) {
        const FiniteProbSpace si = model.space(i);
        for (std::size_t j = i + 1; j < st.size(); ++j) {
            const bool share1 = same_axis(st[i].mu, st[j].mu);
            const bool share2 = same_axis(st[i].nu, st[j].nu);
            if (!share1 && !share2) continue;
            compared = true;
            const FiniteProbSpace sj = model.space(j);
            const std::string where = st[i].label() + " vs " + st[j].label();
            for (int wing = 1; wing <= 2; ++wing) {
                if ((wing == 1 && !share1) || (wing == 2 && !share2)) continue;
                for (Spin s : {Spin::Up, Spin::Down}) {
                    const Event e = wing == 1 ? model.out1_event(s) : model.out2_event(s);
                    const std::string tag = where + " wing " + std::to_string(wing) + " " + std::string(to_string(s));
                    detail::record(rep, std::abs(si.probability(e) - sj.probability(e)), tol, tag);
                    const auto ci = conditional_probability(si, e, cells);
                    const auto cj = conditional_probability(sj, e, cells);
                    for (std::size_t k = 0; k < cells.size(); ++k)
                        detail::record(rep, std::abs(ci.on_cell(k) - cj.on_cell(k)), tol,
                                       tag + " given S" + std::to_string(k + 1));
                }
            }
        }
    }
    if (!compared) {
        rep.ok = false;
        rep.witness = "no two settings share an axis; active locality cannot be assessed";
    }
    return rep;
}

/// max over settings, source cells and joint outcomes of
/// |P(s1 & s2 | cell) - P(s1 | cell) P(s2 | cell)|.
inline LocalityReport is_passively_local(const SettingIndexedModel& model, double tol = kEqualityTol) {
    LocalityReport rep;
    const Partition cells = model.source_partition();
    for (std::size_t i = 0; i < model.settings().size(); ++i) {
        const FiniteProbSpace sp = model.space(i);
        for (Spin a : {Spin::Up, Spin::Down}) {
            const auto p1 = conditional_probability(sp, model.out1_event(a), cells);
            for (Spin b : {Spin::Up, Spin::Down}) {
                const auto p2 = conditional_probability(sp, model.out2_event(b), cells);
                const auto pj = conditional_probability(sp, model.joint_event(a, b), cells);
                for (std::size_t k = 0; k < cells.size(); ++k) {
                    const double dev = std::abs(pj.on_cell(k) - p1.on_cell(k) * p2.on_cell(k));
                    detail::record(rep, dev, tol,
                                   model.settings()[i].label() + " S" + std::to_string(k + 1) + " " +
                                       std::string(to_string(a)) + "," + std::string(to_string(b)));
                }
            }
        }
    }
    return rep;
}

}  // namespace bellsim::probspace
