#pragma once

// Histogram estimates of the ensemble fields on the bin grid: density rho,
// mean velocity v and osmotic velocity u = -nu grad ln rho.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/vec3.hpp"
#include "bellsim/dynamics/ensemble.hpp"
#include "bellsim/dynamics/params.hpp"

namespace bellsim::dynamics {

struct FieldCell {
    BinKey key{};
    Vec3 center;
    std::size_t count = 0;
    double rho = 0.0;
    Vec3 v;
    bool has_v = false;  // false for empty bins
    Vec3 u;
    bool has_u = false;  // false for empty bins or bins without an occupied neighbor
};

/// Dense field arrays over the bounding box of occupied bins.
struct FieldEstimate {
    BinGrid grid;
    BinKey lo{}, hi{};  // inclusive key range
    std::array<std::size_t, 3> shape{};
    std::vector<FieldCell> cells;
    std::size_t total = 0;

    std::size_t index(const BinKey& k) const noexcept {
        return static_cast<std::size_t>(k[0] - lo[0]) * shape[1] * shape[2] +
               static_cast<std::size_t>(k[1] - lo[1]) * shape[2] + static_cast<std::size_t>(k[2] - lo[2]);
    }

    bool contains(const BinKey& k) const noexcept {
        for (std::size_t a = 0; a < 3; ++a)
            if (k[a] < lo[a] || k[a] > hi[a]) return false;
        return true;
    }

    const FieldCell* find(const BinKey& k) const noexcept { return contains(k) ? &cells[index(k)] : nullptr; }

    double mass() const noexcept {
        double m = 0.0;
        for (const auto& c : cells) m += c.rho * grid.volume();
        return m;
    }
};

inline constexpr std::size_t kMaxFieldCells = 50'000'000;

/// Estimates the fields of the whole ensemble, or of one sub-ensemble.
inline FieldEstimate estimate_fields(const EnsembleState& state, const PhysParams& p,
                                     std::optional<Ensemble> only = std::nullopt) {
    FieldEstimate f;
    f.grid = state.bins;
    std::vector<const Trajectory*> members;
    for (const auto& t : state.trajectories)
        if (!only || t.ensemble == *only) members.push_back(&t);
    BELLSIM_REQUIRE(!members.empty(), NumericalError, "cannot estimate fields of an empty ensemble");

    std::vector<BinKey> keys(members.size());
    for (std::size_t i = 0; i < members.size(); ++i) keys[i] = state.bins.key(members[i]->position);
    f.lo = f.hi = keys[0];
    for (const auto& k : keys)
        for (std::size_t a = 0; a < 3; ++a) {
            f.lo[a] = std::min(f.lo[a], k[a]);
            f.hi[a] = std::max(f.hi[a], k[a]);
        }
    double ncells = 1.0;
    for (std::size_t a = 0; a < 3; ++a) {
        f.shape[a] = static_cast<std::size_t>(f.hi[a] - f.lo[a] + 1);
        ncells *= static_cast<double>(f.shape[a]);
    }
    BELLSIM_REQUIRE(ncells <= static_cast<double>(kMaxFieldCells), NumericalError,
                    "occupied region spans too many bins; widen the grid");
    f.cells.resize(static_cast<std::size_t>(ncells));
    for (std::size_t i0 = 0; i0 < f.shape[0]; ++i0)
        for (std::size_t i1 = 0; i1 < f.shape[1]; ++i1)
            for (std::size_t i2 = 0; i2 < f.shape[2]; ++i2) {
                const BinKey k{f.lo[0] + static_cast<std::int64_t>(i0), f.lo[1] + static_cast<std::int64_t>(i1),
                               f.lo[2] + static_cast<std::int64_t>(i2)};
                auto& c = f.cells[f.index(k)];
                c.key = k;
                c.center = state.bins.center(k);
            }

    // Running mean, so identical member velocities give that velocity exactly.
    for (std::size_t i = 0; i < members.size(); ++i) {
        auto& c = f.cells[f.index(keys[i])];
        ++c.count;
        c.v += (members[i]->velocity - c.v) / static_cast<double>(c.count);
    }
    f.total = members.size();
    const double norm_factor = 1.0 / (static_cast<double>(f.total) * state.bins.volume());
    for (auto& c : f.cells) {
        c.rho = static_cast<double>(c.count) * norm_factor;
        c.has_v = c.count > 0;
    }

    const double nu = p.nu();
    for (auto& c : f.cells) {
        if (c.count == 0) continue;
        bool ok = true;
        Vec3 grad{};
        for (std::size_t a = 0; a < 3 && ok; ++a) {
            if (!state.bins.binned(a)) continue;
            BinKey kp = c.key, km = c.key;
            ++kp[a];
            --km[a];
            const FieldCell* cp = f.find(kp);
            const FieldCell* cm = f.find(km);
            const bool hp = cp && cp->count > 0;
            const bool hm = cm && cm->count > 0;
            const double w = state.bins.width[a];
            if (hp && hm)
                grad[a] = (std::log(cp->rho) - std::log(cm->rho)) / (2.0 * w);
            else if (hp)
                grad[a] = (std::log(cp->rho) - std::log(c.rho)) / w;
            else if (hm)
                grad[a] = (std::log(c.rho) - std::log(cm->rho)) / w;
            else
                ok = false;
        }
        if (ok) {
            c.u = -nu * grad;
            c.has_u = true;
        }
    }
    return f;
}

}  // namespace bellsim::dynamics
