#pragma once

// Hidden trajectories, the spatial bin grid and the ensemble state.

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/core/vec3.hpp"

namespace bellsim::dynamics {

enum class Ensemble : std::uint8_t { A = 0, B = 1 };

constexpr Ensemble other(Ensemble e) noexcept { return e == Ensemble::A ? Ensemble::B : Ensemble::A; }
constexpr std::string_view to_string(Ensemble e) noexcept { return e == Ensemble::A ? "A" : "B"; }

struct Trajectory {
    std::uint64_t id = 0;
    Vec3 position;
    Vec3 velocity;
    Ensemble ensemble = Ensemble::A;
    Spin spin = Spin::Up;

    friend bool operator==(const Trajectory&, const Trajectory&) = default;
};

using BinKey = std::array<std::int64_t, 3>;

/// Axis-aligned bins of the given widths. An axis whose width is not a
/// positive finite number is not binned: every position maps to index 0 on it
/// and it contributes a factor 1 to the bin volume. The grid is unbounded, so
/// it covers every position.
struct BinGrid {
    Vec3 width{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
               std::numeric_limits<double>::infinity()};
    Vec3 origin{};

    static BinGrid single() { return {}; }
    static BinGrid along_x(double w) {
        BinGrid g;
        g.width.x = w;
        return g;
    }

    bool binned(std::size_t axis) const noexcept { return width[axis] > 0.0 && std::isfinite(width[axis]); }

    BinKey key(const Vec3& pos) const {
        BinKey k{0, 0, 0};
        for (std::size_t a = 0; a < 3; ++a)
            if (binned(a)) {
                const double f = std::floor((pos[a] - origin[a]) / width[a]);
                BELLSIM_REQUIRE(std::isfinite(f) && std::abs(f) < 4e18, NumericalError,
                                "position outside the representable bin range");
                k[a] = static_cast<std::int64_t>(f);
            }
        return k;
    }

    double volume() const noexcept {
        double v = 1.0;
        for (std::size_t a = 0; a < 3; ++a)
            if (binned(a)) v *= width[a];
        return v;
    }

    Vec3 center(const BinKey& k) const noexcept {
        Vec3 c{};
        for (std::size_t a = 0; a < 3; ++a)
            c[a] = binned(a) ? origin[a] + (static_cast<double>(k[a]) + 0.5) * width[a] : 0.0;
        return c;
    }
};

struct EnsembleState {
    std::vector<Trajectory> trajectories;
    double time = 0.0;
    std::uint64_t step = 0;
    BinGrid bins;

    void validate() const {
        std::unordered_set<std::uint64_t> ids;
        for (const auto& t : trajectories) {
            BELLSIM_REQUIRE(ids.insert(t.id).second, PreconditionError,
                            "duplicate trajectory id " + std::to_string(t.id));
            BELLSIM_REQUIRE(is_finite(t.position) && is_finite(t.velocity), PreconditionError,
                            "trajectory " + std::to_string(t.id) + " has a non-finite state");
        }
    }

    std::size_t count(Ensemble e) const noexcept {
        std::size_t n = 0;
        for (const auto& t : trajectories) n += t.ensemble == e;
        return n;
    }
};

}  // namespace bellsim::dynamics
