#pragma once

// A family of probability measures over (source event, out1, out2), one per
// detector setting pair.

#include <array>
#include <cmath>
#include <cstddef>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "bellsim/core/csv.hpp"
#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/probspace/finite_space.hpp"

namespace bellsim::probspace {

inline constexpr double kAxisTol = 1e-9;

constexpr double deg_to_rad(double deg) noexcept { return deg * (std::numbers::pi / 180.0); }
constexpr double rad_to_deg(double rad) noexcept { return rad * (180.0 / std::numbers::pi); }

inline double normalize_angle(double a) {
    BELLSIM_REQUIRE(std::isfinite(a), PreconditionError, "angle must be finite");
    double r = std::fmod(a, 2.0 * std::numbers::pi);
    if (r < 0.0) r += 2.0 * std::numbers::pi;
    if (r >= 2.0 * std::numbers::pi) r = 0.0;
    return r;
}

/// Smallest distance between two angles on the circle.
inline double angular_distance(double a, double b) noexcept {
    const double d = std::fmod(std::abs(a - b), 2.0 * std::numbers::pi);
    return std::min(d, 2.0 * std::numbers::pi - d);
}

inline bool same_axis(double a, double b, double tol = kAxisTol) noexcept { return angular_distance(a, b) <= tol; }

/// Planar detector angles in radians, normalized to [0, 2 pi).
struct SettingPair {
    double mu = 0.0;
    double nu = 0.0;

    static SettingPair radians(double mu, double nu) { return {normalize_angle(mu), normalize_angle(nu)}; }
    static SettingPair degrees(double mu_deg, double nu_deg) {
        return radians(deg_to_rad(mu_deg), deg_to_rad(nu_deg));
    }

    bool matches(const SettingPair& o, double tol = kAxisTol) const noexcept {
        return same_axis(mu, o.mu, tol) && same_axis(nu, o.nu, tol);
    }
    bool equal_axes(double tol = kAxisTol) const noexcept { return same_axis(mu, nu, tol); }

    std::string label() const {
        return "(" + csv::format_decimal12(rad_to_deg(mu)) + "," + csv::format_decimal12(rad_to_deg(nu)) + ")";
    }
};

/// Joint probabilities P(source = k, out1 = o1, out2 = o2) for one setting,
/// indexed [k][o1 * 2 + o2] with Up = 0 and Down = 1.
using JointTable = std::vector<std::array<double, 4>>;

constexpr std::size_t joint_index(Spin o1, Spin o2) noexcept {
    return static_cast<std::size_t>(o1) * 2 + static_cast<std::size_t>(o2);
}

class SettingIndexedModel {
public:
    explicit SettingIndexedModel(std::vector<double> source_weights) : source_weights_(std::move(source_weights)) {
        BELLSIM_REQUIRE(!source_weights_.empty(), PreconditionError, "model needs at least one source event");
        double s = 0.0;
        for (double w : source_weights_) {
            BELLSIM_REQUIRE(std::isfinite(w) && w >= 0.0, PreconditionError, "source weights must be nonnegative");
            s += w;
        }
        BELLSIM_REQUIRE(std::abs(s - 1.0) <= kEqualityTol, PreconditionError, "source weights must sum to 1");
    }

    /// Adds a setting. The table's source marginal must equal the model's source weights.
    void add_setting(const SettingPair& s, JointTable table) {
        BELLSIM_REQUIRE(!find(s).has_value(), PreconditionError, "setting " + s.label() + " already present");
        BELLSIM_REQUIRE(table.size() == source_weights_.size(), PreconditionError,
                        "table for " + s.label() + " has the wrong number of source events");
        double total = 0.0;
        for (std::size_t k = 0; k < table.size(); ++k) {
            double cell = 0.0;
            for (double p : table[k]) {
                BELLSIM_REQUIRE(std::isfinite(p) && p >= 0.0, PreconditionError,
                                "table for " + s.label() + " has a negative or non-finite entry");
                cell += p;
            }
            BELLSIM_REQUIRE(std::abs(cell - source_weights_[k]) <= kEqualityTol, PreconditionError,
                            "source marginal of " + s.label() + " differs from the model's source weights at event S" +
                                std::to_string(k + 1));
            total += cell;
        }
        BELLSIM_REQUIRE(std::abs(total - 1.0) <= kEqualityTol, PreconditionError,
                        "table for " + s.label() + " does not sum to 1");
        settings_.push_back(s);
        tables_.push_back(std::move(table));
    }

    std::size_t source_events() const noexcept { return source_weights_.size(); }
    const std::vector<double>& source_weights() const noexcept { return source_weights_; }
    const std::vector<SettingPair>& settings() const noexcept { return settings_; }
    const JointTable& table(std::size_t i) const { return tables_.at(i); }

    std::optional<std::size_t> find(const SettingPair& s) const noexcept {
        for (std::size_t i = 0; i < settings_.size(); ++i)
            if (settings_[i].matches(s)) return i;
        return std::nullopt;
    }

    std::size_t require(const SettingPair& s) const {
        auto i = find(s);
        if (!i) throw PreconditionError("setting " + s.label() + " is not part of the model");
        return *i;
    }

    /// The measure for setting i as a space over source_events() * 4 outcomes.
    FiniteProbSpace space(std::size_t i) const {
        const auto& t = tables_.at(i);
        std::vector<std::string> labels;
        std::vector<double> w;
        for (std::size_t k = 0; k < t.size(); ++k)
            for (Spin a : {Spin::Up, Spin::Down})
                for (Spin b : {Spin::Up, Spin::Down}) {
                    labels.push_back("S" + std::to_string(k + 1) + ":" + std::string(to_string(a)) + "," +
                                     std::string(to_string(b)));
                    w.push_back(t[k][joint_index(a, b)]);
                }
        return FiniteProbSpace(std::move(labels), std::move(w));
    }

    std::size_t outcome_index(std::size_t source, Spin o1, Spin o2) const noexcept {
        return source * 4 + joint_index(o1, o2);
    }

    Partition source_partition() const {
        std::vector<Event> cells(source_events());
        for (std::size_t k = 0; k < cells.size(); ++k) cells[k] = {4 * k, 4 * k + 1, 4 * k + 2, 4 * k + 3};
        return Partition(std::move(cells));
    }

    Event out1_event(Spin s) const {
        Event e;
        for (std::size_t k = 0; k < source_events(); ++k)
            for (Spin b : {Spin::Up, Spin::Down}) e.push_back(outcome_index(k, s, b));
        return e;
    }

    Event out2_event(Spin s) const {
        Event e;
        for (std::size_t k = 0; k < source_events(); ++k)
            for (Spin a : {Spin::Up, Spin::Down}) e.push_back(outcome_index(k, a, s));
        return e;
    }

    Event joint_event(Spin o1, Spin o2) const {
        Event e;
        for (std::size_t k = 0; k < source_events(); ++k) e.push_back(outcome_index(k, o1, o2));
        return e;
    }

    Event source_event(std::size_t k) const { return source_partition().cells.at(k); }

    /// Unconditional joint probabilities (up-up, up-down, down-up, down-down).
    std::array<double, 4> joint(std::size_t i) const {
        std::array<double, 4> out{};
        for (const auto& cell : tables_.at(i))
            for (std::size_t j = 0; j < 4; ++j) out[j] += cell[j];
        return out;
    }

private:
    std::vector<double> source_weights_;
    std::vector<SettingPair> settings_;
    std::vector<JointTable> tables_;
};

}  // namespace bellsim::probspace
