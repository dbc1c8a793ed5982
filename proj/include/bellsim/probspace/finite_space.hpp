#pragma once

// Finite probability spaces, partition-generated sigma-algebras and
// conditional probabilities given a partition.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/core/error.hpp"

namespace bellsim::probspace {

inline constexpr double kEqualityTol = 1e-12;
inline constexpr double kLemmaTol = 1e-9;

/// An event is a set of outcome indices. Duplicates are ignored.
using Event = std::vector<std::size_t>;

class FiniteProbSpace {
public:
    FiniteProbSpace(std::vector<std::string> outcomes, std::vector<double> weights)
        : outcomes_(std::move(outcomes)), weights_(std::move(weights)) {
        BELLSIM_REQUIRE(!outcomes_.empty(), PreconditionError, "probability space needs at least one outcome");
        BELLSIM_REQUIRE(outcomes_.size() == weights_.size(), PreconditionError,
                        "one weight per outcome is required");
        double sum = 0.0;
        for (std::size_t i = 0; i < weights_.size(); ++i) {
            BELLSIM_REQUIRE(std::isfinite(weights_[i]) && weights_[i] >= 0.0, PreconditionError,
                            "weight of outcome '" + outcomes_[i] + "' is negative or not finite");
            sum += weights_[i];
        }
        BELLSIM_REQUIRE(std::abs(sum - 1.0) <= kEqualityTol, PreconditionError,
                        "weights sum to " + std::to_string(sum) + ", not 1");
    }

    std::size_t size() const noexcept { return weights_.size(); }
    const std::vector<std::string>& outcomes() const noexcept { return outcomes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }
    double weight(std::size_t i) const { return weights_.at(i); }

    Event everything() const {
        Event e(size());
        std::iota(e.begin(), e.end(), std::size_t{0});
        return e;
    }

    double probability(const Event& e) const {
        std::vector<bool> seen(size(), false);
        double p = 0.0;
        for (std::size_t i : e) {
            BELLSIM_REQUIRE(i < size(), PreconditionError, "event refers to an unknown outcome");
            if (!seen[i]) p += weights_[i];
            seen[i] = true;
        }
        return p;
    }

private:
    std::vector<std::string> outcomes_;
    std::vector<double> weights_;
};

inline Event intersect(const Event& a, const Event& b) {
    Event x(a), y(b), out;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline Event unite(const Event& a, const Event& b) {
    Event x(a), y(b), out;
    std::sort(x.begin(), x.end());
    std::sort(y.begin(), y.end());
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), std::back_inserter(out));
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Disjoint cells covering the outcome set. Cells may be flagged degenerate,
/// which permits zero probability; conditioning then assigns them value 0.
struct Partition {
    std::vector<Event> cells;
    std::vector<bool> degenerate;

    Partition() = default;
    explicit Partition(std::vector<Event> c) : cells(std::move(c)), degenerate(cells.size(), false) {}

    std::size_t size() const noexcept { return cells.size(); }

    bool is_degenerate(std::size_t k) const noexcept { return k < degenerate.size() && degenerate[k]; }

    /// cell index for every outcome; throws if cells overlap or miss outcomes.
    std::vector<std::size_t> cell_of(std::size_t n_outcomes) const {
        constexpr std::size_t none = static_cast<std::size_t>(-1);
        std::vector<std::size_t> owner(n_outcomes, none);
        for (std::size_t k = 0; k < cells.size(); ++k)
            for (std::size_t i : cells[k]) {
                BELLSIM_REQUIRE(i < n_outcomes, PreconditionError,
                                "partition cell " + std::to_string(k) + " refers to an unknown outcome");
                BELLSIM_REQUIRE(owner[i] == none || owner[i] == k, PreconditionError,
                                "partition cells overlap at outcome " + std::to_string(i));
                owner[i] = k;
            }
        for (std::size_t i = 0; i < n_outcomes; ++i)
            BELLSIM_REQUIRE(owner[i] != none, PreconditionError,
                            "partition does not cover outcome " + std::to_string(i));
        return owner;
    }
};

/// A random variable measurable with respect to a partition, given by its
/// value on each cell.
class ConditionalRV {
public:
    ConditionalRV(std::vector<double> cell_values, std::vector<std::size_t> cell_of)
        : cell_values_(std::move(cell_values)), cell_of_(std::move(cell_of)) {}

    double operator[](std::size_t outcome) const { return cell_values_.at(cell_of_.at(outcome)); }
    double on_cell(std::size_t k) const { return cell_values_.at(k); }
    std::size_t cells() const noexcept { return cell_values_.size(); }
    std::size_t outcomes() const noexcept { return cell_of_.size(); }

    std::vector<double> values() const {
        std::vector<double> v(cell_of_.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = cell_values_[cell_of_[i]];
        return v;
    }

    double expectation(const FiniteProbSpace& space) const {
        BELLSIM_REQUIRE(space.size() == outcomes(), PreconditionError, "random variable lives on another space");
        double e = 0.0;
        for (std::size_t i = 0; i < outcomes(); ++i) e += space.weight(i) * (*this)[i];
        return e;
    }

    /// True when the value is constant on every cell of `p`.
    bool measurable_wrt(const Partition& p) const {
        const auto owner = p.cell_of(outcomes());
        std::vector<double> first(p.size(), std::nan(""));
        for (std::size_t i = 0; i < outcomes(); ++i) {
            const double v = (*this)[i];
            double& f = first[owner[i]];
            if (std::isnan(f))
                f = v;
            else if (f != v)
                return false;
        }
        return true;
    }

private:
    std::vector<double> cell_values_;
    std::vector<std::size_t> cell_of_;
};

inline std::string describe_cell(const FiniteProbSpace& space, const Event& cell) {
    std::ostringstream os;
    os << '{';
    for (std::size_t n = 0; n < cell.size(); ++n) os << (n ? "," : "") << space.outcomes().at(cell[n]);
    os << '}';
    return os.str();
}

/// P(event | partition): on the cell containing an outcome, P(event & cell) / P(cell).
inline ConditionalRV conditional_probability(const FiniteProbSpace& space, const Event& event,
                                             const Partition& partition) {
    auto owner = partition.cell_of(space.size());
    std::vector<bool> in_event(space.size(), false);
    for (std::size_t i : event) {
        BELLSIM_REQUIRE(i < space.size(), PreconditionError, "event refers to an unknown outcome");
        in_event[i] = true;
    }
    std::vector<double> mass(partition.size(), 0.0), hit(partition.size(), 0.0);
    for (std::size_t i = 0; i < space.size(); ++i) {
        mass[owner[i]] += space.weight(i);
        if (in_event[i]) hit[owner[i]] += space.weight(i);
    }
    std::vector<double> value(partition.size(), 0.0);
    for (std::size_t k = 0; k < partition.size(); ++k) {
        if (mass[k] > 0.0) {
            value[k] = std::clamp(hit[k] / mass[k], 0.0, 1.0);
        } else if (!partition.is_degenerate(k)) {
            throw PreconditionError("partition cell " + std::to_string(k) + " " +
                                    describe_cell(space, partition.cells[k]) + " has zero probability");
        }
    }
    return ConditionalRV(std::move(value), std::move(owner));
}

}  // namespace bellsim::probspace
