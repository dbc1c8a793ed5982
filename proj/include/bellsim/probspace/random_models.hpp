#pragma once

// Random finite models for property tests of the deterministic-passive-
// locality lemma. Candidates are drawn from a broad family (factorized and
// general per-cell tables, sparse or dense) and kept only if they show
// perfect equal-axis anticorrelation and pass the passive-locality check.

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bellsim/core/random.hpp"
#include "bellsim/probspace/locality.hpp"
#include "bellsim/probspace/setting_model.hpp"

namespace bellsim::probspace {

struct RandomModelStats {
    std::size_t candidates = 0;
    std::size_t rejected_anticorrelation = 0;
    std::size_t rejected_passive = 0;
};

namespace detail {

class Draws {
public:
    Draws(const rng::CounterStream& s, std::uint64_t candidate) : s_(s), c_(candidate) {}
    double uniform() { return s_.uniform(c_, n_++); }
    std::uint64_t bits() { return s_.bits(c_, n_++); }

    /// 0, 1 or uniform(0, 1), each with probability 1/3.
    double mixed_probability() {
        switch (bits() % 3) {
            case 0: return 0.0;
            case 1: return 1.0;
            default: return uniform();
        }
    }

private:
    const rng::CounterStream& s_;
    std::uint64_t c_;
    std::uint64_t n_ = 0;
};

inline std::array<double, 4> random_cell(Draws& d) {
    if (d.bits() % 2 == 0) {
        const double p = d.mixed_probability(), q = d.mixed_probability();
        return {p * q, p * (1 - q), (1 - p) * q, (1 - p) * (1 - q)};
    }
    std::array<double, 4> c{};
    double s = 0.0;
    for (double& v : c) {
        v = d.bits() % 2 ? 0.0 : d.uniform();
        s += v;
    }
    if (s == 0.0) return {0.0, 0.5, 0.5, 0.0};
    for (double& v : c) v /= s;
    return c;
}

inline JointTable scale(const std::vector<std::array<double, 4>>& cond, const std::vector<double>& w) {
    JointTable t(w.size());
    for (std::size_t k = 0; k < w.size(); ++k)
        for (std::size_t j = 0; j < 4; ++j) t[k][j] = w[k] * cond[k][j];
    return t;
}

}  // namespace detail

/// Candidate `index` of the stream keyed by `seed`; nullopt if it fails the filter.
inline std::optional<SettingIndexedModel> random_lemma_candidate(std::uint64_t seed, std::uint64_t index,
                                                                 RandomModelStats* stats = nullptr) {
    const rng::CounterStream s(rng::derive(seed, 0x4c454d4d41ull));
    detail::Draws d(s, index);
    if (stats) ++stats->candidates;

    const std::size_t cells = 2 + d.bits() % 3;
    std::vector<double> w(cells);
    double sum = 0.0;
    for (double& x : w) sum += (x = 0.05 + d.uniform());
    for (double& x : w) x /= sum;
    double again = 0.0;
    for (std::size_t k = 0; k + 1 < cells; ++k) again += w[k];
    w.back() = 1.0 - again;

    SettingIndexedModel m(w);
    const double axis = deg_to_rad(15.0 * static_cast<double>(d.bits() % 24));
    std::vector<std::array<double, 4>> eq(cells);
    for (auto& c : eq) c = detail::random_cell(d);
    m.add_setting(SettingPair::radians(axis, axis), detail::scale(eq, w));

    const double other = deg_to_rad(15.0 * static_cast<double>(1 + d.bits() % 23));
    std::vector<std::array<double, 4>> off(cells);
    for (auto& c : off) {
        const double p = d.uniform(), q = d.uniform();
        c = {p * q, p * (1 - q), (1 - p) * q, (1 - p) * (1 - q)};
    }
    m.add_setting(SettingPair::radians(axis, axis + other), detail::scale(off, w));

    const auto j = m.joint(0);
    if (j[joint_index(Spin::Up, Spin::Up)] > kEqualityTol || j[joint_index(Spin::Down, Spin::Down)] > kEqualityTol) {
        if (stats) ++stats->rejected_anticorrelation;
        return std::nullopt;
    }
    if (!is_passively_local(m).ok) {
        if (stats) ++stats->rejected_passive;
        return std::nullopt;
    }
    return m;
}

/// First `count` accepted candidates of the stream keyed by `seed`.
inline std::vector<SettingIndexedModel> random_lemma_models(std::uint64_t seed, std::size_t count,
                                                            RandomModelStats* stats = nullptr) {
    std::vector<SettingIndexedModel> out;
    for (std::uint64_t i = 0; out.size() < count; ++i)
        if (auto m = random_lemma_candidate(seed, i, stats)) out.push_back(std::move(*m));
    return out;
}

}  // namespace bellsim::probspace
