#pragma once

// Trajectory exchange between the A and B sub-ensembles.
//
// Within each spatial bin, let vbar = (mean velocity of A + mean velocity of
// B) / 2 and Delta = (mean speed of A) - (mean speed of B). Eligible A members
// have speed > |vbar| and are scanned from the fastest down; eligible B
// members have speed < |vbar| and are scanned from the slowest up; ties go to
// the higher trajectory id first. Swapping a (from A) with b (from B) changes
// Delta by (|v_b| - |v_a|)(1/n_A + 1/n_B). Pairs are swapped greedily while a
// swap strictly reduces |Delta|.
//
// Candidate choice:
//   MinResidual  the pair within the first `window` entries of each scan list
//                that minimizes the new |Delta|; the first minimum in scan
//                order (A outer, B inner) wins.
//   ExtremePair  always the head of both scan lists.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <vector>

#include "bellsim/core/parallel.hpp"
#include "bellsim/dynamics/ensemble.hpp"

namespace bellsim::dynamics {

enum class ExchangeSelection : std::uint8_t { MinResidual, ExtremePair };

struct ExchangeOptions {
    bool superposition = false;  // every A<->B change also flips the spin label
    ExchangeSelection selection = ExchangeSelection::MinResidual;
    std::size_t window = 16;
    std::size_t max_swaps_per_bin = 0;  // 0: n_A + n_B
    unsigned threads = 1;
};

struct SwapRecord {
    std::uint64_t a_id = 0;  // trajectory that left A
    std::uint64_t b_id = 0;  // trajectory that left B
    BinKey bin{};
    double time = 0.0;
    std::uint64_t step = 0;

    friend bool operator==(const SwapRecord&, const SwapRecord&) = default;
};

struct BinExchange {
    BinKey bin{};
    std::size_t n_a = 0;
    std::size_t n_b = 0;
    double residual_before = 0.0;  // |Delta| before exchange
    double residual_after = 0.0;
    std::size_t swaps = 0;
};

struct ExchangeResult {
    std::vector<SwapRecord> log;
    std::vector<BinExchange> bins;

    /// Population-weighted mean of per-bin |Delta| over bins holding both ensembles.
    double weighted_residual(bool after) const noexcept {
        double num = 0.0, den = 0.0;
        for (const auto& b : bins) {
            const double w = static_cast<double>(b.n_a + b.n_b);
            num += w * (after ? b.residual_after : b.residual_before);
            den += w;
        }
        return den > 0.0 ? num / den : 0.0;
    }
};

namespace detail {

inline double bin_delta(const std::vector<Trajectory>& tr, const std::vector<std::size_t>& idx, Vec3& vbar,
                        std::size_t& na, std::size_t& nb) {
    Vec3 va{}, vb{};
    double sa = 0.0, sb = 0.0;
    na = nb = 0;
    for (std::size_t i : idx) {
        const auto& t = tr[i];
        const double s = norm(t.velocity);
        if (t.ensemble == Ensemble::A) {
            va += t.velocity;
            sa += s;
            ++na;
        } else {
            vb += t.velocity;
            sb += s;
            ++nb;
        }
    }
    if (na == 0 || nb == 0) return 0.0;
    const double ia = 1.0 / static_cast<double>(na), ib = 1.0 / static_cast<double>(nb);
    vbar = 0.5 * (va * ia + vb * ib);
    return sa * ia - sb * ib;
}

struct Candidate {
    std::size_t index;
    double speed;
    std::uint64_t id;
};

// A list: fastest first. B list: slowest first. Ties: higher id first.
inline bool a_order(const Candidate& x, const Candidate& y) noexcept {
    return x.speed != y.speed ? x.speed > y.speed : x.id > y.id;
}
inline bool b_order(const Candidate& x, const Candidate& y) noexcept {
    return x.speed != y.speed ? x.speed < y.speed : x.id > y.id;
}

inline BinExchange exchange_bin(std::vector<Trajectory>& tr, const std::vector<std::size_t>& idx, const BinKey& key,
                                double time, std::uint64_t step, const ExchangeOptions& opt,
                                std::vector<SwapRecord>& log) {
    BinExchange out;
    out.bin = key;
    Vec3 vbar;
    const double delta0 = bin_delta(tr, idx, vbar, out.n_a, out.n_b);
    out.residual_before = out.residual_after = std::abs(delta0);
    if (out.n_a == 0 || out.n_b == 0 || delta0 == 0.0) return out;

    const double ia = 1.0 / static_cast<double>(out.n_a), ib = 1.0 / static_cast<double>(out.n_b);
    const double factor = ia + ib;
    const std::size_t cap = opt.max_swaps_per_bin ? opt.max_swaps_per_bin : out.n_a + out.n_b;
    const std::size_t window = opt.selection == ExchangeSelection::ExtremePair ? 1 : std::max<std::size_t>(1, opt.window);

    std::vector<Candidate> la, lb;
    Vec3 va{}, vb{};
    double sa = 0.0, sb = 0.0;
    for (std::size_t i : idx) {
        const Candidate c{i, norm(tr[i].velocity), tr[i].id};
        if (tr[i].ensemble == Ensemble::A) {
            la.push_back(c);
            va += tr[i].velocity;
            sa += c.speed;
        } else {
            lb.push_back(c);
            vb += tr[i].velocity;
            sb += c.speed;
        }
    }
    std::sort(la.begin(), la.end(), a_order);
    std::sort(lb.begin(), lb.end(), b_order);

    while (out.swaps < cap) {
        const double delta = sa * ia - sb * ib;
        const double thr = norm(0.5 * (va * ia + vb * ib));
        std::size_t ka = 0, kb = 0;
        while (ka < std::min(window, la.size()) && la[ka].speed > thr) ++ka;
        while (kb < std::min(window, lb.size()) && lb[kb].speed < thr) ++kb;
        if (ka == 0 || kb == 0) break;

        std::size_t best_a = 0, best_b = 0;
        double best = std::abs(delta + (lb[0].speed - la[0].speed) * factor);
        for (std::size_t i = 0; i < ka; ++i)
            for (std::size_t j = 0; j < kb; ++j) {
                const double r = std::abs(delta + (lb[j].speed - la[i].speed) * factor);
                if (r < best) {
                    best = r;
                    best_a = i;
                    best_b = j;
                }
            }
        // Strict improvement, with a relative margin so that rounding in the
        // running sums cannot make the residual grow.
        if (!(best < std::abs(delta) * (1.0 - 1e-12))) break;

        const Candidate ca = la[best_a], cb = lb[best_b];
        la.erase(la.begin() + static_cast<std::ptrdiff_t>(best_a));
        lb.erase(lb.begin() + static_cast<std::ptrdiff_t>(best_b));
        la.insert(std::upper_bound(la.begin(), la.end(), cb, a_order), cb);
        lb.insert(std::upper_bound(lb.begin(), lb.end(), ca, b_order), ca);

        auto& ta = tr[ca.index];
        auto& tb = tr[cb.index];
        va += tb.velocity - ta.velocity;
        vb += ta.velocity - tb.velocity;
        sa += cb.speed - ca.speed;
        sb += ca.speed - cb.speed;
        ta.ensemble = Ensemble::B;
        tb.ensemble = Ensemble::A;
        if (opt.superposition) {
            ta.spin = flipped(ta.spin);
            tb.spin = flipped(tb.spin);
        }
        log.push_back({ta.id, tb.id, key, time, step});
        ++out.swaps;
    }
    std::size_t na = 0, nb = 0;
    out.residual_after = std::abs(bin_delta(tr, idx, vbar, na, nb));
    return out;
}

}  // namespace detail

/// Trajectory indices grouped by bin, bins in ascending key order.
inline std::map<BinKey, std::vector<std::size_t>> group_by_bin(const EnsembleState& state) {
    std::map<BinKey, std::vector<std::size_t>> bins;
    for (std::size_t i = 0; i < state.trajectories.size(); ++i)
        bins[state.bins.key(state.trajectories[i].position)].push_back(i);
    return bins;
}

/// Runs the exchange in every bin, modifying `state` in place. Bins are
/// independent and may be processed in parallel; the log is merged in bin-key
/// order, so the result does not depend on the thread count.
inline ExchangeResult exchange_in_place(EnsembleState& state, const ExchangeOptions& opt = {}) {
    const auto grouped = group_by_bin(state);
    std::vector<std::pair<BinKey, const std::vector<std::size_t>*>> bins;
    bins.reserve(grouped.size());
    for (const auto& [k, v] : grouped) bins.emplace_back(k, &v);

    std::vector<BinExchange> stats(bins.size());
    std::vector<std::vector<SwapRecord>> logs(bins.size());
    parallel_for(bins.size(), opt.threads, [&](std::size_t b) {
        stats[b] = detail::exchange_bin(state.trajectories, *bins[b].second, bins[b].first, state.time, state.step, opt,
                                        logs[b]);
    });

    ExchangeResult res;
    for (std::size_t b = 0; b < bins.size(); ++b) {
        if (stats[b].n_a > 0 && stats[b].n_b > 0) res.bins.push_back(stats[b]);
        res.log.insert(res.log.end(), logs[b].begin(), logs[b].end());
    }
    return res;
}

struct ExchangeOutput {
    EnsembleState state;
    std::vector<SwapRecord> swap_log;
    ExchangeResult details;
};

/// Value-returning form of the exchange procedure.
inline ExchangeOutput exchange_procedure(EnsembleState state, bool superposition_mode,
                                         ExchangeOptions opt = {}) {
    opt.superposition = superposition_mode;
    auto details = exchange_in_place(state, opt);
    auto log = details.log;
    return {std::move(state), std::move(log), std::move(details)};
}

}  // namespace bellsim::dynamics
