#pragma once

// Outcome counts and the statistical tests run on them.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/epr/detect.hpp"

namespace bellsim::epr {

inline constexpr double kSettingTol = 1e-9;  // degrees

/// Detector angles in degrees, folded into [0, 360).
struct Setting {
    double mu_deg = 0.0;
    double nu_deg = 0.0;

    static Setting of(double mu, double nu) { return {normalize_deg(mu), normalize_deg(nu)}; }

    friend bool operator==(const Setting&, const Setting&) = default;
};

inline bool same_deg(double a, double b) noexcept {
    const double d = std::abs(a - b);
    return std::min(d, 360.0 - d) <= kSettingTol;
}

inline std::string setting_label(double mu, double nu) {
    std::ostringstream os;
    os << "(" << mu << "," << nu << ")";
    return os.str();
}

/// Joint index of (out1, out2): uu, ud, du, dd.
constexpr std::size_t outcome_index(Spin o1, Spin o2) noexcept {
    return 2 * static_cast<std::size_t>(o1) + static_cast<std::size_t>(o2);
}

struct SettingCounts {
    double mu_deg = 0.0;
    double nu_deg = 0.0;
    std::array<std::array<std::uint64_t, 4>, 2> counts{};  // [source event: 0 = S1 (wing 1 up), 1 = S2][joint]

    std::uint64_t n() const noexcept { return n_source(0) + n_source(1); }
    std::uint64_t n_source(std::size_t i) const noexcept {
        return counts[i][0] + counts[i][1] + counts[i][2] + counts[i][3];
    }
    std::uint64_t joint(std::size_t k) const noexcept { return counts[0][k] + counts[1][k]; }
    /// Marginal count of "up" at wing 1 or 2, optionally within one source event.
    std::uint64_t up(int wing, int source = -1) const noexcept {
        std::uint64_t c = 0;
        for (std::size_t i = 0; i < 2; ++i) {
            if (source >= 0 && static_cast<std::size_t>(source) != i) continue;
            c += wing == 1 ? counts[i][0] + counts[i][1] : counts[i][0] + counts[i][2];
        }
        return c;
    }
    std::uint64_t anticorrelated() const noexcept { return joint(1) + joint(2); }

    friend bool operator==(const SettingCounts&, const SettingCounts&) = default;
};

/// Counts per setting pair, kept sorted by (mu, nu). Merging adds counts.
class RunStats {
public:
    void add(const Setting& s, std::size_t source, Spin o1, Spin o2, std::uint64_t k = 1) {
        BELLSIM_REQUIRE(source < 2, PreconditionError, "source event index must be 0 or 1");
        slot(s).counts[source][outcome_index(o1, o2)] += k;
    }

    void add(const SettingCounts& c) {
        auto& dst = slot(Setting::of(c.mu_deg, c.nu_deg));
        for (std::size_t i = 0; i < 2; ++i)
            for (std::size_t k = 0; k < 4; ++k) dst.counts[i][k] += c.counts[i][k];
    }

    const std::vector<SettingCounts>& entries() const noexcept { return entries_; }

    const SettingCounts* find(double mu_deg, double nu_deg) const {
        const Setting s = Setting::of(mu_deg, nu_deg);
        for (const auto& e : entries_)
            if (same_deg(e.mu_deg, s.mu_deg) && same_deg(e.nu_deg, s.nu_deg)) return &e;
        return nullptr;
    }

    const SettingCounts& require(double mu_deg, double nu_deg) const {
        const auto* e = find(mu_deg, nu_deg);
        BELLSIM_REQUIRE(e, PreconditionError, "setting " + setting_label(mu_deg, nu_deg) + " was not sampled");
        return *e;
    }

    std::uint64_t total() const noexcept {
        std::uint64_t n = 0;
        for (const auto& e : entries_) n += e.n();
        return n;
    }

    friend RunStats merge(const RunStats& a, const RunStats& b) {
        RunStats r = a;
        for (const auto& e : b.entries_) r.add(e);
        return r;
    }

    friend bool operator==(const RunStats&, const RunStats&) = default;

private:
    SettingCounts& slot(const Setting& raw) {
        const Setting s = Setting::of(raw.mu_deg, raw.nu_deg);
        auto less = [](const SettingCounts& e, const Setting& k) {
            if (!same_deg(e.mu_deg, k.mu_deg)) return e.mu_deg < k.mu_deg;
            return !same_deg(e.nu_deg, k.nu_deg) && e.nu_deg < k.nu_deg;
        };
        auto it = std::lower_bound(entries_.begin(), entries_.end(), s, less);
        if (it != entries_.end() && same_deg(it->mu_deg, s.mu_deg) && same_deg(it->nu_deg, s.nu_deg)) return *it;
        SettingCounts c;
        c.mu_deg = s.mu_deg;
        c.nu_deg = s.nu_deg;
        return *entries_.insert(it, c);
    }

    std::vector<SettingCounts> entries_;
};

struct Estimate {
    double value = 0.0;
    double std_error = 0.0;
    std::uint64_t n = 0;
};

inline constexpr std::uint64_t kMinCounts = 100;

/// E = P(same) - P(opposite) with binomial standard error sqrt((1 - E^2) / n).
inline Estimate estimate_correlation(const RunStats& stats, double mu_deg, double nu_deg) {
    const auto& c = stats.require(mu_deg, nu_deg);
    const std::uint64_t n = c.n();
    BELLSIM_REQUIRE(n >= kMinCounts, PreconditionError,
                    "setting " + setting_label(mu_deg, nu_deg) + " has only " + std::to_string(n) +
                        " counts; at least 100 are needed");
    const double same = static_cast<double>(c.joint(0) + c.joint(3));
    const double opp = static_cast<double>(c.joint(1) + c.joint(2));
    const double e = (same - opp) / static_cast<double>(n);
    return {e, std::sqrt(std::max(0.0, 1.0 - e * e) / static_cast<double>(n)), n};
}

/// |E(mu,nu) + E(mu,nu') + E(mu',nu) - E(mu',nu')| with the four errors added in quadrature.
inline Estimate chsh_estimate(const RunStats& stats, double mu, double mu_p, double nu, double nu_p) {
    const auto a = estimate_correlation(stats, mu, nu);
    const auto b = estimate_correlation(stats, mu, nu_p);
    const auto c = estimate_correlation(stats, mu_p, nu);
    const auto d = estimate_correlation(stats, mu_p, nu_p);
    const double se = std::sqrt(a.std_error * a.std_error + b.std_error * b.std_error + c.std_error * c.std_error +
                                d.std_error * d.std_error);
    return {std::abs(a.value + b.value + c.value - d.value), se, std::min({a.n, b.n, c.n, d.n})};
}

/// Two proportions compared: pass iff equal or |difference| < 4 standard errors.
struct ShiftComparison {
    int wing = 1;             // wing whose marginal is compared
    double local_deg = 0.0;   // its own setting
    double remote_a = 0.0, remote_b = 0.0;
    double shift = 0.0;
    double std_error = 0.0;
    bool pass = true;
};

inline ShiftComparison compare_proportions(std::uint64_t k1, std::uint64_t n1, std::uint64_t k2, std::uint64_t n2) {
    ShiftComparison c;
    const double p1 = static_cast<double>(k1) / static_cast<double>(n1);
    const double p2 = static_cast<double>(k2) / static_cast<double>(n2);
    c.shift = std::abs(p1 - p2);
    c.std_error = std::sqrt(p1 * (1 - p1) / static_cast<double>(n1) + p2 * (1 - p2) / static_cast<double>(n2));
    c.pass = c.shift == 0.0 || c.shift < 4.0 * c.std_error;
    return c;
}

struct NoSignalingReport {
    double max_marginal_shift = 0.0;
    bool pass = true;
    std::vector<ShiftComparison> comparisons;
};

/// Compares each wing's "up" frequency at a fixed local setting across every
/// pair of remote settings.
inline NoSignalingReport no_signaling_test(const RunStats& stats) {
    NoSignalingReport r;
    const auto& es = stats.entries();
    for (int wing : {1, 2})
        for (std::size_t i = 0; i < es.size(); ++i)
            for (std::size_t j = i + 1; j < es.size(); ++j) {
                const auto& a = es[i];
                const auto& b = es[j];
                const double la = wing == 1 ? a.mu_deg : a.nu_deg, lb = wing == 1 ? b.mu_deg : b.nu_deg;
                const double ra = wing == 1 ? a.nu_deg : a.mu_deg, rb = wing == 1 ? b.nu_deg : b.mu_deg;
                if (!same_deg(la, lb) || same_deg(ra, rb) || a.n() == 0 || b.n() == 0) continue;
                auto c = compare_proportions(a.up(wing), a.n(), b.up(wing), b.n());
                c.wing = wing;
                c.local_deg = la;
                c.remote_a = ra;
                c.remote_b = rb;
                r.max_marginal_shift = std::max(r.max_marginal_shift, c.shift);
                r.pass = r.pass && c.pass;
                r.comparisons.push_back(c);
            }
    BELLSIM_REQUIRE(!r.comparisons.empty(), PreconditionError,
                    "no-signaling test needs a local setting sampled with at least two remote settings");
    return r;
}

struct FactorizationCell {
    double mu_deg = 0.0, nu_deg = 0.0;
    std::size_t source = 0;
    Spin out1 = Spin::Up, out2 = Spin::Up;
    double joint = 0.0, product = 0.0, gap = 0.0, std_error = 0.0;
};

struct FactorizationReport {
    double max_gap = 0.0;
    FactorizationCell worst;
    bool pass = true;  // every gap within 4 standard errors of zero
    std::vector<FactorizationCell> cells;
};

/// Per source event and setting: |P(o1 and o2 | S) - P(o1 | S) P(o2 | S)|.
/// The standard error is the binomial error of the joint frequency.
inline FactorizationReport passive_factorization_test(const RunStats& stats) {
    BELLSIM_REQUIRE(stats.total() > 0, PreconditionError, "factorization test needs recorded outcomes");
    FactorizationReport r;
    for (const auto& e : stats.entries())
        for (std::size_t i = 0; i < 2; ++i) {
            const std::uint64_t n = e.n_source(i);
            if (n == 0) continue;
            const double dn = static_cast<double>(n);
            const double p1 = static_cast<double>(e.counts[i][0] + e.counts[i][1]) / dn;
            const double p2 = static_cast<double>(e.counts[i][0] + e.counts[i][2]) / dn;
            for (Spin o1 : {Spin::Up, Spin::Down})
                for (Spin o2 : {Spin::Up, Spin::Down}) {
                    FactorizationCell c;
                    c.mu_deg = e.mu_deg;
                    c.nu_deg = e.nu_deg;
                    c.source = i;
                    c.out1 = o1;
                    c.out2 = o2;
                    c.joint = static_cast<double>(e.counts[i][outcome_index(o1, o2)]) / dn;
                    c.product = (o1 == Spin::Up ? p1 : 1 - p1) * (o2 == Spin::Up ? p2 : 1 - p2);
                    c.gap = std::abs(c.joint - c.product);
                    c.std_error = std::sqrt(c.joint * (1 - c.joint) / dn);
                    if (!(c.gap == 0.0 || c.gap < 4.0 * c.std_error)) r.pass = false;
                    if (r.cells.empty() || c.gap > r.max_gap) {
                        r.max_gap = c.gap;
                        r.worst = c;
                    }
                    r.cells.push_back(c);
                }
        }
    return r;
}

/// P(S1) compared across all settings.
inline NoSignalingReport source_balance_test(const RunStats& stats) {
    NoSignalingReport r;
    const auto& es = stats.entries();
    for (std::size_t i = 0; i < es.size(); ++i)
        for (std::size_t j = i + 1; j < es.size(); ++j) {
            if (es[i].n() == 0 || es[j].n() == 0) continue;
            auto c = compare_proportions(es[i].n_source(0), es[i].n(), es[j].n_source(0), es[j].n());
            c.wing = 0;
            r.max_marginal_shift = std::max(r.max_marginal_shift, c.shift);
            r.pass = r.pass && c.pass;
            r.comparisons.push_back(c);
        }
    return r;
}

}  // namespace bellsim::epr
