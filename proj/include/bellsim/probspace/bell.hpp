#pragma once

// Correlation coefficient, the CHSH and original Bell combinations, and the
// exhaustive bound scan over conditional outcome probabilities.

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bellsim/core/error.hpp"
#include "bellsim/probspace/setting_model.hpp"

namespace bellsim::probspace {

/// E = P(up,up) + P(down,down) - P(up,down) - P(down,up).
inline double correlation_from_joint(const std::array<double, 4>& p) noexcept { return p[0] + p[3] - p[1] - p[2]; }

inline double correlation_coefficient(const SettingIndexedModel& model, const SettingPair& s) {
    return correlation_from_joint(model.joint(model.require(s)));
}

/// |E(mu,nu) + E(mu,nu') + E(mu',nu) - E(mu',nu')|, angles in radians.
inline double chsh(const SettingIndexedModel& model, double mu, double mu_p, double nu, double nu_p) {
    const auto e = [&](double a, double b) { return correlation_coefficient(model, SettingPair::radians(a, b)); };
    return std::abs(e(mu, nu) + e(mu, nu_p) + e(mu_p, nu) - e(mu_p, nu_p));
}

/// |E(mu,nu) - E(mu,nu')| - E(nu,nu'), angles in radians.
inline double bell_original(const SettingIndexedModel& model, double mu, double nu, double nu_p) {
    const auto e = [&](double a, double b) { return correlation_coefficient(model, SettingPair::radians(a, b)); };
    return std::abs(e(mu, nu) - e(mu, nu_p)) - e(nu, nu_p);
}

/// Conditional correlation given a source cell for factorized wing
/// probabilities p_mu, p_nu:
///   p_mu (1 - p_nu) + (1 - p_mu) p_nu - p_mu p_nu - (1 - p_mu)(1 - p_nu).
constexpr double conditional_correlation(double p_mu, double p_nu) noexcept {
    return p_mu * (1.0 - p_nu) + (1.0 - p_mu) * p_nu - p_mu * p_nu - (1.0 - p_mu) * (1.0 - p_nu);
}

constexpr double conditional_chsh(double p_mu, double p_mu_p, double p_nu, double p_nu_p) noexcept {
    const double s = conditional_correlation(p_mu, p_nu) + conditional_correlation(p_mu, p_nu_p) +
                     conditional_correlation(p_mu_p, p_nu) - conditional_correlation(p_mu_p, p_nu_p);
    return s < 0.0 ? -s : s;
}

struct ChshScanResult {
    double max_value = 0.0;
    std::array<double, 4> argmax{};  // (P_mu, P_mu', P_nu, P_nu')
    std::size_t points = 0;
};

/// Grid {0, h, 2h, ..., 1} in each of the four conditional probabilities.
inline std::vector<double> probability_grid(double step) {
    BELLSIM_REQUIRE(step > 0.0 && step <= 0.5, PreconditionError, "grid step must lie in (0, 0.5]");
    std::vector<double> g;
    const auto n = static_cast<std::size_t>(std::floor(1.0 / step + 1e-9));
    for (std::size_t k = 0; k <= n; ++k) g.push_back(std::min(1.0, static_cast<double>(k) * step));
    if (g.back() < 1.0) g.push_back(1.0);
    return g;
}

inline ChshScanResult conditional_chsh_bound_scan(double grid_step) {
    const auto g = probability_grid(grid_step);
    ChshScanResult r;
    r.max_value = -1.0;
    for (double a : g)
        for (double ap : g)
            for (double b : g)
                for (double bp : g) {
                    ++r.points;
                    const double v = conditional_chsh(a, ap, b, bp);
                    if (v > r.max_value) {
                        r.max_value = v;
                        r.argmax = {a, ap, b, bp};
                    }
                }
    return r;
}

}  // namespace bellsim::probspace
