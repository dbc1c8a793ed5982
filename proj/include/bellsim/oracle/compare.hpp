#pragma once

// Ensemble histogram vs |psi|^2. The wave-function density is taken as
// piecewise constant on the grid cells, so its CDF is piecewise linear.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "bellsim/core/csv.hpp"
#include "bellsim/core/error.hpp"
#include "bellsim/oracle/wavefunction.hpp"

namespace bellsim::oracle {

/// Density histogram on equal bins [x_min + k w, x_min + (k+1) w).
struct BinnedDensity {
    double x_min = 0.0;
    double width = 1.0;
    std::vector<double> rho;

    double x_max() const noexcept { return x_min + width * static_cast<double>(rho.size()); }
    double edge(std::size_t k) const noexcept { return x_min + width * static_cast<double>(k); }
    double mass() const noexcept {
        double s = 0.0;
        for (double r : rho) s += r * width;
        return s;
    }
};

/// Histogram of sample positions, normalized by the total sample count.
/// Samples outside [x_min, x_max) count towards the total but fall in no bin.
inline BinnedDensity histogram(const std::vector<double>& x, double x_min, double x_max, std::size_t bins) {
    BELLSIM_REQUIRE(bins >= 1 && x_max > x_min, PreconditionError, "histogram needs x_min < x_max and bins >= 1");
    BELLSIM_REQUIRE(!x.empty(), PreconditionError, "histogram needs samples");
    BinnedDensity h{x_min, (x_max - x_min) / static_cast<double>(bins), std::vector<double>(bins, 0.0)};
    for (double v : x) {
        if (!(v >= x_min && v < x_max)) continue;
        const auto k = std::min(bins - 1, static_cast<std::size_t>((v - x_min) / h.width));
        h.rho[k] += 1.0;
    }
    const double norm = 1.0 / (static_cast<double>(x.size()) * h.width);
    for (double& r : h.rho) r *= norm;
    return h;
}

namespace detail {

/// CDF of the normalized cell density of w at position x.
class WaveCdf {
public:
    explicit WaveCdf(const WaveFunction& w) : g_(w.grid), cum_(w.size() + 1, 0.0) {
        const double n2 = w.norm2();
        BELLSIM_REQUIRE(n2 > 0.0, NumericalError, "zero wave function");
        for (std::size_t i = 0; i < w.size(); ++i) cum_[i + 1] = cum_[i] + std::norm(w.psi[i]) * g_.dx() / n2;
    }

    double operator()(double x) const noexcept {
        const double dx = g_.dx();
        const double s = (x - (g_.x_min - 0.5 * dx)) / dx;  // cell coordinate
        if (s <= 0.0) return 0.0;
        if (s >= static_cast<double>(g_.n)) return 1.0;
        const auto i = static_cast<std::size_t>(s);
        return cum_[i] + (s - static_cast<double>(i)) * (cum_[i + 1] - cum_[i]);
    }

private:
    Grid1D g_;
    std::vector<double> cum_;
};

}  // namespace detail

/// |psi|^2 averaged over the bins of `like`.
inline BinnedDensity bin_density(const WaveFunction& w, const BinnedDensity& like) {
    const detail::WaveCdf F(w);
    BinnedDensity out{like.x_min, like.width, std::vector<double>(like.rho.size())};
    for (std::size_t k = 0; k < out.rho.size(); ++k) out.rho[k] = (F(out.edge(k + 1)) - F(out.edge(k))) / out.width;
    return out;
}

struct DensityComparison {
    double l1_distance = 0.0;  // integral |rho_ens - |psi|^2| over the bins, in [0, 2]
    double ks_distance = 0.0;  // max CDF difference at bin edges, in [0, 1]
};

/// Compares an ensemble histogram with |psi|^2. The histogram must lie
/// inside the grid and carry unit mass within 1e-6.
inline DensityComparison compare_density(const BinnedDensity& ens, const WaveFunction& w) {
    BELLSIM_REQUIRE(!ens.rho.empty() && ens.width > 0.0, PreconditionError, "empty ensemble histogram");
    const double dx = w.grid.dx();
    BELLSIM_REQUIRE(ens.x_min >= w.grid.x_min - 0.5 * dx - 1e-12 && ens.x_max() <= w.grid.x_max + 0.5 * dx + 1e-12,
                    PreconditionError, "histogram extends beyond the wave-function grid");
    BELLSIM_REQUIRE(std::abs(ens.mass() - 1.0) <= 1e-6, PreconditionError,
                    "ensemble density is not normalized on the histogram support");
    const auto ref = bin_density(w, ens);
    const detail::WaveCdf F(w);
    DensityComparison c;
    double cum = 0.0;
    c.ks_distance = std::abs(F(ens.x_min));
    for (std::size_t k = 0; k < ens.rho.size(); ++k) {
        c.l1_distance += std::abs(ens.rho[k] - ref.rho[k]) * ens.width;
        cum += ens.rho[k] * ens.width;
        c.ks_distance = std::max(c.ks_distance, std::abs(cum - F(ens.edge(k + 1))));
    }
    // Mass of |psi|^2 outside the histogram counts fully towards L1.
    c.l1_distance += F(ens.x_min) + (1.0 - F(ens.x_max()));
    c.l1_distance = std::min(c.l1_distance, 2.0);
    c.ks_distance = std::min(c.ks_distance, 1.0);
    return c;
}

/// Rows x_center, rho_ensemble, rho_oracle.
inline csv::Table density_table(const BinnedDensity& ens, const WaveFunction& w) {
    const auto ref = bin_density(w, ens);
    csv::Table t({"x_center", "rho_ensemble", "rho_oracle"});
    for (std::size_t k = 0; k < ens.rho.size(); ++k) t.add_row({ens.edge(k) + 0.5 * ens.width, ens.rho[k], ref.rho[k]});
    return t;
}

}  // namespace bellsim::oracle
