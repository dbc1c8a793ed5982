#pragma once

// Complex wave functions on a uniform 1-D grid with hard walls at both ends.
// Grid point i owns the cell [x_i - dx/2, x_i + dx/2]; integrals are sums
// times dx.

#include <cmath>
#include <complex>
#include <cstddef>
#include <functional>
#include <numbers>
#include <vector>

#include "bellsim/core/csv.hpp"
#include "bellsim/core/error.hpp"

namespace bellsim::oracle {

using cplx = std::complex<double>;

struct Grid1D {
    double x_min = -20.0;
    double x_max = 20.0;
    std::size_t n = 2001;

    double dx() const noexcept { return (x_max - x_min) / static_cast<double>(n - 1); }
    double x(std::size_t i) const noexcept { return x_min + static_cast<double>(i) * dx(); }

    void validate() const {
        BELLSIM_REQUIRE(n >= 16, PreconditionError, "grid needs at least 16 points");
        BELLSIM_REQUIRE(std::isfinite(x_min) && std::isfinite(x_max) && x_max > x_min, PreconditionError,
                        "grid needs finite x_min < x_max");
    }

    friend bool operator==(const Grid1D&, const Grid1D&) = default;
};

struct WaveFunction {
    Grid1D grid;
    std::vector<cplx> psi;

    WaveFunction() = default;
    WaveFunction(const Grid1D& g, std::vector<cplx> values) : grid(g), psi(std::move(values)) {
        grid.validate();
        BELLSIM_REQUIRE(psi.size() == grid.n, PreconditionError, "one amplitude per grid point is required");
    }

    std::size_t size() const noexcept { return psi.size(); }

    double norm2() const noexcept {
        double s = 0.0;
        for (const auto& c : psi) s += std::norm(c);
        return s * grid.dx();
    }

    void normalize() {
        const double n2 = norm2();
        BELLSIM_REQUIRE(n2 > 0.0 && std::isfinite(n2), NumericalError, "cannot normalize a zero wave function");
        const double f = 1.0 / std::sqrt(n2);
        for (auto& c : psi) c *= f;
    }

    std::vector<double> density() const {
        std::vector<double> r(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) r[i] = std::norm(psi[i]);
        return r;
    }

    WaveFunction conjugate() const {
        WaveFunction w = *this;
        for (auto& c : w.psi) c = std::conj(c);
        return w;
    }

    double mean_x() const noexcept {
        double s = 0.0, w = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            s += grid.x(i) * std::norm(psi[i]);
            w += std::norm(psi[i]);
        }
        return s / w;
    }

    double variance_x() const noexcept {
        const double m = mean_x();
        double s = 0.0, w = 0.0;
        for (std::size_t i = 0; i < psi.size(); ++i) {
            const double d = grid.x(i) - m;
            s += d * d * std::norm(psi[i]);
            w += std::norm(psi[i]);
        }
        return s / w;
    }

    /// <p>/m0 with the centered-difference momentum operator.
    double mean_velocity(double hbar, double m0) const noexcept {
        double s = 0.0;
        for (std::size_t i = 1; i + 1 < psi.size(); ++i) s += std::imag(std::conj(psi[i]) * (psi[i + 1] - psi[i - 1]));
        return hbar / m0 * s / 2.0 / norm2();
    }
};

/// Normalized Gaussian packet exp(-(x-x0)^2 / (4 sigma0^2) + i k0 x); walls are forced to zero.
inline WaveFunction gaussian_packet(const Grid1D& g, double sigma0, double x0 = 0.0, double k0 = 0.0) {
    g.validate();
    BELLSIM_REQUIRE(sigma0 > 0.0, PreconditionError, "packet width must be positive");
    std::vector<cplx> v(g.n);
    for (std::size_t i = 1; i + 1 < g.n; ++i) {
        const double d = g.x(i) - x0;
        v[i] = std::exp(-d * d / (4.0 * sigma0 * sigma0)) * std::polar(1.0, k0 * g.x(i));
    }
    WaveFunction w(g, std::move(v));
    w.normalize();
    return w;
}

using Potential = std::vector<double>;

inline Potential sample_potential(const Grid1D& g, const std::function<double(double)>& v) {
    Potential out(g.n);
    for (std::size_t i = 0; i < g.n; ++i) out[i] = v(g.x(i));
    return out;
}

inline Potential zero_potential(const Grid1D& g) { return Potential(g.n, 0.0); }

/// V(x) = -f x, a constant force f.
inline Potential linear_potential(const Grid1D& g, double f) {
    return sample_potential(g, [f](double x) { return -f * x; });
}

inline Potential harmonic_potential(const Grid1D& g, double m0, double omega, double x_center = 0.0) {
    return sample_potential(g, [=](double x) { return 0.5 * m0 * omega * omega * (x - x_center) * (x - x_center); });
}

/// Rows x, re, im, abs2.
inline csv::Table snapshot_table(const WaveFunction& w) {
    csv::Table t({"x", "re", "im", "abs2"});
    for (std::size_t i = 0; i < w.size(); ++i)
        t.add_row({w.grid.x(i), w.psi[i].real(), w.psi[i].imag(), std::norm(w.psi[i])});
    return t;
}

}  // namespace bellsim::oracle
