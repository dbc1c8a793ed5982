#pragma once

// Single-particle spin algebra: Euler-angle SU(2) rotations, field matrices,
// Stern-Gerlach amplitude transforms and spin operators.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numbers>
#include <utility>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/core/vec3.hpp"
#include "bellsim/spin/matrix.hpp"

namespace bellsim::spin {

/// Magnitude of the spin angular momentum, s = hbar / 2.
constexpr double spin_magnitude(double hbar = 1.0) noexcept { return 0.5 * hbar; }

inline constexpr double kNormTolerance = 1e-12;

/// Normalized two-component amplitude vector over {|+>, |->}.
class Spinor {
public:
    static Spinor up() noexcept { return Spinor({1.0, 0.0}); }
    static Spinor down() noexcept { return Spinor({0.0, 1.0}); }
    static Spinor of(Spin s) noexcept { return s == Spin::Up ? up() : down(); }

    /// Normalizes the given amplitudes; a zero vector is rejected.
    static Spinor normalized(cplx plus, cplx minus) {
        const double n = std::sqrt(std::norm(plus) + std::norm(minus));
        BELLSIM_REQUIRE(n > 0.0 && std::isfinite(n), PreconditionError, "spinor amplitudes must be finite and nonzero");
        return Spinor({plus / n, minus / n});
    }

    const cplx& plus() const noexcept { return amp_[0]; }
    const cplx& minus() const noexcept { return amp_[1]; }
    const std::array<cplx, 2>& amplitudes() const noexcept { return amp_; }

    double norm() const noexcept { return std::sqrt(std::norm(amp_[0]) + std::norm(amp_[1])); }
    double prob_up() const noexcept { return std::norm(amp_[0]); }
    double prob_down() const noexcept { return std::norm(amp_[1]); }

    /// Applies a unitary matrix. The result is not renormalized.
    Spinor apply(const Mat2& u) const noexcept {
        return Spinor({u(0, 0) * amp_[0] + u(0, 1) * amp_[1], u(1, 0) * amp_[0] + u(1, 1) * amp_[1]});
    }

private:
    explicit Spinor(std::array<cplx, 2> amp) noexcept : amp_(amp) {}
    std::array<cplx, 2> amp_;
};

/// Measurement axis (cos(phi) sin(theta), sin(phi) sin(theta), cos(theta)).
struct Axis {
    double theta = 0.0;  // polar, [0, pi]
    double phi = 0.0;    // azimuth, [0, 2 pi)

    static Axis from_angles(double theta, double phi) {
        BELLSIM_REQUIRE(std::isfinite(theta) && std::isfinite(phi), PreconditionError, "axis angles must be finite");
        BELLSIM_REQUIRE(theta >= 0.0 && theta <= std::numbers::pi, PreconditionError, "axis polar angle outside [0, pi]");
        double p = std::fmod(phi, 2.0 * std::numbers::pi);
        if (p < 0.0) p += 2.0 * std::numbers::pi;
        return {theta, p};
    }

    static Axis from_vector(const Vec3& v) {
        const double n = bellsim::norm(v);
        BELLSIM_REQUIRE(n > 0.0, PreconditionError, "axis vector must be nonzero");
        const double c = std::clamp(v.z / n, -1.0, 1.0);
        return from_angles(std::acos(c), std::atan2(v.y, v.x));
    }

    /// Detector axis rotated by `alpha` in the y-z plane perpendicular to the
    /// x flight direction; alpha = 0 is +z.
    static Axis planar(double alpha) {
        double a = std::fmod(alpha, 2.0 * std::numbers::pi);
        if (a < 0.0) a += 2.0 * std::numbers::pi;
        if (a <= std::numbers::pi) return from_angles(a, 0.5 * std::numbers::pi);
        return from_angles(2.0 * std::numbers::pi - a, 1.5 * std::numbers::pi);
    }

    Vec3 vec() const noexcept {
        return {std::cos(phi) * std::sin(theta), std::sin(phi) * std::sin(theta), std::cos(theta)};
    }
};

/// Euler-angle SU(2) matrix
///   [ e^{i(psi+phi)/2} cos(theta/2)     i e^{i(psi-phi)/2} sin(theta/2) ]
///   [ i e^{-i(psi-phi)/2} sin(theta/2)  e^{-i(psi+phi)/2} cos(theta/2)  ]
inline Mat2 rotation_matrix(double psi, double phi, double theta) noexcept {
    const cplx i(0.0, 1.0);
    const double c = std::cos(0.5 * theta);
    const double s = std::sin(0.5 * theta);
    return make_mat2(std::exp(0.5 * i * (psi + phi)) * c, i * std::exp(0.5 * i * (psi - phi)) * s,
                     i * std::exp(-0.5 * i * (psi - phi)) * s, std::exp(-0.5 * i * (psi + phi)) * c);
}

/// B.sigma for a field vector B.
inline Mat2 field_matrix(const Vec3& b) noexcept {
    return make_mat2(b.z, cplx(b.x, -b.y), cplx(b.x, b.y), -b.z);
}

/// Real 3x3 rotation R with Q (B.sigma) Q^+ = (R B).sigma, from R_ij = tr(sigma_i Q sigma_j Q^+) / 2.
inline std::array<std::array<double, 3>, 3> adjoint_rotation(const Mat2& q) noexcept {
    const std::array<Mat2, 3> sigma{pauli_x(), pauli_y(), pauli_z()};
    const Mat2 qa = q.adjoint();
    std::array<std::array<double, 3>, 3> r{};
    for (std::size_t i = 0; i < 3; ++i)
        for (std::size_t j = 0; j < 3; ++j) r[i][j] = 0.5 * (sigma[i] * q * sigma[j] * qa).trace().real();
    return r;
}

/// Apply Q^+ for general Euler angles.
inline Spinor transform_spinor(const Spinor& s, double psi, double phi, double theta) noexcept {
    return s.apply(rotation_matrix(psi, phi, theta).adjoint());
}

/// Spinor seen by a Stern-Gerlach magnet whose axis has polar angle theta and
/// in-plane angle varphi: Q^+ with psi = -pi/2 and phi = varphi + pi/2.
inline Spinor transform_spinor(const Spinor& s, double theta, double varphi) noexcept {
    return transform_spinor(s, -0.5 * std::numbers::pi, varphi + 0.5 * std::numbers::pi, theta);
}

/// Outcome probabilities (p_up, p_down) for a spin prepared along +z (or -z)
/// and measured along an axis at polar angle theta. The pair sums to exactly 1.
inline std::pair<double, double> measurement_probs(Spin source, double theta) {
    BELLSIM_REQUIRE(std::isfinite(theta), PreconditionError, "measurement angle must be finite");
    const double c = std::cos(0.5 * theta);
    const double aligned = c * c;
    if (source == Spin::Up) return {aligned, 1.0 - aligned};
    return {1.0 - aligned, aligned};
}

/// (hbar/2) a.sigma
inline Mat2 spin_operator(const Axis& a, double hbar = 1.0) noexcept {
    return spin_magnitude(hbar) * field_matrix(a.vec());
}

}  // namespace bellsim::spin
