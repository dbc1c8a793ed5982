#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "bellsim/core/error.hpp"
#include "bellsim/core/labels.hpp"
#include "bellsim/spin/matrix.hpp"
#include "bellsim/spin/spinor.hpp"

namespace bellsim::spin {

/// Normalized four-component state over {|++>, |+->, |-+>, |-->}.
class TwoSpinorState {
public:
    static TwoSpinorState singlet() noexcept {
        const double h = 1.0 / std::numbers::sqrt2;
        return TwoSpinorState({0.0, h, -h, 0.0});
    }

    static TwoSpinorState product(const Spinor& a, const Spinor& b) noexcept {
        return TwoSpinorState({a.plus() * b.plus(), a.plus() * b.minus(), a.minus() * b.plus(), a.minus() * b.minus()});
    }

    static TwoSpinorState normalized(const std::array<cplx, 4>& amp) {
        double n2 = 0.0;
        for (const auto& c : amp) n2 += std::norm(c);
        BELLSIM_REQUIRE(n2 > 0.0 && std::isfinite(n2), PreconditionError, "two-spinor amplitudes must be finite and nonzero");
        const double n = std::sqrt(n2);
        std::array<cplx, 4> out{};
        for (std::size_t i = 0; i < 4; ++i) out[i] = amp[i] / n;
        return TwoSpinorState(out);
    }

    const std::array<cplx, 4>& amplitudes() const noexcept { return amp_; }

    double norm() const noexcept {
        double n2 = 0.0;
        for (const auto& c : amp_) n2 += std::norm(c);
        return std::sqrt(n2);
    }

    /// <state| m |state>
    cplx expectation(const Mat4& m) const noexcept {
        cplx acc = 0.0;
        for (std::size_t r = 0; r < 4; ++r) {
            cplx row = 0.0;
            for (std::size_t c = 0; c < 4; ++c) row += m(r, c) * amp_[c];
            acc += std::conj(amp_[r]) * row;
        }
        return acc;
    }

private:
    explicit TwoSpinorState(std::array<cplx, 4> amp) noexcept : amp_(amp) {}
    std::array<cplx, 4> amp_;
};

/// Projector onto the +/- eigenspace of a.sigma: (I +- a.sigma) / 2.
inline Mat2 projector(const Axis& a, Spin s) noexcept {
    const double sgn = sign(s);
    return 0.5 * (Mat2::identity() + sgn * field_matrix(a.vec()));
}

/// <singlet| (mu.sigma) x (nu.sigma) |singlet>, evaluated as a full 4x4 expectation.
inline double singlet_correlation(const Axis& mu, const Axis& nu) noexcept {
    const Mat4 op = kron(field_matrix(mu.vec()), field_matrix(nu.vec()));
    return TwoSpinorState::singlet().expectation(op).real();
}

/// Joint outcome probabilities on the singlet, order (up,up), (up,down), (down,up), (down,down).
inline std::array<double, 4> quantum_joint_probs(const Axis& mu, const Axis& nu) noexcept {
    const auto psi = TwoSpinorState::singlet();
    std::array<double, 4> p{};
    std::size_t k = 0;
    for (Spin s1 : {Spin::Up, Spin::Down})
        for (Spin s2 : {Spin::Up, Spin::Down}) p[k++] = psi.expectation(kron(projector(mu, s1), projector(nu, s2))).real();
    return p;
}

}  // namespace bellsim::spin
