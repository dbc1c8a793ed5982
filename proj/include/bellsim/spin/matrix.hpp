#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <ostream>

namespace bellsim::spin {

using cplx = std::complex<double>;

/// Dense N x N complex matrix, row-major.
template <std::size_t N>
struct SquareMatrix {
    std::array<cplx, N * N> a{};

    static constexpr std::size_t dim = N;

    constexpr cplx& operator()(std::size_t r, std::size_t c) noexcept { return a[r * N + c]; }
    constexpr const cplx& operator()(std::size_t r, std::size_t c) const noexcept { return a[r * N + c]; }

    static SquareMatrix identity() noexcept {
        SquareMatrix m;
        for (std::size_t i = 0; i < N; ++i) m(i, i) = 1.0;
        return m;
    }

    SquareMatrix adjoint() const noexcept {
        SquareMatrix m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t c = 0; c < N; ++c) m(c, r) = std::conj((*this)(r, c));
        return m;
    }

    cplx trace() const noexcept {
        cplx t = 0.0;
        for (std::size_t i = 0; i < N; ++i) t += (*this)(i, i);
        return t;
    }

    friend SquareMatrix operator*(const SquareMatrix& x, const SquareMatrix& y) noexcept {
        SquareMatrix m;
        for (std::size_t r = 0; r < N; ++r)
            for (std::size_t k = 0; k < N; ++k) {
                const cplx xr = x(r, k);
                for (std::size_t c = 0; c < N; ++c) m(r, c) += xr * y(k, c);
            }
        return m;
    }
    friend SquareMatrix operator+(SquareMatrix x, const SquareMatrix& y) noexcept {
        for (std::size_t i = 0; i < N * N; ++i) x.a[i] += y.a[i];
        return x;
    }
    friend SquareMatrix operator-(SquareMatrix x, const SquareMatrix& y) noexcept {
        for (std::size_t i = 0; i < N * N; ++i) x.a[i] -= y.a[i];
        return x;
    }
    friend SquareMatrix operator*(cplx s, SquareMatrix x) noexcept {
        for (auto& v : x.a) v *= s;
        return x;
    }
    friend SquareMatrix operator*(double s, SquareMatrix x) noexcept {
        for (auto& v : x.a) v *= s;
        return x;
    }

    friend std::ostream& operator<<(std::ostream& os, const SquareMatrix& m) {
        for (std::size_t r = 0; r < N; ++r) {
            os << (r == 0 ? "[" : " ");
            for (std::size_t c = 0; c < N; ++c) os << (c ? ", " : "") << m(r, c);
            os << (r + 1 == N ? "]" : "\n");
        }
        return os;
    }
};

using Mat2 = SquareMatrix<2>;
using Mat4 = SquareMatrix<4>;

template <std::size_t N>
double max_abs_diff(const SquareMatrix<N>& x, const SquareMatrix<N>& y) noexcept {
    double d = 0.0;
    for (std::size_t i = 0; i < N * N; ++i) d = std::max(d, std::abs(x.a[i] - y.a[i]));
    return d;
}

template <std::size_t N>
bool is_unitary(const SquareMatrix<N>& m, double tol = 1e-12) noexcept {
    return max_abs_diff(m * m.adjoint(), SquareMatrix<N>::identity()) <= tol;
}

template <std::size_t N>
bool is_hermitian(const SquareMatrix<N>& m, double tol = 1e-12) noexcept {
    return max_abs_diff(m, m.adjoint()) <= tol;
}

inline Mat2 make_mat2(cplx a, cplx b, cplx c, cplx d) noexcept {
    Mat2 m;
    m(0, 0) = a;
    m(0, 1) = b;
    m(1, 0) = c;
    m(1, 1) = d;
    return m;
}

inline Mat2 pauli_x() noexcept { return make_mat2(0.0, 1.0, 1.0, 0.0); }
inline Mat2 pauli_y() noexcept { return make_mat2(0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0); }
inline Mat2 pauli_z() noexcept { return make_mat2(1.0, 0.0, 0.0, -1.0); }

inline cplx determinant(const Mat2& m) noexcept { return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0); }

/// Kronecker product; basis order |++>, |+->, |-+>, |-->.
inline Mat4 kron(const Mat2& x, const Mat2& y) noexcept {
    Mat4 m;
    for (std::size_t r1 = 0; r1 < 2; ++r1)
        for (std::size_t c1 = 0; c1 < 2; ++c1)
            for (std::size_t r2 = 0; r2 < 2; ++r2)
                for (std::size_t c2 = 0; c2 < 2; ++c2) m(2 * r1 + r2, 2 * c1 + c2) = x(r1, c1) * y(r2, c2);
    return m;
}

/// Eigenvalues (ascending) of a 2x2 Hermitian matrix.
inline std::array<double, 2> hermitian_eigenvalues(const Mat2& m) noexcept {
    const double a = m(0, 0).real();
    const double d = m(1, 1).real();
    const double half_gap = std::hypot(0.5 * (a - d), std::abs(m(0, 1)));
    const double mid = 0.5 * (a + d);
    return {mid - half_gap, mid + half_gap};
}

}  // namespace bellsim::spin
