#pragma once

// 2x2 complex matrix algebra: the SU(2)/su(2) predicates, the quaternionic
// j-conjugation, and the projector <-> involution conversions. Everything is
// a plain value; all operations are pure.

#include <array>
#include <cmath>
#include <complex>

#include "tconn/errors.hpp"

namespace tconn {

using Complex = std::complex<double>;

constexpr double kPi = 3.14159265358979323846264338327950288;
constexpr double kTwoPi = 2.0 * kPi;

struct Mat2 {
    // Row-major: e[0]=a00, e[1]=a01, e[2]=a10, e[3]=a11.
    std::array<Complex, 4> e{};

    constexpr Mat2() = default;
    constexpr Mat2(Complex a00, Complex a01, Complex a10, Complex a11) : e{a00, a01, a10, a11} {}

    static constexpr Mat2 zero() { return {}; }
    static constexpr Mat2 identity() { return {Complex(1.0), Complex(0.0), Complex(0.0), Complex(1.0)}; }

    Complex& operator()(int r, int c) { return e[static_cast<std::size_t>(2 * r + c)]; }
    const Complex& operator()(int r, int c) const { return e[static_cast<std::size_t>(2 * r + c)]; }

    Mat2& operator+=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) e[i] += o.e[i];
        return *this;
    }
    Mat2& operator-=(const Mat2& o) {
        for (int i = 0; i < 4; ++i) e[i] -= o.e[i];
        return *this;
    }
    Mat2& operator*=(Complex s) {
        for (auto& x : e) x *= s;
        return *this;
    }
    Mat2& operator*=(double s) {
        for (auto& x : e) x *= s;
        return *this;
    }

    Mat2 adjoint() const { return {std::conj(e[0]), std::conj(e[2]), std::conj(e[1]), std::conj(e[3])}; }
    Mat2 conjugate() const { return {std::conj(e[0]), std::conj(e[1]), std::conj(e[2]), std::conj(e[3])}; }
    Mat2 transpose() const { return {e[0], e[2], e[1], e[3]}; }

    Complex trace() const { return e[0] + e[3]; }
    Complex det() const { return e[0] * e[3] - e[1] * e[2]; }

    double norm_sq() const {
        return std::norm(e[0]) + std::norm(e[1]) + std::norm(e[2]) + std::norm(e[3]);
    }
    double norm() const { return std::sqrt(norm_sq()); }

    bool finite() const {
        for (const auto& x : e)
            if (!std::isfinite(x.real()) || !std::isfinite(x.imag())) return false;
        return true;
    }

    Mat2 inverse() const {
        const Complex d = det();
        if (std::abs(d) < 1e-300) throw Error("Mat2::inverse: singular matrix");
        const Complex s = 1.0 / d;
        return {e[3] * s, -e[1] * s, -e[2] * s, e[0] * s};
    }
};

inline Mat2 operator+(Mat2 a, const Mat2& b) { return a += b; }
inline Mat2 operator-(Mat2 a, const Mat2& b) { return a -= b; }
inline Mat2 operator-(const Mat2& a) { return {-a.e[0], -a.e[1], -a.e[2], -a.e[3]}; }
inline Mat2 operator*(Mat2 a, Complex s) { return a *= s; }
inline Mat2 operator*(Complex s, Mat2 a) { return a *= s; }
inline Mat2 operator*(Mat2 a, double s) { return a *= s; }
inline Mat2 operator*(double s, Mat2 a) { return a *= s; }

inline Mat2 operator*(const Mat2& a, const Mat2& b) {
    return {a.e[0] * b.e[0] + a.e[1] * b.e[2], a.e[0] * b.e[1] + a.e[1] * b.e[3],
            a.e[2] * b.e[0] + a.e[3] * b.e[2], a.e[2] * b.e[1] + a.e[3] * b.e[3]};
}

inline Mat2 commutator(const Mat2& a, const Mat2& b) { return a * b - b * a; }

inline double distance(const Mat2& a, const Mat2& b) { return (a - b).norm(); }

// Outer product v w^*: (v w^*)_{rc} = v_r conj(w_c).
inline Mat2 outer(const std::array<Complex, 2>& v, const std::array<Complex, 2>& w) {
    return {v[0] * std::conj(w[0]), v[0] * std::conj(w[1]), v[1] * std::conj(w[0]), v[1] * std::conj(w[1])};
}

inline std::array<Complex, 2> apply(const Mat2& m, const std::array<Complex, 2>& v) {
    return {m.e[0] * v[0] + m.e[1] * v[1], m.e[2] * v[0] + m.e[3] * v[1]};
}

inline double vec_norm(const std::array<Complex, 2>& v) {
    return std::sqrt(std::norm(v[0]) + std::norm(v[1]));
}

// ---- defect measures (Frobenius norm throughout) --------------------------

inline double unitary_defect(const Mat2& m) { return (m * m.adjoint() - Mat2::identity()).norm(); }

inline double su2_defect(const Mat2& m) {
    return std::max(unitary_defect(m), std::abs(m.det() - Complex(1.0)));
}

// su(2) membership: anti-Hermitian and traceless.
inline double su2_lie_defect(const Mat2& m) {
    return std::max((m + m.adjoint()).norm(), std::abs(m.trace()));
}

inline double hermitian_defect(const Mat2& m) { return (m - m.adjoint()).norm(); }

// ---- the quaternionic structure -------------------------------------------
//
// j(z1,z2) = (-conj(z2), conj(z1)) is the antilinear map commuting with
// SU(2). Conjugating a linear map m by j gives the linear map
// j_twist(m) = sigma conj(m) sigma^{-1} with sigma = [[0,-1],[1,0]].

inline Mat2 j_twist(const Mat2& m) {
    return {std::conj(m.e[3]), -std::conj(m.e[2]), -std::conj(m.e[1]), std::conj(m.e[0])};
}

// ---- involution <-> projector ----------------------------------------------
//
// For g in su(2) with g^2 = -Id, pi = (Id - i g)/2 projects onto the
// i-eigenline of g; conversely g = i (2 pi - Id).

inline Mat2 involution_from_projector(const Mat2& p, double tol = 1e-9) {
    if ((p * p - p).norm() > tol || hermitian_defect(p) > tol || std::abs(p.trace() - Complex(1.0)) > tol)
        throw NotAProjector("involution_from_projector: input is not a rank-1 Hermitian projector");
    return Complex(0.0, 1.0) * (2.0 * p - Mat2::identity());
}

inline Mat2 projector_from_involution(const Mat2& g, double tol = 1e-9) {
    if ((g * g + Mat2::identity()).norm() > tol)
        throw NotAnInvolution("projector_from_involution: g^2 != -Id");
    return 0.5 * (Mat2::identity() - Complex(0.0, 1.0) * g);
}

// ---- exponentials / retraction ---------------------------------------------

// Exact exponential of a traceless anti-Hermitian matrix:
// k^2 = -w^2 Id with w = |k|_F / sqrt(2), so exp(k) = cos(w) Id + sinc(w) k.
inline Mat2 su2_exp(const Mat2& k) {
    if (su2_lie_defect(k) > 1e-10 * (1.0 + k.norm()))
        throw Precondition("su2_exp: input not in su(2)");
    const double w = k.norm() / std::sqrt(2.0);
    const double c = std::cos(w);
    const double s = (w < 1e-8) ? 1.0 - w * w / 6.0 : std::sin(w) / w;
    return c * Mat2::identity() + s * k;
}

// Eigen-decomposition of a Hermitian 2x2: returns (lambda_max, unit vector).
inline std::pair<double, std::array<Complex, 2>> hermitian_top_eigenpair(const Mat2& h) {
    const double a = h.e[0].real();
    const double d = h.e[3].real();
    const Complex b = h.e[1];
    const double mu = 0.5 * (a + d);
    const double del = 0.5 * (a - d);
    const double r = std::sqrt(del * del + std::norm(b));
    std::array<Complex, 2> v1{Complex(del + r), std::conj(b)};
    std::array<Complex, 2> v2{b, Complex(r - del)};
    std::array<Complex, 2> v = (vec_norm(v1) >= vec_norm(v2)) ? v1 : v2;
    const double n = vec_norm(v);
    if (n < 1e-300) return {mu + r, {Complex(1.0), Complex(0.0)}}; // degenerate: any line
    v[0] /= n;
    v[1] /= n;
    return {mu + r, v};
}

// Nearest rank-1 Hermitian idempotent: projector onto the top eigenline of
// the Hermitian part. Used as the retraction in projector-field descent.
inline Mat2 nearest_projector(const Mat2& m) {
    const Mat2 h = 0.5 * (m + m.adjoint());
    auto [lam, v] = hermitian_top_eigenpair(h);
    (void)lam;
    return outer(v, v);
}

} // namespace tconn
