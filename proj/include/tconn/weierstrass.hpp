#pragma once

// Weierstrass elliptic function of the unit square lattice Z + iZ.
//
// Definition: P(z) = 1/z^2 + sum'_{w in lattice} [1/(z-w)^2 - 1/w^2]. The
// raw ball-truncated sum converges too slowly to be usable, so evaluation
// accelerates it to its closed limit through the exponential Fourier series
// (tau = i, q = e^{2 pi i tau} = e^{-2 pi}, u = e^{2 pi i z}):
//
//   P(z)  = (2 pi i)^2 [ 1/12 + u/(1-u)^2
//           + sum_{n>=1} q^n ( u/(1-q^n u)^2 + u^{-1}/(1-q^n u^{-1})^2
//                              - 2/(1-q^n)^2 ) ]
//
// differentiated termwise for P'. Arguments are first reduced to the
// centered fundamental cell, so every q^n u^{+-1} stays below e^{-pi} and a
// handful of terms give full double precision; lattice periodicity is then
// satisfied to rounding. The invariants g2, g3 are kept as plain
// ball-truncated Eisenstein sums at the configured radius (g3 vanishes by
// the symmetry w -> iw of the square lattice).

#include <complex>

#include "tconn/mat2.hpp"

namespace tconn {

class Weierstrass {
public:
    static constexpr double kNearPoleDistance = 1e-6;
    static constexpr int kDefaultRadius = 200;

    explicit Weierstrass(int truncation_radius = kDefaultRadius) : radius_(truncation_radius) {
        if (radius_ < 20) throw Precondition("Weierstrass: truncation radius must be >= 20");
        const double R2 = static_cast<double>(radius_) * radius_;
        double g2 = 0.0, g3 = 0.0;
        for (int m = -radius_; m <= radius_; ++m) {
            for (int n = -radius_; n <= radius_; ++n) {
                if (m == 0 && n == 0) continue;
                const double r2 = static_cast<double>(m) * m + static_cast<double>(n) * n;
                if (r2 > R2) continue;
                const Complex w(m, n);
                const Complex w2 = w * w;
                const Complex w4 = w2 * w2;
                g2 += (1.0 / w4).real();
                g3 += (1.0 / (w4 * w2)).real();
            }
        }
        g2_ = 60.0 * g2;
        g3_ = 140.0 * g3;
    }

    int truncation_radius() const { return radius_; }
    double g2() const { return g2_; }
    double g3() const { return g3_; }

    Complex p(Complex z) const {
        const Complex zr = reduce(z);
        const Complex u = std::exp(Complex(0.0, kTwoPi) * zr);
        Complex s = Complex(1.0 / 12.0) + u / square(1.0 - u);
        double qn = 1.0;
        for (int n = 1; n <= 40; ++n) {
            qn *= kQ;
            s += qn * u / square(1.0 - qn * u) + (qn / u) / square(1.0 - qn / u) - 2.0 * qn / square(1.0 - qn);
            if (qn < 1e-18) break;
        }
        const Complex tpi(0.0, kTwoPi);
        return tpi * tpi * s;
    }

    Complex p_prime(Complex z) const {
        const Complex zr = reduce(z);
        const Complex u = std::exp(Complex(0.0, kTwoPi) * zr);
        Complex s = u * (1.0 + u) / cube(1.0 - u);
        double qn = 1.0;
        for (int n = 1; n <= 40; ++n) {
            qn *= kQ;
            s += qn * u * (1.0 + qn * u) / cube(1.0 - qn * u) - (qn / u) * (1.0 + qn / u) / cube(1.0 - qn / u);
            if (qn < 1e-18) break;
        }
        const Complex tpi(0.0, kTwoPi);
        return tpi * tpi * tpi * s;
    }

private:
    static constexpr double kQ = 0.00186744273170798881443233829136; // e^{-2 pi}

    static Complex square(Complex c) { return c * c; }
    static Complex cube(Complex c) { return c * c * c; }

    // Representative in the centered cell [-1/2, 1/2)^2; throws near poles.
    static Complex reduce(Complex z) {
        const double x = z.real() - std::round(z.real());
        const double y = z.imag() - std::round(z.imag());
        const Complex zr(x, y);
        if (std::abs(zr) < kNearPoleDistance)
            throw NearPole("Weierstrass: argument within 1e-6 of a lattice point");
        return zr;
    }

    int radius_;
    double g2_, g3_;
};

} // namespace tconn
