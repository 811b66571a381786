#pragma once

// Self-contained spectral machinery on periodic matrix grids: 2D Fourier
// transforms (radix-2 when the size is a power of two, direct DFT for other
// even sizes), exact spectral derivatives, and 2x zero-padded resampling for
// anti-aliased products.
//
// Conventions:
//   fft2  : physical values -> Fourier coefficients c_k, normalized so that
//           f(x) = sum_k c_k e^{2 pi i (kx x/Lx + ky y/Ly)}.
//   index i corresponds to the signed frequency i <= n/2 ? i : i - n; the
//   slot i = n/2 carries the (ambiguous) Nyquist content. Derivatives zero
//   it, which keeps the spectral derivative exactly skew-adjoint on the
//   grid; resampling and point evaluation split it evenly between +n/2 and
//   -n/2, which preserves grid values exactly.

#include <vector>

#include "tconn/grid.hpp"

namespace tconn {
namespace fftdetail {

inline bool is_pow2(int n) { return n > 0 && (n & (n - 1)) == 0; }

// In-place radix-2, unnormalized. sign = -1 forward, +1 inverse.
inline void fft_pow2(std::vector<Complex>& a, int sign) {
    const int n = static_cast<int>(a.size());
    for (int i = 1, j = 0; i < n; ++i) {
        int bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (int len = 2; len <= n; len <<= 1) {
        const double ang = sign * kTwoPi / len;
        const Complex wl(std::cos(ang), std::sin(ang));
        for (int i = 0; i < n; i += len) {
            Complex w(1.0);
            for (int k = 0; k < len / 2; ++k) {
                const Complex u = a[i + k];
                const Complex t = a[i + k + len / 2] * w;
                a[i + k] = u + t;
                a[i + k + len / 2] = u - t;
                w *= wl;
            }
        }
    }
}

// Unnormalized direct DFT, O(n^2); only used for even non-power-of-two sizes.
inline void dft_direct(std::vector<Complex>& a, int sign) {
    const int n = static_cast<int>(a.size());
    std::vector<Complex> out(a.size());
    for (int k = 0; k < n; ++k) {
        Complex s(0.0);
        for (int j = 0; j < n; ++j) s += a[j] * std::polar(1.0, sign * kTwoPi * k * j / n);
        out[k] = s;
    }
    a = std::move(out);
}

inline void transform(std::vector<Complex>& a, int sign) {
    if (is_pow2(static_cast<int>(a.size())))
        fft_pow2(a, sign);
    else
        dft_direct(a, sign);
}

// Apply the 1D transform along rows (axis 0 = x) or columns (axis 1 = y) of
// each of the 4 matrix entries.
inline void transform_grid(MatGrid& g, int axis, int sign) {
    const int nx = g.nx, ny = g.ny;
    if (axis == 0) {
        std::vector<Complex> buf(static_cast<std::size_t>(nx));
        for (int e = 0; e < 4; ++e)
            for (int j = 0; j < ny; ++j) {
                for (int i = 0; i < nx; ++i) buf[i] = g.at(i, j).e[e];
                transform(buf, sign);
                for (int i = 0; i < nx; ++i) g.at(i, j).e[e] = buf[i];
            }
    } else {
        std::vector<Complex> buf(static_cast<std::size_t>(ny));
        for (int e = 0; e < 4; ++e)
            for (int i = 0; i < nx; ++i) {
                for (int j = 0; j < ny; ++j) buf[j] = g.at(i, j).e[e];
                transform(buf, sign);
                for (int j = 0; j < ny; ++j) g.at(i, j).e[e] = buf[j];
            }
    }
}

} // namespace fftdetail

inline int freq_of(int idx, int n) { return idx <= n / 2 ? idx : idx - n; }

inline MatGrid fft2(const MatGrid& g) {
    MatGrid c = g;
    fftdetail::transform_grid(c, 0, -1);
    fftdetail::transform_grid(c, 1, -1);
    c *= 1.0 / static_cast<double>(g.size());
    return c;
}

inline MatGrid ifft2(const MatGrid& c) {
    MatGrid g = c;
    fftdetail::transform_grid(g, 0, +1);
    fftdetail::transform_grid(g, 1, +1);
    return g;
}

namespace fftdetail {

// Multiply coefficient (kx, ky) by factor(kx, ky); zeroes Nyquist slots.
template <class F>
MatGrid scaled_coefficients(const MatGrid& g, F&& factor) {
    MatGrid c = fft2(g);
    for (int j = 0; j < c.ny; ++j) {
        const int ky = freq_of(j, c.ny);
        for (int i = 0; i < c.nx; ++i) {
            const int kx = freq_of(i, c.nx);
            if (std::abs(kx) == c.nx / 2 || std::abs(ky) == c.ny / 2) {
                c.at(i, j) = Mat2::zero();
                continue;
            }
            c.at(i, j) *= factor(kx, ky);
        }
    }
    return ifft2(c);
}

} // namespace fftdetail

// dbar = (d/dx + i d/dy)/2; on e^{2 pi i(kx x/Lx + ky y/Ly)} this is
// multiplication by (i 2 pi kx / Lx - 2 pi ky / Ly)/2.
inline MatGrid spectral_dbar(const MatGrid& g, const TorusGrid& grid) {
    return fftdetail::scaled_coefficients(g, [&](int kx, int ky) {
        return 0.5 * Complex(-kTwoPi * ky / grid.Ly, kTwoPi * kx / grid.Lx);
    });
}

// d = (d/dx - i d/dy)/2.
inline MatGrid spectral_d(const MatGrid& g, const TorusGrid& grid) {
    return fftdetail::scaled_coefficients(g, [&](int kx, int ky) {
        return 0.5 * Complex(kTwoPi * ky / grid.Ly, kTwoPi * kx / grid.Lx);
    });
}

inline MatGrid spectral_dx(const MatGrid& g, const TorusGrid& grid) {
    return fftdetail::scaled_coefficients(g, [&](int kx, int /*ky*/) { return Complex(0.0, kTwoPi * kx / grid.Lx); });
}

inline MatGrid spectral_dy(const MatGrid& g, const TorusGrid& grid) {
    return fftdetail::scaled_coefficients(g, [&](int /*kx*/, int ky) { return Complex(0.0, kTwoPi * ky / grid.Ly); });
}

namespace fftdetail {

// Per-axis index/weight expansion used to place coefficients of an n-grid
// into an m-grid (m = 2n upsampling or m = n/2 downsampling), splitting the
// Nyquist slot evenly so grid values are preserved exactly.
struct AxisTerm {
    int dst;
    double w;
};

inline void axis_terms_up(int idx, int n, int m, AxisTerm out[2], int& count) {
    const int k = freq_of(idx, n);
    if (std::abs(k) == n / 2) {
        out[0] = {(n / 2) % m, 0.5};
        out[1] = {(m - n / 2) % m, 0.5};
        count = 2;
    } else {
        out[0] = {(k % m + m) % m, 1.0};
        count = 1;
    }
}

} // namespace fftdetail

// Zero-padded spectral upsampling to a 2x finer grid.
inline MatGrid upsample2(const MatGrid& g) {
    const int nx = g.nx, ny = g.ny, mx = 2 * nx, my = 2 * ny;
    MatGrid c = fft2(g);
    MatGrid big(mx, my);
    for (int j = 0; j < ny; ++j) {
        fftdetail::AxisTerm ty[2];
        int cy = 0;
        fftdetail::axis_terms_up(j, ny, my, ty, cy);
        for (int i = 0; i < nx; ++i) {
            fftdetail::AxisTerm tx[2];
            int cx = 0;
            fftdetail::axis_terms_up(i, nx, mx, tx, cx);
            for (int a = 0; a < cy; ++a)
                for (int b = 0; b < cx; ++b) big.at(tx[b].dst, ty[a].dst) += c.at(i, j) * (tx[b].w * ty[a].w);
        }
    }
    return ifft2(big);
}

// Spectral truncation to a 2x coarser grid (adjoint of upsample2 at the
// Nyquist shells: the two +-n/2 contributions fold back into one slot).
inline MatGrid downsample2(const MatGrid& g) {
    const int mx = g.nx, my = g.ny, nx = mx / 2, ny = my / 2;
    MatGrid c = fft2(g);
    MatGrid small(nx, ny);
    for (int j = 0; j < ny; ++j) {
        const int ky = freq_of(j, ny);
        for (int i = 0; i < nx; ++i) {
            const int kx = freq_of(i, nx);
            Mat2 acc;
            const bool nyx = std::abs(kx) == nx / 2, nyy = std::abs(ky) == ny / 2;
            const int sxs[2] = {(kx % mx + mx) % mx, (mx - nx / 2) % mx};
            const int sys[2] = {(ky % my + my) % my, (my - ny / 2) % my};
            for (int a = 0; a < (nyy ? 2 : 1); ++a)
                for (int b = 0; b < (nyx ? 2 : 1); ++b) acc += c.at(nyx ? sxs[b] : sxs[0], nyy ? sys[a] : sys[0]);
            small.at(i, j) = acc;
        }
    }
    return ifft2(small);
}

// Anti-aliased pointwise matrix product: upsample both factors 2x, multiply,
// truncate back.
inline MatGrid aa_matmul(const MatGrid& a, const MatGrid& b) {
    if (!a.same_shape(b)) throw GridMismatch("aa_matmul: shape mismatch");
    return downsample2(matmul(upsample2(a), upsample2(b)));
}

} // namespace tconn
