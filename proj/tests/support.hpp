#pragma once

// Shared test helpers: deterministic random data and the independent
// oracles (scaling-and-squaring exponential, coordinate-frame vector
// fields applied spectrally on (x, y, theta) sample grids).

#include <vector>

#include "tconn/tconn.hpp"

namespace testsup {

using namespace tconn;

// ---- matrices -----------------------------------------------------------------

inline Mat2 random_su2_lie(SplitMix64& rng, double scale = 1.0) {
    const double a = rng.normal() * scale;
    const Complex b(rng.normal() * scale, rng.normal() * scale);
    return Mat2(Complex(0.0, a), b, -std::conj(b), Complex(0.0, -a));
}

inline Mat2 random_mat2(SplitMix64& rng, double scale = 1.0) {
    Mat2 m;
    for (auto& e : m.e) e = Complex(rng.normal(), rng.normal()) * scale;
    return m;
}

inline Mat2 random_hermitian(SplitMix64& rng, double scale = 1.0) {
    const Mat2 m = random_mat2(rng, scale);
    return 0.5 * (m + m.adjoint());
}

inline std::array<Complex, 2> random_unit_vector(SplitMix64& rng) {
    std::array<Complex, 2> v{Complex(rng.normal(), rng.normal()), Complex(rng.normal(), rng.normal())};
    const double n = vec_norm(v);
    return {v[0] / n, v[1] / n};
}

// Independent matrix exponential: scaling and squaring with a plain Taylor
// series on the scaled matrix.
inline Mat2 expm_oracle(const Mat2& k) {
    int s = 0;
    double n = k.norm();
    while (n > 0.25) {
        n *= 0.5;
        ++s;
    }
    const Mat2 a = k * std::pow(0.5, s);
    Mat2 term = Mat2::identity();
    Mat2 sum = Mat2::identity();
    for (int i = 1; i <= 24; ++i) {
        term = term * a * (1.0 / i);
        sum += term;
    }
    for (int i = 0; i < s; ++i) sum = sum * sum;
    return sum;
}

// ---- random fields --------------------------------------------------------------

// Band-limited random scalar grid (complex), |kx|,|ky| <= kmax. Separable
// phase tables keep generation cheap on large grids.
inline std::vector<Complex> random_scalar_grid(const TorusGrid& g, SplitMix64& rng, int kmax, bool real_valued) {
    std::vector<std::vector<Complex>> ex(static_cast<std::size_t>(2 * kmax + 1)), ey(ex.size());
    for (int k = -kmax; k <= kmax; ++k) {
        auto& vx = ex[static_cast<std::size_t>(k + kmax)];
        auto& vy = ey[static_cast<std::size_t>(k + kmax)];
        vx.resize(static_cast<std::size_t>(g.nx));
        vy.resize(static_cast<std::size_t>(g.ny));
        for (int i = 0; i < g.nx; ++i) vx[static_cast<std::size_t>(i)] = std::polar(1.0, kTwoPi * k * g.x(i) / g.Lx);
        for (int j = 0; j < g.ny; ++j) vy[static_cast<std::size_t>(j)] = std::polar(1.0, kTwoPi * k * g.y(j) / g.Ly);
    }
    std::vector<Complex> out(g.npoints(), Complex(0.0));
    for (int ky = -kmax; ky <= kmax; ++ky) {
        for (int kx = -kmax; kx <= kmax; ++kx) {
            const double decay = 1.0 / (1.0 + kx * kx + ky * ky);
            const Complex c(rng.normal() * decay, rng.normal() * decay);
            const auto& vx = ex[static_cast<std::size_t>(kx + kmax)];
            const auto& vy = ey[static_cast<std::size_t>(ky + kmax)];
            for (int j = 0; j < g.ny; ++j) {
                const Complex cy = c * vy[static_cast<std::size_t>(j)];
                for (int i = 0; i < g.nx; ++i) {
                    Complex v = cy * vx[static_cast<std::size_t>(i)];
                    if (real_valued) v = Complex(v.real(), 0.0);
                    out[static_cast<std::size_t>(j) * g.nx + i] += v;
                }
            }
        }
    }
    return out;
}

// Band-limited random matrix grid.
inline MatGrid random_mat_grid(const TorusGrid& g, SplitMix64& rng, int kmax = 3) {
    MatGrid out(g.nx, g.ny);
    for (int e = 0; e < 4; ++e) {
        const auto s = random_scalar_grid(g, rng, kmax, false);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i].e[static_cast<std::size_t>(e)] = s[i];
    }
    return out;
}

// Generic random band-limited field on the given theta-mode range.
inline ThetaField random_field(const Metric& metric, int mode_min, int mode_max, SplitMix64& rng, int kmax = 3) {
    ThetaField f(metric, mode_min, mode_max);
    for (int m = mode_min; m <= mode_max; ++m) f.mode(m) = random_mat_grid(metric.grid, rng, kmax);
    return f;
}

// Random traceless A_{+1} coefficient (the A_{-1} partner is forced).
inline MatGrid random_traceless_grid(const TorusGrid& g, SplitMix64& rng, int kmax = 3) {
    MatGrid out = random_mat_grid(g, rng, kmax);
    for (auto& m : out.v) m = m - 0.5 * m.trace() * Mat2::identity();
    return out;
}

inline Connection random_connection(const Metric& metric, SplitMix64& rng, int kmax = 3) {
    return Connection::from_plus(metric, random_traceless_grid(metric.grid, rng, kmax));
}

// su(2)-valued band-limited mode-0 grid.
inline MatGrid random_su2_lie_grid(const TorusGrid& g, SplitMix64& rng, int kmax = 2, double scale = 1.0) {
    const Mat2 k1(Complex(0, 1), Complex(0, 0), Complex(0, 0), Complex(0, -1));
    const Mat2 k2(Complex(0, 0), Complex(1, 0), Complex(-1, 0), Complex(0, 0));
    const Mat2 k3(Complex(0, 0), Complex(0, 1), Complex(0, 1), Complex(0, 0));
    MatGrid out(g.nx, g.ny);
    for (const Mat2& basis : {k1, k2, k3}) {
        const auto s = random_scalar_grid(g, rng, kmax, true);
        for (std::size_t i = 0; i < out.v.size(); ++i) out.v[i] += basis * (s[i].real() * scale);
    }
    return out;
}

// Base-only unitary w(x) = exp(S(x)) with S a band-limited su(2) field.
inline ThetaField random_mode0_unitary(const Metric& metric, SplitMix64& rng, double scale = 0.4) {
    const MatGrid S = random_su2_lie_grid(metric.grid, rng, 1, scale);
    MatGrid w(S.nx, S.ny);
    for (std::size_t i = 0; i < S.v.size(); ++i) w.v[i] = su2_exp(S.v[i]);
    ThetaField f = ThetaField::single_mode(metric, 0, std::move(w));
    f.unitary_tag = true;
    return f;
}

// Theta-dependent SU(2) field: pointwise exponential of a band-limited
// su(2)-valued generator with theta modes |m| <= gen_modes, recovered by a
// theta-DFT wide enough that the truncation is far below test tolerances.
// The generator amplitude is normalized so the kept band captures the
// exponential to ~1e-13.
inline ThetaField random_unitary_field(const Metric& metric, SplitMix64& rng, int gen_modes = 2,
                                       double amplitude = 0.15, int keep_modes = 16) {
    const int T = 64;
    std::vector<MatGrid> hs(static_cast<std::size_t>(gen_modes) + 1);
    for (int m = 1; m <= gen_modes; ++m) {
        MatGrid h = random_mat_grid(metric.grid, rng, 1);
        h *= amplitude / (h.rms_fro() + 1e-300);
        hs[static_cast<std::size_t>(m)] = std::move(h);
    }
    MatGrid s0 = random_su2_lie_grid(metric.grid, rng, 1, 1.0);
    s0 *= amplitude / (s0.rms_fro() + 1e-300);

    // S(x, theta) anti-Hermitian traceless for every real theta:
    // S = S0 + sum_m (h_m e^{i m theta} - (h_m e^{i m theta})^dagger), with
    // the fluctuating trace removed along the anti-Hermitian diagonal.
    std::vector<MatGrid> samples;
    samples.reserve(T);
    for (int t = 0; t < T; ++t) {
        const double theta = kTwoPi * t / T;
        MatGrid S = s0;
        for (int m = 1; m <= gen_modes; ++m) {
            const MatGrid& h = hs[static_cast<std::size_t>(m)];
            for (std::size_t i = 0; i < S.v.size(); ++i) {
                const Complex ph = std::polar(1.0, m * theta);
                S.v[i] += h.v[i] * ph - (h.v[i] * ph).adjoint();
            }
        }
        MatGrid U(S.nx, S.ny);
        for (std::size_t i = 0; i < S.v.size(); ++i) {
            Mat2 k = S.v[i];
            k = k - 0.5 * k.trace() * Mat2::identity();
            U.v[i] = su2_exp(k);
        }
        samples.push_back(std::move(U));
    }
    ThetaField u = field_from_theta_samples(metric, samples, -keep_modes, keep_modes);
    u.unitary_tag = true;
    return u;
}

// Projector field of a gently perturbed constant line: smooth enough that
// spectral truncation effects sit far below algebraic test tolerances.
inline MatGrid smooth_projector_grid(const Metric& metric, SplitMix64& rng, double amplitude = 0.18) {
    const TorusGrid& g = metric.grid;
    const auto p1 = random_scalar_grid(g, rng, 2, false);
    const auto p2 = random_scalar_grid(g, rng, 2, false);
    double rms = 0.0;
    for (std::size_t i = 0; i < p1.size(); ++i) rms += std::norm(p1[i]) + std::norm(p2[i]);
    rms = std::sqrt(rms / static_cast<double>(p1.size()));
    const double s = amplitude / (rms + 1e-300);
    MatGrid pi(g.nx, g.ny);
    for (std::size_t i = 0; i < p1.size(); ++i) {
        std::array<Complex, 2> v{Complex(1.0) + s * p1[i], Complex(0.3) + s * p2[i]};
        const double n = vec_norm(v);
        v[0] /= n;
        v[1] /= n;
        pi.v[i] = outer(v, v);
    }
    return pi;
}

// ---- coordinate-frame oracle ------------------------------------------------------
//
// Fields as (x, y, theta) sample stacks: samples[t] holds the slice at
// theta_t = 2 pi t / T. The frame vector fields are applied with spectral
// derivatives in all three variables:
//   X = e^{-lambda}( cos th d_x + sin th d_y + (-l_x sin th + l_y cos th) d_th )
//   H = e^{-lambda}(-sin th d_x + cos th d_y - ( l_x cos th + l_y sin th) d_th )

struct SampleStack {
    std::vector<MatGrid> s; // size T
    int T() const { return static_cast<int>(s.size()); }
};

inline SampleStack sample_field(const ThetaField& f, int T) {
    SampleStack st;
    st.s.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) st.s.push_back(reconstruct_at_theta(f, kTwoPi * t / T));
    return st;
}

inline SampleStack dtheta(const SampleStack& st) {
    const int T = st.T();
    const int nx = st.s[0].nx, ny = st.s[0].ny;
    SampleStack out;
    out.s.assign(static_cast<std::size_t>(T), MatGrid(nx, ny));
    std::vector<Complex> buf(static_cast<std::size_t>(T));
    for (int e = 0; e < 4; ++e)
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i) {
                for (int t = 0; t < T; ++t) buf[static_cast<std::size_t>(t)] = st.s[static_cast<std::size_t>(t)].at(i, j).e[static_cast<std::size_t>(e)];
                fftdetail::transform(buf, -1);
                for (int t = 0; t < T; ++t) {
                    const int m = freq_of(t, T);
                    buf[static_cast<std::size_t>(t)] *= (std::abs(m) == T / 2) ? Complex(0.0) : Complex(0.0, m);
                }
                fftdetail::transform(buf, +1);
                for (int t = 0; t < T; ++t)
                    out.s[static_cast<std::size_t>(t)].at(i, j).e[static_cast<std::size_t>(e)] = buf[static_cast<std::size_t>(t)] / static_cast<double>(T);
            }
    return out;
}

enum class Frame { X, H };

inline SampleStack apply_frame_coordinate(const SampleStack& st, const Metric& metric, Frame which) {
    const int T = st.T();
    const TorusGrid& g = metric.grid;
    const SampleStack dth = dtheta(st);
    // lambda and its spectral gradient.
    MatGrid lam_grid(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) lam_grid.at(i, j) = Mat2(Complex(metric.lambda_at(i, j)), 0, 0, 0);
    const MatGrid lx = spectral_dx(lam_grid, g);
    const MatGrid ly = spectral_dy(lam_grid, g);

    SampleStack out;
    out.s.reserve(static_cast<std::size_t>(T));
    for (int t = 0; t < T; ++t) {
        const double th = kTwoPi * t / T;
        const double c = std::cos(th), s = std::sin(th);
        const MatGrid dx = spectral_dx(st.s[static_cast<std::size_t>(t)], g);
        const MatGrid dy = spectral_dy(st.s[static_cast<std::size_t>(t)], g);
        MatGrid slice(g.nx, g.ny);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) {
                const double lxv = lx.at(i, j).e[0].real();
                const double lyv = ly.at(i, j).e[0].real();
                Mat2 v;
                if (which == Frame::X) {
                    v = c * dx.at(i, j) + s * dy.at(i, j) + (-lxv * s + lyv * c) * dth.s[static_cast<std::size_t>(t)].at(i, j);
                } else {
                    v = -s * dx.at(i, j) + c * dy.at(i, j) - (lxv * c + lyv * s) * dth.s[static_cast<std::size_t>(t)].at(i, j);
                }
                slice.at(i, j) = std::exp(-metric.lambda_at(i, j)) * v;
            }
        out.s.push_back(std::move(slice));
    }
    return out;
}

inline double stack_rms(const SampleStack& a) {
    double s = 0.0;
    std::size_t n = 0;
    for (const auto& g : a.s) {
        s += g.sum_norm_sq();
        n += g.size();
    }
    return std::sqrt(s / static_cast<double>(n * 4));
}

inline double stack_rms_diff(const SampleStack& a, const SampleStack& b) {
    double s = 0.0;
    std::size_t n = 0;
    for (std::size_t t = 0; t < a.s.size(); ++t) {
        s += (a.s[t] - b.s[t]).sum_norm_sq();
        n += a.s[t].size();
    }
    return std::sqrt(s / static_cast<double>(n * 4));
}

// ---- metrics ------------------------------------------------------------------------

inline Metric flat_metric(int n) { return Metric::flat(TorusGrid(n, n)); }

// The standard non-flat test factor.
inline Metric wavy_metric(int n) {
    return Metric::conformal(TorusGrid(n, n), [](double x, double y) {
        return 0.3 * std::sin(kTwoPi * x) * std::cos(kTwoPi * y);
    });
}

} // namespace testsup
