#pragma once

// Closed geodesics of the flat torus and the parallel-transport cocycle
//
//     dC/dt = -A(x + t v, theta_0) C,      C(0) = Id,
//
// integrated with classical RK4. Along a rational-direction line the 2D
// Fourier series of a connection coefficient collapses exactly into a 1D
// series in t (frequency nu = kx p + ky q over the loop period), so the
// field values fed to the integrator carry no interpolation error.

#include <numeric>
#include <ostream>
#include <vector>

#include "tconn/operators.hpp"
#include "tconn/rng.hpp"

namespace tconn {

struct GeodesicLoop {
    double x0 = 0.0, y0 = 0.0;
    int p = 1, q = 0;
    double Lx = 1.0, Ly = 1.0;

    GeodesicLoop() = default;
    GeodesicLoop(double x0_, double y0_, int p_, int q_, double Lx_ = 1.0, double Ly_ = 1.0)
        : x0(x0_), y0(y0_), p(p_), q(q_), Lx(Lx_), Ly(Ly_) {
        if (p == 0 && q == 0) throw Precondition("GeodesicLoop: direction (0,0)");
        if (std::gcd(std::abs(p), std::abs(q)) != 1) throw Precondition("GeodesicLoop: direction not coprime");
    }

    double length() const { return std::sqrt(p * Lx * p * Lx + q * Ly * q * Ly); }
    double theta() const { return std::atan2(q * Ly, p * Lx); }
    double vx() const { return p * Lx / length(); }
    double vy() const { return q * Ly / length(); }
};

// All coprime directions |p|,|q| <= max_pq in the canonical orientation
// (p >= 0, and q > 0 when p = 0), each with `samples_per_direction` seeded
// pseudorandom base points.
inline std::vector<GeodesicLoop> enumerate_loops(const TorusGrid& grid, int max_pq, int samples_per_direction,
                                                 std::uint64_t seed) {
    if (max_pq < 1) throw Precondition("enumerate_loops: max_pq must be >= 1");
    if (samples_per_direction < 1) throw Precondition("enumerate_loops: samples must be >= 1");
    std::vector<std::pair<int, int>> dirs;
    dirs.emplace_back(0, 1);
    for (int p = 1; p <= max_pq; ++p)
        for (int q = -max_pq; q <= max_pq; ++q)
            if (std::gcd(p, std::abs(q)) == 1) dirs.emplace_back(p, q);
    SplitMix64 rng(seed);
    std::vector<GeodesicLoop> loops;
    loops.reserve(dirs.size() * static_cast<std::size_t>(samples_per_direction));
    for (auto [p, q] : dirs)
        for (int s = 0; s < samples_per_direction; ++s)
            loops.emplace_back(rng.uniform(0.0, grid.Lx), rng.uniform(0.0, grid.Ly), p, q, grid.Lx, grid.Ly);
    return loops;
}

struct CocycleResult {
    Mat2 transport;
    GeodesicLoop loop;
    int steps = 0;
    double truncation_estimate = 0.0; // Richardson estimate from step halving
    double unitarity_drift = 0.0;     // ||C C* - Id||_F of the raw result
};

// Exact restriction of a connection to a closed geodesic: A(t) as a finite
// Fourier series sum_nu d_nu e^{2 pi i nu t / L}.
class CocycleIntegrator {
public:
    CocycleIntegrator(const Connection& A, const GeodesicLoop& loop) : loop_(loop) {
        if (!A.metric().is_flat()) throw Precondition("CocycleIntegrator: transport requires the flat metric");
        const TorusGrid& g = A.grid();
        if (g.Lx != loop.Lx || g.Ly != loop.Ly) throw GridMismatch("CocycleIntegrator: loop periods mismatch");
        nu_max_ = (g.nx / 2) * std::abs(loop.p) + (g.ny / 2) * std::abs(loop.q);
        coeff_.assign(static_cast<std::size_t>(2 * nu_max_ + 1), Mat2::zero());

        const MatGrid spec_plus = fft2(A.plus());
        const MatGrid spec_minus = fft2(A.minus());
        accumulate(spec_plus, std::polar(1.0, loop.theta()), g);
        accumulate(spec_minus, std::polar(1.0, -loop.theta()), g);
    }

    // A at loop time t (exact trigonometric value).
    Mat2 at(double t) const {
        const double L = loop_.length();
        std::vector<Complex> ph(static_cast<std::size_t>(nu_max_ + 1));
        ph[0] = Complex(1.0);
        const Complex rot = std::polar(1.0, kTwoPi * t / L);
        for (int nu = 1; nu <= nu_max_; ++nu) ph[static_cast<std::size_t>(nu)] = ph[static_cast<std::size_t>(nu - 1)] * rot;
        Mat2 acc;
        for (int nu = -nu_max_; nu <= nu_max_; ++nu) {
            const Mat2& d = coeff_[static_cast<std::size_t>(nu + nu_max_)];
            if (d.norm_sq() == 0.0) continue;
            const Complex w = nu >= 0 ? ph[static_cast<std::size_t>(nu)] : std::conj(ph[static_cast<std::size_t>(-nu)]);
            acc += d * w;
        }
        return acc;
    }

    // RK4 for C' = -A(t) C from 0 to t.
    Mat2 integrate(double t, int steps) const {
        if (steps < 1) throw Precondition("CocycleIntegrator: steps must be positive");
        const double h = t / steps;
        Mat2 C = Mat2::identity();
        Mat2 A0 = at(0.0) * Complex(-1.0);
        for (int s = 0; s < steps; ++s) {
            const double t0 = s * h;
            const Mat2 Ah = at(t0 + 0.5 * h) * Complex(-1.0);
            const Mat2 A1 = at(t0 + h) * Complex(-1.0);
            const Mat2 k1 = A0 * C;
            const Mat2 k2 = Ah * (C + (0.5 * h) * k1);
            const Mat2 k3 = Ah * (C + (0.5 * h) * k2);
            const Mat2 k4 = A1 * (C + h * k3);
            C += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            A0 = A1;
        }
        return C;
    }

    const GeodesicLoop& loop() const { return loop_; }

private:
    void accumulate(const MatGrid& spec, Complex theta_phase, const TorusGrid& g) {
        for (int j = 0; j < g.ny; ++j) {
            for (int i = 0; i < g.nx; ++i) {
                const Mat2& c = spec.at(i, j);
                if (c.norm_sq() == 0.0) continue;
                // Nyquist slots split between +-n/2 along each axis.
                const int kx0 = freq_of(i, g.nx), ky0 = freq_of(j, g.ny);
                const bool sx = std::abs(kx0) == g.nx / 2, sy = std::abs(ky0) == g.ny / 2;
                for (int a = 0; a < (sx ? 2 : 1); ++a) {
                    const int kx = sx ? (a == 0 ? g.nx / 2 : -g.nx / 2) : kx0;
                    for (int b = 0; b < (sy ? 2 : 1); ++b) {
                        const int ky = sy ? (b == 0 ? g.ny / 2 : -g.ny / 2) : ky0;
                        const double w = (sx ? 0.5 : 1.0) * (sy ? 0.5 : 1.0);
                        const Complex base =
                            std::polar(w, kTwoPi * (kx * loop_.x0 / g.Lx + ky * loop_.y0 / g.Ly));
                        const int nu = kx * loop_.p + ky * loop_.q;
                        coeff_[static_cast<std::size_t>(nu + nu_max_)] += c * (base * theta_phase);
                    }
                }
            }
        }
    }

    GeodesicLoop loop_;
    int nu_max_ = 0;
    std::vector<Mat2> coeff_;
};

// One integration with a step-halving truncation estimate. The returned
// matrix is the raw fine-step result; unitarity drift is reported, never
// silently repaired.
inline CocycleResult parallel_cocycle(const Connection& A, const GeodesicLoop& loop, double t, int steps) {
    if (steps < 16) throw Precondition("parallel_cocycle: steps must be >= 16");
    const CocycleIntegrator integ(A, loop);
    const Mat2 coarse = integ.integrate(t, steps / 2);
    const Mat2 fine = integ.integrate(t, steps);
    CocycleResult r;
    r.transport = fine;
    r.loop = loop;
    r.steps = steps;
    r.truncation_estimate = (fine - coarse).norm() / 15.0;
    r.unitarity_drift = unitary_defect(fine);
    return r;
}

struct HolonomyRow {
    GeodesicLoop loop;
    int steps = 0;
    double defect = 0.0;
    double unitarity_drift = 0.0;
    double truncation_estimate = 0.0;
};

struct HolonomyReport {
    std::vector<HolonomyRow> rows;
    double max_defect = 0.0;
    double mean_defect = 0.0;
};

// || C(L) - Id ||_F per loop, with the step count doubled until the
// Richardson truncation estimate drops below 1e-9 * L. base_density sets
// the starting step count per unit length.
inline HolonomyReport holonomy_defect(const Connection& A, const std::vector<GeodesicLoop>& loops,
                                      int base_density = 64) {
    if (loops.empty()) throw Precondition("holonomy_defect: no loops");
    if (base_density < 16) throw Precondition("holonomy_defect: density must be >= 16");
    HolonomyReport rep;
    rep.rows.reserve(loops.size());
    double sum = 0.0;
    for (const auto& loop : loops) {
        const CocycleIntegrator integ(A, loop);
        const double L = loop.length();
        const double target = 1e-9 * L;
        int steps = base_density * std::max(1, static_cast<int>(std::ceil(L)));
        Mat2 current = integ.integrate(L, steps);
        double estimate;
        for (;;) {
            const Mat2 refined = integ.integrate(L, 2 * steps);
            estimate = (refined - current).norm() / 15.0;
            current = refined;
            steps *= 2;
            if (estimate <= target || steps >= (1 << 22)) break;
        }
        HolonomyRow row;
        row.loop = loop;
        row.steps = steps;
        row.defect = (current - Mat2::identity()).norm();
        row.unitarity_drift = unitary_defect(current);
        row.truncation_estimate = estimate;
        rep.rows.push_back(row);
        rep.max_defect = std::max(rep.max_defect, row.defect);
        sum += row.defect;
    }
    rep.mean_defect = sum / static_cast<double>(rep.rows.size());
    return rep;
}

// Coboundary value u(phi_t(x,v)) u(x,v)^{-1}.
inline Mat2 cocycle_from_u(const ThetaField& u, const GeodesicLoop& loop, double t) {
    opdetail::require_unitary(u, "cocycle_from_u");
    const FieldEvaluator ev(u);
    const double th = loop.theta();
    const Mat2 end = ev(loop.x0 + t * loop.vx(), loop.y0 + t * loop.vy(), th);
    const Mat2 start = ev(loop.x0, loop.y0, th);
    return end * start.inverse();
}

inline void write_holonomy_csv(std::ostream& os, const HolonomyReport& rep) {
    os << "loop_p,loop_q,x0,y0,length,steps,defect_fro,unitarity_drift\n";
    char buf[256];
    for (const auto& r : rep.rows) {
        std::snprintf(buf, sizeof buf, "%d,%d,%.17g,%.17g,%.17g,%d,%.12e,%.12e\n", r.loop.p, r.loop.q, r.loop.x0,
                      r.loop.y0, r.loop.length(), r.steps, r.defect, r.unitarity_drift);
        os << buf;
    }
}

} // namespace tconn
