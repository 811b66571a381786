#pragma once

// Construction and dismantling of transparent SU(2) connections.
//
// Raising: from an involution g (equivalently the projector pi onto its
// i-eigenline L) and normalized sections alpha, beta with
// |alpha|^2 + |beta|^2 = 1, the degree-one unitary
//
//     a = e^{i theta} (alpha pi - beta) + e^{-i theta} (conj(alpha) pi_perp + beta*)
//
// satisfies a^{-1} V(a) = g. If L is holomorphic for the twisted dbar of a
// connection A with transport solution b, then u = a b transports for the
// new connection -X(u) u^{-1}, which again has only modes +-1.
//
// Lowering: for a degree-N pure-parity transport solution b, the top block
// b_{-N} has pointwise rank one; the line it spans is holomorphic and
// choosing g with that line as i-eigenspace makes a b drop to degree N-1.

#include <functional>
#include <optional>
#include <utility>

#include "tconn/transport.hpp"
#include "tconn/weierstrass.hpp"

namespace tconn {

enum class SeedProvenance { constant, weierstrass, extracted, solver };

inline const char* to_string(SeedProvenance p) {
    switch (p) {
        case SeedProvenance::constant: return "constant";
        case SeedProvenance::weierstrass: return "weierstrass";
        case SeedProvenance::extracted: return "extracted";
        case SeedProvenance::solver: return "solver";
    }
    return "unknown";
}

// A line subbundle of the trivial C^2 bundle, stored as the grid of
// Hermitian rank-1 projectors onto it.
class LineSeed {
public:
    LineSeed(Metric metric, MatGrid projector, SeedProvenance provenance, double tol = 1e-10)
        : metric_(std::move(metric)), pi_(std::move(projector)), provenance_(provenance) {
        const auto& g = metric_.grid;
        if (pi_.nx != g.nx || pi_.ny != g.ny) throw GridMismatch("LineSeed: grid mismatch");
        for (const auto& p : pi_.v) {
            if ((p * p - p).norm() > tol || hermitian_defect(p) > tol || std::abs(p.trace() - Complex(1.0)) > tol)
                throw NotAProjector("LineSeed: field is not a rank-1 Hermitian projector field");
        }
    }

    static LineSeed constant(const Metric& metric) {
        return LineSeed(metric, MatGrid::constant(metric.grid.nx, metric.grid.ny, Mat2(1.0, 0.0, 0.0, 0.0)),
                        SeedProvenance::constant);
    }

    const Metric& metric() const { return metric_; }
    const MatGrid& projector() const { return pi_; }
    SeedProvenance provenance() const { return provenance_; }

    MatGrid projector_perp() const {
        MatGrid r(pi_.nx, pi_.ny);
        for (std::size_t i = 0; i < pi_.v.size(); ++i) r.v[i] = Mat2::identity() - pi_.v[i];
        return r;
    }

    // g with i-eigenspace L = image(pi): g = i (2 pi - Id).
    InvolutionField involution() const {
        MatGrid g(pi_.nx, pi_.ny);
        for (std::size_t i = 0; i < pi_.v.size(); ++i) g.v[i] = Complex(0.0, 1.0) * (2.0 * pi_.v[i] - Mat2::identity());
        return InvolutionField(metric_, std::move(g));
    }

private:
    Metric metric_;
    MatGrid pi_;
    SeedProvenance provenance_;
};

// ---- seeds from meromorphic data ---------------------------------------------

// Projector field of the line [f1(z) : f2(z)], evaluated in the chart with
// the larger component so poles are crossed smoothly.
inline LineSeed line_from_meromorphic(const Metric& metric,
                                      const std::function<std::pair<Complex, Complex>(Complex)>& f,
                                      SeedProvenance provenance = SeedProvenance::weierstrass) {
    const auto& g = metric.grid;
    MatGrid pi(g.nx, g.ny);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            const auto [f1, f2] = f(Complex(g.x(i), g.y(j)));
            std::array<Complex, 2> v;
            if (std::abs(f1) >= std::abs(f2)) {
                if (std::abs(f1) == 0.0) throw DegenerateChart("line_from_meromorphic: both components vanish");
                v = {Complex(1.0), f2 / f1};
            } else {
                v = {f1 / f2, Complex(1.0)};
            }
            const double n2 = std::norm(v[0]) + std::norm(v[1]);
            pi.at(i, j) = outer(v, v) * (1.0 / n2);
        }
    }
    return LineSeed(metric, std::move(pi), provenance);
}

// The canonical test seed: the line [P(z) : 1] of the square-lattice
// Weierstrass function. Requires the unit square torus.
inline LineSeed weierstrass_line(const Metric& metric, int truncation_radius = Weierstrass::kDefaultRadius) {
    if (metric.grid.Lx != 1.0 || metric.grid.Ly != 1.0)
        throw Precondition("weierstrass_line: requires the unit square torus");
    const Weierstrass wp(truncation_radius);
    return line_from_meromorphic(
        metric,
        [&wp](Complex z) -> std::pair<Complex, Complex> {
            try {
                return {wp.p(z), Complex(1.0)};
            } catch (const NearPole&) {
                return {Complex(1.0), Complex(0.0)}; // exact pole limit of [P : 1]
            }
        },
        SeedProvenance::weierstrass);
}

// ---- holomorphicity residuals ---------------------------------------------------

struct LineResiduals {
    double projector_defect; // || pi_perp dbar_A pi ||         (condition on the projector)
    double star_defect;      // || -star d_A g - (d_A g) g ||   (condition on the involution)
};

// Both defects vanish together (they are equivalent conditions, with
// star_defect = 4 sqrt(2) projector_defect in exact arithmetic); the
// coupling is asserted as an internal consistency check.
inline LineResiduals holomorphic_line_residual(const Connection& A, const LineSeed& seed) {
    if (!(A.metric() == seed.metric())) throw GridMismatch("holomorphic_line_residual: metric mismatch");
    const Metric& metric = A.metric();

    const ThetaField pif = ThetaField::single_mode(metric, 0, seed.projector());
    const MatGrid dbar = dbar_A(A, pif).mode_or_zero(-1);
    const double r3 = quad_norm(aa_matmul(seed.projector_perp(), dbar), metric);

    const ThetaField gf = seed.involution().as_field();
    const ThetaField af = A.as_field();
    const ThetaField dag = add(x_derivative(gf), sub(multiply(af, gf), multiply(gf, af)));
    const ThetaField lhs = scale(hodge_star_pm(dag), Complex(-1.0));
    const double r1 = quad_norm(sub(lhs, multiply(dag, gf)));

    if (r1 > 10.0 * r3 + 1e-10 || r3 > 10.0 * r1 + 1e-10)
        throw Error("holomorphic_line_residual: equivalence coupling violated (r1 vs r3)");
    return {r3, r1};
}

// ---- the degree-one factor -------------------------------------------------------

// Sections (alpha, beta) of the raising factor. alpha is a scalar
// e^{i theta} coefficient; beta is the block matrix of a map L -> U, also an
// e^{i theta} coefficient, satisfying beta = pi_perp beta pi.
struct BacklundParams {
    std::vector<Complex> alpha;
    MatGrid beta;

    static BacklundParams unit_alpha(const TorusGrid& grid) {
        BacklundParams p;
        p.alpha.assign(grid.npoints(), Complex(1.0));
        p.beta = MatGrid(grid.nx, grid.ny);
        return p;
    }

    // Scale so |alpha|^2 + tr(beta beta^dagger) = 1 pointwise.
    BacklundParams normalized() const {
        BacklundParams p;
        p.alpha.resize(alpha.size());
        p.beta = MatGrid(beta.nx, beta.ny);
        for (std::size_t i = 0; i < alpha.size(); ++i) {
            const double n2 = std::norm(alpha[i]) + (beta.v[i] * beta.v[i].adjoint()).trace().real();
            if (n2 < 1e-24) throw NotNormalized("BacklundParams: alpha and beta vanish together");
            const double s = 1.0 / std::sqrt(n2);
            p.alpha[i] = alpha[i] * s;
            p.beta.v[i] = beta.v[i] * s;
        }
        return p;
    }
};

// Degree-one unitary a with a^{-1} V(a) = g, kernel of a_{-1} equal to L and
// kernel of a_{+1} equal to U.
inline ThetaField construct_a(const LineSeed& seed, const BacklundParams& params) {
    const Metric& metric = seed.metric();
    const auto& g = metric.grid;
    if (params.alpha.size() != g.npoints() || params.beta.nx != g.nx || params.beta.ny != g.ny)
        throw GridMismatch("construct_a: params grid mismatch");

    const MatGrid pi = seed.projector();
    const MatGrid pip = seed.projector_perp();

    double norm_defect = 0.0, block_defect = 0.0;
    for (std::size_t i = 0; i < pi.v.size(); ++i) {
        const double n2 = std::norm(params.alpha[i]) + (params.beta.v[i] * params.beta.v[i].adjoint()).trace().real();
        norm_defect = std::max(norm_defect, std::abs(n2 - 1.0));
        block_defect = std::max(block_defect, (params.beta.v[i] - pip.v[i] * params.beta.v[i] * pi.v[i]).norm());
    }
    if (norm_defect > 1e-10)
        throw NotNormalized("construct_a: |alpha|^2 + |beta|^2 != 1 (call BacklundParams::normalized)");
    if (block_defect > 1e-8) throw Precondition("construct_a: beta is not in pi_perp . pi block form");

    ThetaField a(metric, -1, 1);
    MatGrid& up = a.mode(1);
    MatGrid& down = a.mode(-1);
    up = MatGrid(g.nx, g.ny);
    down = MatGrid(g.nx, g.ny);
    for (std::size_t i = 0; i < pi.v.size(); ++i) {
        up.v[i] = params.alpha[i] * pi.v[i] - params.beta.v[i];
        down.v[i] = std::conj(params.alpha[i]) * pip.v[i] + params.beta.v[i].adjoint();
    }
    a.unitary_tag = true;
    a.parity_tag = ParityTag::odd;
    if (unitarity_defect(a) > 1e-8) throw Error("construct_a: internal unitarity check failed");
    return a;
}

// ---- the transformation ------------------------------------------------------------

struct BacklundGates {
    double transport_in = 1e-7;     // residual of X(b) + A b on entry
    double seed_holomorphic = 1e-6; // projector defect of the seed line
    double connection = 1e-7;       // mode energy of -X(u)u* outside +-1
    double transport_out = 1e-7;    // residual of X(u) + A_F u on exit
};

struct BacklundResult {
    Connection connection;    // A_F
    ThetaField transport;     // u_F = a b
    double seed_residual;
    double connection_residual;
    double transport_residual;
    int degree_before;
    int degree_after;
};

inline BacklundResult backlund_transform(const Connection& A, const ThetaField& b, const LineSeed& seed,
                                         const BacklundParams& params, const BacklundGates& gates = {}) {
    const double r_in = transport_pde_residual(A, b);
    if (r_in > gates.transport_in)
        throw Precondition("backlund_transform: X(b) + A b residual " + std::to_string(r_in) + " above gate");
    const double r_seed = holomorphic_line_residual(A, seed).projector_defect;
    if (r_seed > gates.seed_holomorphic)
        throw SeedNotHolomorphic("backlund_transform: seed residual " + std::to_string(r_seed) + " above gate");

    const ThetaField a = construct_a(seed, params);
    ThetaField u = multiply(a, b);
    u.unitary_tag = true;

    const ThetaField raw = connection_raw_from_u(u);
    const double r_conn = is_connection_residual(raw);
    if (r_conn > gates.connection)
        throw PipelineResidual("backlund_transform: connection residual " + std::to_string(r_conn) + " above gate");
    const double scale = std::max(raw.mode_or_zero(1).max_fro(), A.plus().max_fro());
    Connection AF = project_connection_shape(raw, gates.connection, scale, "backlund_transform");

    const double r_out = transport_pde_residual(AF, u);
    if (r_out > gates.transport_out)
        throw PipelineResidual("backlund_transform: transport residual " + std::to_string(r_out) + " above gate");

    const int deg_b = degree_of(b);
    const int deg_u = degree_of(u);
    if (deg_u > deg_b + 1) throw PipelineResidual("backlund_transform: degree grew by more than one");

    return {std::move(AF), std::move(u), r_seed, r_conn, r_out, deg_b, deg_u};
}

// ---- degree lowering ----------------------------------------------------------------

// Fixed candidate directions for the section s = b_{-N} xi: four real and
// four complex-phase unit vectors. The winner maximizes the minimum of
// |s(x)| over the grid, which keeps the choice deterministic and away from
// zeros of the section.
inline const std::array<std::array<Complex, 2>, 8>& xi_candidates() {
    static const double r = 1.0 / std::sqrt(2.0);
    static const std::array<std::array<Complex, 2>, 8> xs = {{
        {Complex(1.0), Complex(0.0)},
        {Complex(0.0), Complex(1.0)},
        {Complex(r), Complex(r)},
        {Complex(r), Complex(-r)},
        {Complex(r), Complex(0.0, r)},
        {Complex(r), Complex(0.0, -r)},
        {Complex(0.0, r), Complex(r)},
        {Complex(0.0, -r), Complex(r)},
    }};
    return xs;
}

// Line spanned by the image of the top Fourier block b_{-N}.
inline LineSeed extract_top_line(const ThetaField& b, double tol = 1e-6) {
    const int N = degree_of(b);
    if (N < 1) throw Precondition("extract_top_line: field has degree 0");
    if (parity_of(b) == Parity::mixed) throw Precondition("extract_top_line: field has mixed parity");

    const MatGrid top = b.mode_or_zero(-N);
    const auto& cands = xi_candidates();
    int best = -1;
    double best_min = -1.0;
    for (int c = 0; c < 8; ++c) {
        double mn = 1e300;
        for (const auto& m : top.v) mn = std::min(mn, vec_norm(apply(m, cands[static_cast<std::size_t>(c)])));
        if (mn > best_min) {
            best_min = mn;
            best = c;
        }
    }
    if (best_min < tol)
        throw VanishingSection("extract_top_line: best section has min |s| = " + std::to_string(best_min));

    const auto& xi = cands[static_cast<std::size_t>(best)];
    MatGrid pi(top.nx, top.ny);
    double rank_defect_sq = 0.0;
    for (std::size_t i = 0; i < top.v.size(); ++i) {
        auto s = apply(top.v[i], xi);
        const double n = vec_norm(s);
        s[0] /= n;
        s[1] /= n;
        pi.v[i] = outer(s, s);
        rank_defect_sq += ((Mat2::identity() - pi.v[i]) * top.v[i]).norm_sq();
    }
    const double rank_defect = std::sqrt(rank_defect_sq / static_cast<double>(top.v.size()));
    if (rank_defect > tol * (top.rms_fro() + 1e-300))
        throw RankDefect("extract_top_line: top block is not pointwise rank one");

    LineSeed seed(b.metric(), std::move(pi), SeedProvenance::extracted);
    const Connection Ab = connection_from_u(b, 1e-7);
    const double r = holomorphic_line_residual(Ab, seed).projector_defect;
    if (r > 1e-6)
        throw SeedNotHolomorphic("extract_top_line: extracted line residual " + std::to_string(r) + " above 1e-6");
    return seed;
}

struct LowerResult {
    Connection connection; // A'
    ThetaField transport;  // b' = a b, degree <= N-1
    int degree_before;
    int degree_after;
};

// One Backlund lowering step: strictly reduces the degree of a pure-parity
// transport solution.
inline LowerResult lower_degree(const Connection& A, const ThetaField& b, const BacklundGates& gates = {}) {
    const double r_in = transport_pde_residual(A, b);
    if (r_in > gates.transport_in)
        throw Precondition("lower_degree: X(b) + A b residual " + std::to_string(r_in) + " above gate");
    const int N = degree_of(b);
    if (N < 1) throw Precondition("lower_degree: field already has degree 0");

    const LineSeed seed = extract_top_line(b);
    const ThetaField a = construct_a(seed, BacklundParams::unit_alpha(b.grid()));
    const ThetaField product = multiply(a, b);

    double tail_sq = 0.0;
    for (int m : {N, -N, N + 1, -(N + 1)}) {
        const double r = quad_norm(product.mode_or_zero(m), b.metric());
        tail_sq += r * r;
    }
    const double tail = std::sqrt(tail_sq);
    if (tail > 1e-8 * quad_norm(b))
        throw DegreeNotLowered("lower_degree: tail energy " + std::to_string(tail) + " above gate");

    ThetaField lowered = truncate_modes(product, -(N - 1), N - 1);
    lowered.unitary_tag = true;
    lowered.parity_tag = product.parity_tag;

    const ThetaField raw = connection_raw_from_u(lowered);
    const double r_conn = is_connection_residual(raw);
    if (r_conn > gates.connection)
        throw PipelineResidual("lower_degree: connection residual " + std::to_string(r_conn) + " above gate");
    // The shape noise of a nearly trivial A' is inherited from the input
    // pipeline, so the gate references the input connection's scale.
    const double scale = std::max(raw.mode_or_zero(1).max_fro(), A.plus().max_fro());
    Connection Ap = project_connection_shape(raw, gates.connection, scale, "lower_degree");

    const int degree_after = degree_of(lowered);
    return {std::move(Ap), std::move(lowered), N, degree_after};
}

// ---- holomorphic-line search ------------------------------------------------------

// Energy E(pi) = || pi_perp (dbar pi + [A_{-1}, pi]) ||^2 under the
// quadrature inner product, defined for arbitrary matrix fields so that
// finite-difference probes are meaningful.
inline double line_energy(const Connection& A, const MatGrid& pi) {
    const Metric& metric = A.metric();
    const QuadratureWeight q(metric);
    const MatGrid M = spectral_dbar(pi, metric.grid) + matmul(A.minus(), pi) - matmul(pi, A.minus());
    double e = 0.0;
    for (std::size_t i = 0; i < pi.v.size(); ++i) {
        const Mat2 R = (Mat2::identity() - pi.v[i]) * M.v[i];
        e += kTwoPi * q.w[i] * R.norm_sq();
    }
    return e;
}

// Gradient G with dE(D) = sum_p Re trace(D_p G_p) for Hermitian directions D.
inline MatGrid line_energy_gradient(const Connection& A, const MatGrid& pi) {
    const Metric& metric = A.metric();
    const QuadratureWeight q(metric);
    const MatGrid& Am = A.minus();
    const MatGrid M = spectral_dbar(pi, metric.grid) + matmul(Am, pi) - matmul(pi, Am);

    MatGrid R(pi.nx, pi.ny), S(pi.nx, pi.ny);
    for (std::size_t i = 0; i < pi.v.size(); ++i) {
        const Mat2 pperp = Mat2::identity() - pi.v[i];
        R.v[i] = pperp * M.v[i];
        S.v[i] = (R.v[i].adjoint() * pperp) * (kTwoPi * q.w[i]); // weight folded in
    }

    MatGrid G(pi.nx, pi.ny);
    const MatGrid dS = spectral_dbar(S, metric.grid);
    for (std::size_t i = 0; i < pi.v.size(); ++i) {
        const Mat2 raw = (M.v[i] * R.v[i].adjoint()) * (-kTwoPi * q.w[i]) - dS.v[i] +
                         (S.v[i] * Am.v[i] - Am.v[i] * S.v[i]);
        G.v[i] = raw + raw.adjoint(); // 2 * Hermitian part
    }
    return G;
}

struct DescentPoint {
    int iteration;
    double energy;
};

struct LineSearchResult {
    bool success = false;
    double residual = 0.0; // holomorphic_line_residual of the best seed
    LineSeed seed;
    std::vector<DescentPoint> curve; // best attempt's descent curve
    int attempts_used = 0;
};

namespace backdetail {

inline MatGrid random_line(const Metric& metric, SplitMix64& rng) {
    const auto& g = metric.grid;
    for (int tries = 0; tries < 64; ++tries) {
        // Band-limited random C^2 section, |k| <= 2 per axis.
        std::vector<std::array<Complex, 2>> v(g.npoints(), {Complex(0.0), Complex(0.0)});
        for (int comp = 0; comp < 2; ++comp) {
            for (int ky = -2; ky <= 2; ++ky) {
                for (int kx = -2; kx <= 2; ++kx) {
                    const double scale = 1.0 / (1.0 + kx * kx + ky * ky);
                    const Complex c(rng.normal() * scale, rng.normal() * scale);
                    for (int j = 0; j < g.ny; ++j)
                        for (int i = 0; i < g.nx; ++i)
                            v[static_cast<std::size_t>(j) * g.nx + i][static_cast<std::size_t>(comp)] +=
                                c * std::polar(1.0, kTwoPi * (kx * g.x(i) / g.Lx + ky * g.y(j) / g.Ly));
                }
            }
        }
        double mn = 1e300, ms = 0.0;
        for (const auto& w : v) {
            const double n = vec_norm(w);
            mn = std::min(mn, n);
            ms += n * n;
        }
        if (mn < 0.25 * std::sqrt(ms / static_cast<double>(v.size()))) continue; // too close to a zero
        MatGrid pi(g.nx, g.ny);
        for (std::size_t i = 0; i < v.size(); ++i) {
            auto w = v[i];
            const double n = vec_norm(w);
            w[0] /= n;
            w[1] /= n;
            pi.v[i] = outer(w, w);
        }
        return pi;
    }
    throw Error("random_line: could not draw a nonvanishing section");
}

inline MatGrid retract(const MatGrid& m) {
    MatGrid r(m.nx, m.ny);
    for (std::size_t i = 0; i < m.v.size(); ++i) r.v[i] = nearest_projector(m.v[i]);
    return r;
}

// Projection onto the tangent space of the projector manifold at pi: keep
// the off-diagonal blocks pi (.) pi_perp + pi_perp (.) pi.
inline MatGrid tangent_project(const MatGrid& G, const MatGrid& pi) {
    MatGrid t(G.nx, G.ny);
    for (std::size_t i = 0; i < G.v.size(); ++i) {
        const Mat2& p = pi.v[i];
        const Mat2 q = Mat2::identity() - p;
        t.v[i] = p * G.v[i] * q + q * G.v[i] * p;
    }
    return t;
}

// Inverse-Laplacian (Sobolev) smoothing of a gradient field. The energy's
// curvature grows like |k|^2, so raw gradient steps are throttled by the
// highest modes; dividing by 1 + sigma |k|^2 equalizes the spectrum.
inline MatGrid sobolev_smooth(const MatGrid& G, const TorusGrid& grid, double sigma) {
    MatGrid c = fft2(G);
    for (int j = 0; j < c.ny; ++j) {
        const int ky = freq_of(j, c.ny);
        for (int i = 0; i < c.nx; ++i) {
            const int kx = freq_of(i, c.nx);
            const double wx = kTwoPi * kx / grid.Lx, wy = kTwoPi * ky / grid.Ly;
            c.at(i, j) *= 1.0 / (1.0 + sigma * (wx * wx + wy * wy));
        }
    }
    return ifft2(c);
}

} // namespace backdetail

// Multi-start projected gradient descent for a dbar_A-holomorphic line.
// Returns the best seed found; `success` reflects the residual gate 1e-5.
// Failure is reported in the result rather than thrown, since existence of a
// reachable line is not guaranteed for every connection.
inline LineSearchResult find_holomorphic_line(const Connection& A, int attempts, std::uint64_t seed,
                                              int max_iterations = 2000) {
    if (attempts < 1) throw Precondition("find_holomorphic_line: attempts must be >= 1");
    SplitMix64 rng(seed);
    const Metric& metric = A.metric();

    std::optional<LineSeed> best_seed;
    double best_energy = 1e300;
    std::vector<DescentPoint> best_curve;
    int used = 0;

    for (int attempt = 0; attempt < attempts; ++attempt) {
        ++used;
        MatGrid pi = backdetail::random_line(metric, rng);
        double energy = line_energy(A, pi);
        double step = 0.5;
        std::vector<DescentPoint> curve;
        curve.push_back({0, energy});

        for (int it = 1; it <= max_iterations; ++it) {
            const MatGrid G = line_energy_gradient(A, pi);
            // Preconditioned tangent direction; the sandwich keeps the
            // smoothing positive definite on the tangent space, so D stays
            // a descent direction.
            const MatGrid D = backdetail::tangent_project(
                backdetail::sobolev_smooth(backdetail::tangent_project(G, pi), metric.grid, 0.25), pi);
            double slope = 0.0;
            for (std::size_t i = 0; i < G.v.size(); ++i) slope += (G.v[i] * D.v[i]).trace().real();
            if (slope < 1e-28) break;

            bool accepted = false;
            for (int shrink = 0; shrink < 40; ++shrink) {
                const MatGrid trial = backdetail::retract(pi - D * step);
                const double e_trial = line_energy(A, trial);
                if (e_trial <= energy - 1e-4 * step * slope) {
                    pi = trial;
                    energy = e_trial;
                    step *= 1.3;
                    accepted = true;
                    break;
                }
                step *= 0.5;
            }
            curve.push_back({it, energy});
            if (!accepted) break;
            if (energy < 1e-12) break; // residual ~ 1e-6, far below the gate
        }

        if (energy < best_energy) {
            best_energy = energy;
            best_curve = std::move(curve);
            best_seed = LineSeed(metric, backdetail::retract(pi), SeedProvenance::solver);
        }
        if (best_energy < 0.25e-10) break; // residual ~ 0.5e-5: gate met, stop early
    }

    LineSearchResult result{false, 0.0, *best_seed, std::move(best_curve), used};
    result.residual = holomorphic_line_residual(A, result.seed).projector_defect;
    result.success = result.residual <= 1e-5;
    return result;
}

// Throwing wrapper for callers that require a line.
inline LineSeed require_holomorphic_line(const Connection& A, int attempts, std::uint64_t seed,
                                         int max_iterations = 2000) {
    LineSearchResult r = find_holomorphic_line(A, attempts, seed, max_iterations);
    if (!r.success)
        throw NoLineFound("find_holomorphic_line: best residual " + std::to_string(r.residual) + " above 1e-5");
    return r.seed;
}

inline void write_descent_csv(std::ostream& os, const std::vector<DescentPoint>& curve) {
    os << "iteration,energy\n";
    char buf[64];
    for (const auto& p : curve) {
        std::snprintf(buf, sizeof buf, "%d,%.12e\n", p.iteration, p.energy);
        os << buf;
    }
}

} // namespace tconn
