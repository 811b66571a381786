#pragma once

// First-order operators on theta-mode fields over the conformal torus
// ds^2 = e^{2 lambda}(dx^2 + dy^2), and the residuals that certify the
// transport correspondence.
//
// The frame {X, H, V} of the unit tangent bundle acts on a mode
// u = h(x,y) e^{i n theta} through the raising/lowering pair
//
//   eta_minus(u) = e^{-(1+n) lambda} dbar(h e^{ n lambda}) e^{i(n-1) theta}
//   eta_plus(u)  = e^{ (n-1) lambda} d   (h e^{-n lambda}) e^{i(n+1) theta}
//
// with dbar = (d_x + i d_y)/2 and d = (d_x - i d_y)/2 computed spectrally;
// X = eta_plus + eta_minus, H = i(eta_plus - eta_minus), V = i m on mode m.
// The eta_plus formula is the conjugation mirror of eta_minus:
// eta_plus(conj u) = conj(eta_minus(u)).
//
// Inner product: <u, v> = sum_m 2 pi * sum_grid trace(u_m v_m^dagger)
// e^{2 lambda} dA (Riemannian measure of the Sasaki metric; modes are
// orthogonal with a 2 pi fiber factor each).

#include <map>

#include "tconn/theta_field.hpp"

namespace tconn {

// ---- quadrature -------------------------------------------------------------

// Per-point weight e^{2 lambda} * cell area; strictly positive, equal to the
// cell area on the flat torus.
struct QuadratureWeight {
    explicit QuadratureWeight(const Metric& metric)
        : w(metric.grid.npoints()), cell_area(metric.grid.cell_area()) {
        for (std::size_t i = 0; i < w.size(); ++i) w[i] = std::exp(2.0 * metric.lambda[i]) * cell_area;
    }
    std::vector<double> w;
    double cell_area;
};

inline Complex inner_product(const ThetaField& u, const ThetaField& v) {
    require_same_metric(u, v, "inner_product");
    const QuadratureWeight q(u.metric());
    Complex total(0.0);
    const int lo = std::max(u.mode_min(), v.mode_min());
    const int hi = std::min(u.mode_max(), v.mode_max());
    for (int m = lo; m <= hi; ++m) {
        const MatGrid& a = u.mode(m);
        const MatGrid& b = v.mode(m);
        Complex s(0.0);
        for (std::size_t i = 0; i < a.v.size(); ++i) s += (a.v[i] * b.v[i].adjoint()).trace() * q.w[i];
        total += kTwoPi * s;
    }
    return total;
}

inline double quad_norm(const ThetaField& u) {
    const QuadratureWeight q(u.metric());
    double s = 0.0;
    for (int m = u.mode_min(); m <= u.mode_max(); ++m) {
        const MatGrid& a = u.mode(m);
        for (std::size_t i = 0; i < a.v.size(); ++i) s += a.v[i].norm_sq() * q.w[i];
    }
    return std::sqrt(kTwoPi * s);
}

// Quadrature norm of a single mode coefficient grid.
inline double quad_norm(const MatGrid& g, const Metric& metric) {
    const QuadratureWeight q(metric);
    double s = 0.0;
    for (std::size_t i = 0; i < g.v.size(); ++i) s += g.v[i].norm_sq() * q.w[i];
    return std::sqrt(kTwoPi * s);
}

// ---- frame operators ----------------------------------------------------------

// V = d/dtheta: multiplies mode m by i m.
inline ThetaField vertical(const ThetaField& f) {
    ThetaField r(f.metric(), f.mode_min(), f.mode_max());
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) r.mode(m) = f.mode(m) * Complex(0.0, static_cast<double>(m));
    return r;
}

namespace opdetail {

inline std::vector<double> exp_lambda(const Metric& metric, double factor) {
    std::vector<double> e(metric.lambda.size());
    for (std::size_t i = 0; i < e.size(); ++i) e[i] = std::exp(factor * metric.lambda[i]);
    return e;
}

} // namespace opdetail

inline ThetaField eta_minus(const ThetaField& f) {
    const Metric& metric = f.metric();
    const bool flat = metric.is_flat();
    ThetaField r(metric, f.mode_min() - 1, f.mode_max() - 1);
    for (int n = f.mode_min(); n <= f.mode_max(); ++n) {
        if (flat) {
            r.mode(n - 1) = spectral_dbar(f.mode(n), metric.grid);
        } else {
            const auto win = opdetail::exp_lambda(metric, static_cast<double>(n));
            const auto wout = opdetail::exp_lambda(metric, -(1.0 + n));
            r.mode(n - 1) = scale_pointwise(spectral_dbar(scale_pointwise(f.mode(n), win), metric.grid), wout);
        }
    }
    return r;
}

inline ThetaField eta_plus(const ThetaField& f) {
    const Metric& metric = f.metric();
    const bool flat = metric.is_flat();
    ThetaField r(metric, f.mode_min() + 1, f.mode_max() + 1);
    for (int n = f.mode_min(); n <= f.mode_max(); ++n) {
        if (flat) {
            r.mode(n + 1) = spectral_d(f.mode(n), metric.grid);
        } else {
            const auto win = opdetail::exp_lambda(metric, -static_cast<double>(n));
            const auto wout = opdetail::exp_lambda(metric, n - 1.0);
            r.mode(n + 1) = scale_pointwise(spectral_d(scale_pointwise(f.mode(n), win), metric.grid), wout);
        }
    }
    return r;
}

// Geodesic vector field X = eta_plus + eta_minus.
inline ThetaField x_derivative(const ThetaField& f) { return add(eta_plus(f), eta_minus(f)); }

// Horizontal vector field H = i (eta_plus - eta_minus).
inline ThetaField h_derivative(const ThetaField& f) { return scale(sub(eta_plus(f), eta_minus(f)), Complex(0.0, 1.0)); }

// ---- twisted operators --------------------------------------------------------

inline ThetaField mu_plus(const Connection& A, const ThetaField& f) {
    if (!(A.metric() == f.metric())) throw GridMismatch("mu_plus: metric mismatch");
    ThetaField r = eta_plus(f);
    const MatGrid a1 = upsample2(A.plus());
    for (int n = f.mode_min(); n <= f.mode_max(); ++n)
        r.mode(n + 1) += downsample2(matmul(a1, upsample2(f.mode(n))));
    return r;
}

inline ThetaField mu_minus(const Connection& A, const ThetaField& f) {
    if (!(A.metric() == f.metric())) throw GridMismatch("mu_minus: metric mismatch");
    ThetaField r = eta_minus(f);
    const MatGrid am = upsample2(A.minus());
    for (int n = f.mode_min(); n <= f.mode_max(); ++n)
        r.mode(n - 1) += downsample2(matmul(am, upsample2(f.mode(n))));
    return r;
}

// ---- connection decomposition and the Hodge star ------------------------------

// Recover a Connection from pointwise theta-samples. Throws NotAConnection
// if theta-modes other than +-1 carry relative energy above tol.
inline Connection decompose_connection(const Metric& metric, const std::vector<MatGrid>& theta_samples,
                                       double tol = 1e-8) {
    const int T = static_cast<int>(theta_samples.size());
    if (T < 8) throw Precondition("decompose_connection: need at least 8 theta samples");
    const int half = T / 2;
    const ThetaField f = field_from_theta_samples(metric, theta_samples, -half + 1, half);
    double off = 0.0, total = 0.0;
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) {
        const double e = f.mode(m).sum_norm_sq();
        total += e;
        if (m != 1 && m != -1) off += e;
    }
    if (total > 0.0 && std::sqrt(off / total) > tol)
        throw NotAConnection("decompose_connection: theta-mode energy outside modes +-1");
    return Connection(metric, f.mode_or_zero(1), f.mode_or_zero(-1));
}

// Hodge star on connection 1-forms. The orientation convention is fixed by
// -star A = V(A): star acts as -i on the e^{+i theta} part and +i on the
// e^{-i theta} part, so star^2 = -Id.
inline Connection hodge_star(const Connection& A) {
    return Connection(A.metric(), A.plus() * Complex(0.0, -1.0), A.minus() * Complex(0.0, 1.0));
}

// Same convention applied modewise to any field supported on modes +-1.
inline ThetaField hodge_star_pm(const ThetaField& f) {
    ThetaField r(f.metric(), f.mode_min(), f.mode_max());
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) {
        if (m == 1)
            r.mode(m) = f.mode(m) * Complex(0.0, -1.0);
        else if (m == -1)
            r.mode(m) = f.mode(m) * Complex(0.0, 1.0);
        else if (f.mode(m).rms_fro() > 1e-14)
            throw Precondition("hodge_star_pm: field has modes outside +-1");
    }
    return r;
}

// Twisted Cauchy-Riemann operator on endomorphism-valued mode-0 fields:
// dbar_A(g) = eta_minus(g) + [A_{-1}, g], landing in mode -1.
inline ThetaField dbar_A(const Connection& A, const ThetaField& g) {
    if (!(A.metric() == g.metric())) throw GridMismatch("dbar_A: metric mismatch");
    for (int m = g.mode_min(); m <= g.mode_max(); ++m)
        if (m != 0 && g.mode(m).rms_fro() > 1e-14) throw NotMode0("dbar_A: input must be a mode-0 field");
    const MatGrid g0 = g.mode_or_zero(0);
    MatGrid out = eta_minus(g).mode_or_zero(-1);
    out += aa_matmul(A.minus(), g0) - aa_matmul(g0, A.minus());
    return ThetaField::single_mode(g.metric(), -1, std::move(out));
}

// ---- the correspondence maps ---------------------------------------------------

namespace opdetail {

inline void require_unitary(const ThetaField& u, const char* who, double tol = 1e-6) {
    if (!is_unitary(u, tol)) throw NotUnitary(std::string(who) + ": field reconstruction is not SU(2)");
}

} // namespace opdetail

// f = u^{-1} V(u) = u* V(u) for unitary u.
inline ThetaField f_from_u(const ThetaField& u) {
    opdetail::require_unitary(u, "f_from_u");
    return multiply(adjoint_field(u), vertical(u));
}

// Raw transport connection -X(u) u* as a full theta-field (all modes kept).
inline ThetaField connection_raw_from_u(const ThetaField& u) {
    opdetail::require_unitary(u, "connection_raw_from_u");
    return scale(multiply(x_derivative(u), adjoint_field(u)), Complex(-1.0));
}

// Modes +-1 of -X(u) u* as a Connection. The result satisfies the
// connection shape by construction only when u actually solves the
// transport equation; callers gate on is_connection_residual separately.
// shape_tol bounds the pointwise pairing defect relative to the field
// scale; pipeline callers pass their own residual gate here, since the
// discretization error of u is what both measure.
inline Connection connection_from_u(const ThetaField& u, double shape_tol = 1e-8) {
    const ThetaField raw = connection_raw_from_u(u);
    return Connection(u.metric(), raw.mode_or_zero(1), raw.mode_or_zero(-1), shape_tol);
}

// ---- residuals -----------------------------------------------------------------

// || V^2(A) + A || / ||A||; zero exactly when only modes +-1 carry energy.
inline double is_connection_residual(const ThetaField& raw) {
    const double denom = quad_norm(raw);
    if (denom == 0.0) return 0.0;
    return quad_norm(add(vertical(vertical(raw)), raw)) / denom;
}

// || H(f) + V(X(f)) - [X(f), f] || / (1 + ||f||^2).
inline double mypde_residual(const ThetaField& f) {
    const ThetaField xf = x_derivative(f);
    const ThetaField lhs = add(h_derivative(f), vertical(xf));
    const ThetaField bracket = sub(multiply(xf, f), multiply(f, xf));
    const double nf = quad_norm(f);
    return quad_norm(sub(lhs, bracket)) / (1.0 + nf * nf);
}

// || X(u) + A u || / ||u||, with the connection given as a theta-field so
// arbitrary (not necessarily mode +-1) gauge fields can be measured.
inline double transport_pde_residual(const ThetaField& A, const ThetaField& u) {
    require_same_metric(A, u, "transport_pde_residual");
    const double denom = quad_norm(u);
    if (denom == 0.0) return 0.0;
    return quad_norm(add(x_derivative(u), multiply(A, u))) / denom;
}

inline double transport_pde_residual(const Connection& A, const ThetaField& u) {
    return transport_pde_residual(A.as_field(), u);
}

// Per-mode quadrature norms of X(u) + A u.
inline std::map<int, double> transport_pde_mode_residuals(const Connection& A, const ThetaField& u) {
    const ThetaField defect = add(x_derivative(u), multiply(A.as_field(), u));
    std::map<int, double> r;
    for (int m = defect.mode_min(); m <= defect.mode_max(); ++m)
        r[m] = quad_norm(defect.mode(m), defect.metric());
    return r;
}

// ---- shape projection ---------------------------------------------------------

// Modes +-1 of a raw gauge field as a Connection. The pointwise shape
// defect (pairing and trace) is measured first and gated against the data
// scale; only then is the deterministic projection onto the connection
// shape applied. Nothing is repaired silently: the gate bounds the
// projection distance, and callers re-measure the projected object through
// their own residuals.
inline Connection project_connection_shape(const ThetaField& raw, double gate, double scale, const char* who) {
    const MatGrid plus_raw = raw.mode_or_zero(1);
    const MatGrid minus_raw = raw.mode_or_zero(-1);
    double defect = 0.0;
    for (std::size_t i = 0; i < plus_raw.v.size(); ++i) {
        defect = std::max(defect, (minus_raw.v[i] + plus_raw.v[i].adjoint()).norm());
        defect = std::max(defect, std::abs(plus_raw.v[i].trace()));
    }
    const double bound = gate * (1.0 + scale);
    if (defect > bound)
        throw PipelineResidual(std::string(who) + ": connection shape defect " + std::to_string(defect) +
                               " above " + std::to_string(bound));
    MatGrid plus(plus_raw.nx, plus_raw.ny);
    for (std::size_t i = 0; i < plus.v.size(); ++i) {
        Mat2 p = 0.5 * (plus_raw.v[i] - minus_raw.v[i].adjoint());
        p -= 0.5 * p.trace() * Mat2::identity();
        plus.v[i] = p;
    }
    return Connection::from_plus(raw.metric(), plus);
}

// ---- gauge action ----------------------------------------------------------------

// Gauge transformation by a base-only unitary w:
//   A  |->  w* A w + w* X(w),
// which pairs solutions as u |-> w* u and conjugates holonomies by w at the
// base point (so transparency defects are preserved). shape_tol bounds the
// product-truncation noise admitted before the result is projected back
// onto the exact connection shape.
inline Connection gauge_transform(const Connection& A, const ThetaField& w, double shape_tol = 1e-7) {
    if (!(A.metric() == w.metric())) throw GridMismatch("gauge_transform: metric mismatch");
    for (int m = w.mode_min(); m <= w.mode_max(); ++m)
        if (m != 0 && w.mode(m).rms_fro() > 1e-14) throw NotMode0("gauge_transform: w must be a mode-0 field");
    opdetail::require_unitary(w, "gauge_transform");
    const ThetaField wstar = adjoint_field(w);
    const ThetaField conj = multiply(multiply(wstar, A.as_field()), w);
    const ThetaField shift = multiply(wstar, x_derivative(w));
    const ThetaField total = add(conj, shift);
    const double scale = std::max(total.mode_or_zero(1).max_fro(), A.plus().max_fro());
    return project_connection_shape(total, shape_tol, scale, "gauge_transform");
}

} // namespace tconn
