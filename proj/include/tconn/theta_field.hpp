#pragma once

// Matrix-valued functions on the unit tangent bundle of a flat-ish torus,
// stored as a finite Fourier series in the fiber angle theta:
//
//     u(x, y, theta) = sum_{m = mode_min}^{mode_max} u_m(x, y) e^{i m theta}
//
// with each coefficient u_m held on the periodic base grid. The coefficient
// stored for mode m is the plain e^{i m theta} coefficient h; conformal-factor
// weights e^{n lambda} are applied inside the operators that need them, never
// baked into the stored data.

#include <map>
#include <optional>
#include <vector>

#include "tconn/fft.hpp"

namespace tconn {

enum class Parity { even, odd, mixed };
enum class ParityTag { none, even, odd };

class ThetaField {
public:
    ThetaField(Metric metric, int mode_min, int mode_max)
        : metric_(std::move(metric)), mode_min_(mode_min), mode_max_(mode_max) {
        if (mode_min_ > mode_max_) throw Error("ThetaField: empty mode range");
        modes_.assign(static_cast<std::size_t>(mode_max_ - mode_min_ + 1),
                      MatGrid(metric_.grid.nx, metric_.grid.ny));
    }

    static ThetaField constant(const Metric& metric, const Mat2& value) {
        ThetaField f(metric, 0, 0);
        f.mode(0) = MatGrid::constant(metric.grid.nx, metric.grid.ny, value);
        return f;
    }

    static ThetaField single_mode(const Metric& metric, int m, MatGrid grid) {
        ThetaField f(metric, m, m);
        f.mode(m) = std::move(grid);
        return f;
    }

    const Metric& metric() const { return metric_; }
    const TorusGrid& grid() const { return metric_.grid; }
    int mode_min() const { return mode_min_; }
    int mode_max() const { return mode_max_; }
    bool has_mode(int m) const { return m >= mode_min_ && m <= mode_max_; }

    MatGrid& mode(int m) { return modes_[static_cast<std::size_t>(m - mode_min_)]; }
    const MatGrid& mode(int m) const { return modes_[static_cast<std::size_t>(m - mode_min_)]; }

    MatGrid mode_or_zero(int m) const {
        if (has_mode(m)) return mode(m);
        return MatGrid(metric_.grid.nx, metric_.grid.ny);
    }

    // Tags; purely informational, set by constructions that guarantee them.
    bool unitary_tag = false;
    ParityTag parity_tag = ParityTag::none;

    double sum_norm_sq() const {
        double s = 0.0;
        for (const auto& g : modes_) s += g.sum_norm_sq();
        return s;
    }

private:
    Metric metric_;
    int mode_min_, mode_max_;
    std::vector<MatGrid> modes_;
};

inline void require_same_metric(const ThetaField& a, const ThetaField& b, const char* who) {
    if (!(a.metric() == b.metric())) throw GridMismatch(std::string(who) + ": metric/grid mismatch");
}

// ---- linear combinations ----------------------------------------------------

inline ThetaField add(const ThetaField& a, const ThetaField& b) {
    require_same_metric(a, b, "add");
    ThetaField r(a.metric(), std::min(a.mode_min(), b.mode_min()), std::max(a.mode_max(), b.mode_max()));
    for (int m = r.mode_min(); m <= r.mode_max(); ++m) {
        if (a.has_mode(m)) r.mode(m) += a.mode(m);
        if (b.has_mode(m)) r.mode(m) += b.mode(m);
    }
    return r;
}

inline ThetaField sub(const ThetaField& a, const ThetaField& b) {
    require_same_metric(a, b, "sub");
    ThetaField r(a.metric(), std::min(a.mode_min(), b.mode_min()), std::max(a.mode_max(), b.mode_max()));
    for (int m = r.mode_min(); m <= r.mode_max(); ++m) {
        if (a.has_mode(m)) r.mode(m) += a.mode(m);
        if (b.has_mode(m)) r.mode(m) -= b.mode(m);
    }
    return r;
}

inline ThetaField scale(ThetaField f, Complex s) {
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) f.mode(m) *= s;
    return f;
}

inline ThetaField truncate_modes(const ThetaField& f, int mmin, int mmax) {
    ThetaField r(f.metric(), mmin, mmax);
    for (int m = mmin; m <= mmax; ++m)
        if (f.has_mode(m)) r.mode(m) = f.mode(m);
    return r;
}

// Adjoint field: u*(x, theta) has modes (u*)_m = (u_{-m})^dagger.
inline ThetaField adjoint_field(const ThetaField& f) {
    ThetaField r(f.metric(), -f.mode_max(), -f.mode_min());
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) r.mode(-m) = adjoint_of(f.mode(m));
    return r;
}

// ---- products ---------------------------------------------------------------

// Pointwise product on SM: theta-modes convolve, base products are computed
// on a 2x grid (spectral zero-padding) and truncated back.
inline ThetaField multiply(const ThetaField& f, const ThetaField& g) {
    require_same_metric(f, g, "multiply");
    std::vector<MatGrid> fu, gu;
    fu.reserve(static_cast<std::size_t>(f.mode_max() - f.mode_min() + 1));
    gu.reserve(static_cast<std::size_t>(g.mode_max() - g.mode_min() + 1));
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) fu.push_back(upsample2(f.mode(m)));
    for (int m = g.mode_min(); m <= g.mode_max(); ++m) gu.push_back(upsample2(g.mode(m)));

    ThetaField out(f.metric(), f.mode_min() + g.mode_min(), f.mode_max() + g.mode_max());
    const int bx = 2 * f.grid().nx, by = 2 * f.grid().ny;
    for (int m = out.mode_min(); m <= out.mode_max(); ++m) {
        MatGrid acc(bx, by);
        for (int k = f.mode_min(); k <= f.mode_max(); ++k) {
            const int l = m - k;
            if (l < g.mode_min() || l > g.mode_max()) continue;
            acc += matmul(fu[static_cast<std::size_t>(k - f.mode_min())],
                          gu[static_cast<std::size_t>(l - g.mode_min())]);
        }
        out.mode(m) = downsample2(acc);
    }

    out.unitary_tag = f.unitary_tag && g.unitary_tag;
    if (f.parity_tag != ParityTag::none && g.parity_tag != ParityTag::none)
        out.parity_tag = (f.parity_tag == g.parity_tag) ? ParityTag::even : ParityTag::odd;
    return out;
}

// ---- mode diagnostics -------------------------------------------------------

inline int degree_of(const ThetaField& f, double tol = 1e-9) {
    if (!(tol > 0.0)) throw Precondition("degree_of: tol must be positive");
    int deg = 0;
    for (int m = f.mode_min(); m <= f.mode_max(); ++m)
        if (f.mode(m).rms_fro() > tol) deg = std::max(deg, std::abs(m));
    return deg;
}

inline Parity parity_of(const ThetaField& f, double tol = 1e-9) {
    if (!(tol > 0.0)) throw Precondition("parity_of: tol must be positive");
    bool odd_clean = true, even_clean = true;
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) {
        const double e = f.mode(m).rms_fro();
        if (e > tol) {
            if (m % 2 == 0)
                even_clean = false; // carries even-mode energy
            else
                odd_clean = false;
        }
    }
    if (odd_clean) return Parity::even; // only even modes survive
    if (even_clean) return Parity::odd;
    return Parity::mixed;
}

// Largest RMS mismatch of the SU(2) mode symmetry j u_m j^{-1} = u_{-m}.
inline double j_symmetry_defect(const ThetaField& f) {
    double worst = 0.0;
    const int lo = std::min(f.mode_min(), -f.mode_max());
    const int hi = std::max(f.mode_max(), -f.mode_min());
    for (int m = lo; m <= hi; ++m) worst = std::max(worst, (j_twist(f.mode_or_zero(m)) - f.mode_or_zero(-m)).rms_fro());
    return worst;
}

inline MatGrid reconstruct_at_theta(const ThetaField& f, double theta) {
    MatGrid r(f.grid().nx, f.grid().ny);
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) r += f.mode(m) * std::polar(1.0, m * theta);
    return r;
}

// Worst pointwise SU(2) defect of the reconstruction over 4N+4 equispaced
// theta samples.
inline double unitarity_defect(const ThetaField& f) {
    const int n = std::max(std::abs(f.mode_min()), std::abs(f.mode_max()));
    const int T = 4 * n + 4;
    double worst = 0.0;
    for (int t = 0; t < T; ++t) {
        const MatGrid rec = reconstruct_at_theta(f, kTwoPi * t / T);
        for (const auto& m : rec.v) worst = std::max(worst, su2_defect(m));
    }
    return worst;
}

inline bool is_unitary(const ThetaField& f, double tol = 1e-6) { return unitarity_defect(f) <= tol; }

// Inverse DFT in theta: samples at theta_t = 2 pi t / T, T = samples.size().
inline ThetaField field_from_theta_samples(const Metric& metric, const std::vector<MatGrid>& samples,
                                           int mode_min, int mode_max) {
    const int T = static_cast<int>(samples.size());
    if (T < mode_max - mode_min + 1) throw Precondition("field_from_theta_samples: too few samples");
    ThetaField f(metric, mode_min, mode_max);
    for (int m = mode_min; m <= mode_max; ++m) {
        MatGrid acc(metric.grid.nx, metric.grid.ny);
        for (int t = 0; t < T; ++t) acc += samples[static_cast<std::size_t>(t)] * std::polar(1.0 / T, -m * kTwoPi * t / T);
        f.mode(m) = std::move(acc);
    }
    return f;
}

// ---- point evaluation -------------------------------------------------------

// Exact trigonometric evaluation of the band-limited coefficient grids at an
// arbitrary point of SM. Caches the 2D Fourier coefficients of every mode.
class FieldEvaluator {
public:
    explicit FieldEvaluator(const ThetaField& f)
        : grid_(f.grid()), mode_min_(f.mode_min()), mode_max_(f.mode_max()) {
        spectral_.reserve(static_cast<std::size_t>(mode_max_ - mode_min_ + 1));
        for (int m = mode_min_; m <= mode_max_; ++m) spectral_.push_back(fft2(f.mode(m)));
    }

    Mat2 mode_at(int m, double x, double y) const {
        if (m < mode_min_ || m > mode_max_) return Mat2::zero();
        const auto& c = spectral_[static_cast<std::size_t>(m - mode_min_)];
        const auto wx = axis_weights(x, grid_.nx, grid_.Lx);
        const auto wy = axis_weights(y, grid_.ny, grid_.Ly);
        Mat2 acc;
        for (int j = 0; j < grid_.ny; ++j) {
            Mat2 row;
            for (int i = 0; i < grid_.nx; ++i) row += c.at(i, j) * wx[static_cast<std::size_t>(i)];
            acc += row * wy[static_cast<std::size_t>(j)];
        }
        return acc;
    }

    Mat2 operator()(double x, double y, double theta) const {
        Mat2 acc;
        for (int m = mode_min_; m <= mode_max_; ++m) acc += mode_at(m, x, y) * std::polar(1.0, m * theta);
        return acc;
    }

    int mode_min() const { return mode_min_; }
    int mode_max() const { return mode_max_; }
    const MatGrid& spectral_mode(int m) const { return spectral_[static_cast<std::size_t>(m - mode_min_)]; }
    const TorusGrid& grid() const { return grid_; }

private:
    static std::vector<Complex> axis_weights(double x, int n, double L) {
        std::vector<Complex> w(static_cast<std::size_t>(n));
        for (int i = 0; i < n; ++i) {
            const int k = freq_of(i, n);
            if (std::abs(k) == n / 2)
                w[static_cast<std::size_t>(i)] = std::cos(kTwoPi * k * x / L); // split Nyquist
            else
                w[static_cast<std::size_t>(i)] = std::polar(1.0, kTwoPi * k * x / L);
        }
        return w;
    }

    TorusGrid grid_;
    int mode_min_, mode_max_;
    std::vector<MatGrid> spectral_;
};

inline Mat2 evaluate(const ThetaField& f, double x, double y, double theta) {
    return FieldEvaluator(f)(x, y, theta);
}

// ---- connections ------------------------------------------------------------

// A unitary connection as a function on SM: only the e^{+- i theta} modes are
// present and the pointwise reconstruction is traceless anti-Hermitian,
// equivalently A_{-1} = -(A_{+1})^dagger entrywise.
class Connection {
public:
    Connection(Metric metric, MatGrid plus, MatGrid minus, double tol = 1e-10)
        : metric_(std::move(metric)), plus_(std::move(plus)), minus_(std::move(minus)) {
        const auto& g = metric_.grid;
        if (plus_.nx != g.nx || plus_.ny != g.ny || minus_.nx != g.nx || minus_.ny != g.ny)
            throw GridMismatch("Connection: coefficient grids do not match the metric grid");
        const double s = 1.0 + std::max(plus_.max_fro(), minus_.max_fro());
        double pairing = 0.0, tracelessness = 0.0;
        for (std::size_t i = 0; i < plus_.v.size(); ++i) {
            pairing = std::max(pairing, (minus_.v[i] + plus_.v[i].adjoint()).norm());
            tracelessness = std::max(tracelessness, std::abs(plus_.v[i].trace()));
        }
        if (pairing > tol * s || tracelessness > tol * s)
            throw NotAConnection("Connection: reconstruction is not traceless anti-Hermitian");
    }

    static Connection zero(const Metric& metric) {
        return Connection(metric, MatGrid(metric.grid.nx, metric.grid.ny), MatGrid(metric.grid.nx, metric.grid.ny));
    }

    static Connection from_plus(const Metric& metric, const MatGrid& plus) {
        return Connection(metric, plus, -adjoint_of(plus));
    }

    // A = a(x) cos(theta) + b(x) sin(theta):
    // A_{+1} = (a - i b)/2, A_{-1} = (a + i b)/2.
    static Connection from_cos_sin(const Metric& metric, const MatGrid& a, const MatGrid& b) {
        const Complex half(0.5, 0.0), ihalf(0.0, 0.5);
        return Connection(metric, a * half - b * ihalf, a * half + b * ihalf);
    }

    const Metric& metric() const { return metric_; }
    const TorusGrid& grid() const { return metric_.grid; }
    const MatGrid& plus() const { return plus_; }
    const MatGrid& minus() const { return minus_; }

    ThetaField as_field() const {
        ThetaField f(metric_, -1, 1);
        f.mode(1) = plus_;
        f.mode(-1) = minus_;
        return f;
    }

private:
    Metric metric_;
    MatGrid plus_, minus_;
};

// Mode-0 su(2)-valued field with g(x)^2 = -Id pointwise; carries the
// projector pair pi = (Id - i g)/2, pi_perp = (Id + i g)/2.
class InvolutionField {
public:
    InvolutionField(Metric metric, MatGrid g, double tol = 1e-10)
        : metric_(std::move(metric)), g_(std::move(g)) {
        const auto& gr = metric_.grid;
        if (g_.nx != gr.nx || g_.ny != gr.ny) throw GridMismatch("InvolutionField: grid mismatch");
        for (const auto& m : g_.v) {
            if ((m * m + Mat2::identity()).norm() > tol || su2_lie_defect(m) > tol)
                throw NotAnInvolution("InvolutionField: g^2 != -Id or g not in su(2)");
        }
    }

    static InvolutionField from_projector_grid(const Metric& metric, const MatGrid& pi, double tol = 1e-9) {
        MatGrid g(pi.nx, pi.ny);
        for (std::size_t i = 0; i < pi.v.size(); ++i) g.v[i] = involution_from_projector(pi.v[i], tol);
        return InvolutionField(std::move(metric), std::move(g), 10.0 * tol);
    }

    const Metric& metric() const { return metric_; }
    const MatGrid& values() const { return g_; }

    MatGrid projector() const {
        MatGrid p(g_.nx, g_.ny);
        for (std::size_t i = 0; i < g_.v.size(); ++i) p.v[i] = projector_from_involution(g_.v[i], 1e-8);
        return p;
    }

    MatGrid projector_perp() const {
        MatGrid p(g_.nx, g_.ny);
        for (std::size_t i = 0; i < g_.v.size(); ++i)
            p.v[i] = Mat2::identity() - projector_from_involution(g_.v[i], 1e-8);
        return p;
    }

    ThetaField as_field() const { return ThetaField::single_mode(metric_, 0, g_); }

private:
    Metric metric_;
    MatGrid g_;
};

} // namespace tconn
