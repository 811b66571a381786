#pragma once

// Discretization of the base torus: the periodic grid, the conformal metric
// ds^2 = e^{2 lambda}(dx^2 + dy^2), and grids of 2x2 matrices.

#include <cstddef>
#include <functional>
#include <vector>

#include "tconn/mat2.hpp"

namespace tconn {

struct TorusGrid {
    int nx = 0, ny = 0;
    double Lx = 1.0, Ly = 1.0;

    TorusGrid() = default;
    TorusGrid(int nx_, int ny_, double Lx_ = 1.0, double Ly_ = 1.0) : nx(nx_), ny(ny_), Lx(Lx_), Ly(Ly_) {
        if (nx < 8 || ny < 8 || nx % 2 != 0 || ny % 2 != 0)
            throw Error("TorusGrid: nx, ny must be even and >= 8");
        if (!(Lx > 0.0) || !(Ly > 0.0)) throw Error("TorusGrid: periods must be positive");
    }

    double x(int i) const { return static_cast<double>(i) * Lx / nx; }
    double y(int j) const { return static_cast<double>(j) * Ly / ny; }
    std::size_t npoints() const { return static_cast<std::size_t>(nx) * static_cast<std::size_t>(ny); }
    double cell_area() const { return (Lx / nx) * (Ly / ny); }

    bool operator==(const TorusGrid&) const = default;
};

struct Metric {
    TorusGrid grid;
    std::vector<double> lambda; // conformal factor at grid points, row-major (y outer)

    static Metric flat(const TorusGrid& g) { return Metric{g, std::vector<double>(g.npoints(), 0.0)}; }

    static Metric conformal(const TorusGrid& g, const std::function<double(double, double)>& f) {
        Metric m{g, std::vector<double>(g.npoints())};
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i) m.lambda[static_cast<std::size_t>(j) * g.nx + i] = f(g.x(i), g.y(j));
        return m;
    }

    double lambda_at(int ix, int iy) const { return lambda[static_cast<std::size_t>(iy) * grid.nx + ix]; }

    bool is_flat() const {
        for (double v : lambda)
            if (v != 0.0) return false;
        return true;
    }

    bool operator==(const Metric&) const = default;
};

// Grid of Mat2 values, row-major with y as the outer index.
struct MatGrid {
    int nx = 0, ny = 0;
    std::vector<Mat2> v;

    MatGrid() = default;
    MatGrid(int nx_, int ny_) : nx(nx_), ny(ny_), v(static_cast<std::size_t>(nx_) * ny_) {}

    static MatGrid constant(int nx, int ny, const Mat2& m) {
        MatGrid g(nx, ny);
        for (auto& x : g.v) x = m;
        return g;
    }

    Mat2& at(int ix, int iy) { return v[static_cast<std::size_t>(iy) * nx + ix]; }
    const Mat2& at(int ix, int iy) const { return v[static_cast<std::size_t>(iy) * nx + ix]; }
    std::size_t size() const { return v.size(); }
    bool same_shape(const MatGrid& o) const { return nx == o.nx && ny == o.ny; }

    MatGrid& operator+=(const MatGrid& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] += o.v[i];
        return *this;
    }
    MatGrid& operator-=(const MatGrid& o) {
        for (std::size_t i = 0; i < v.size(); ++i) v[i] -= o.v[i];
        return *this;
    }
    MatGrid& operator*=(Complex s) {
        for (auto& m : v) m *= s;
        return *this;
    }
    MatGrid& operator*=(double s) {
        for (auto& m : v) m *= s;
        return *this;
    }

    double sum_norm_sq() const {
        double s = 0.0;
        for (const auto& m : v) s += m.norm_sq();
        return s;
    }
    double rms_fro() const { return v.empty() ? 0.0 : std::sqrt(sum_norm_sq() / static_cast<double>(v.size())); }
    double max_fro() const {
        double s = 0.0;
        for (const auto& m : v) s = std::max(s, m.norm());
        return s;
    }
};

inline MatGrid operator+(MatGrid a, const MatGrid& b) { return a += b; }
inline MatGrid operator-(MatGrid a, const MatGrid& b) { return a -= b; }
inline MatGrid operator*(MatGrid a, Complex s) { return a *= s; }
inline MatGrid operator*(Complex s, MatGrid a) { return a *= s; }
inline MatGrid operator*(MatGrid a, double s) { return a *= s; }
inline MatGrid operator*(double s, MatGrid a) { return a *= s; }

inline MatGrid operator-(const MatGrid& a) {
    MatGrid r(a.nx, a.ny);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = -a.v[i];
    return r;
}

// Pointwise matrix product (no anti-aliasing; see fft.hpp for the
// upsampled variant used by field products).
inline MatGrid matmul(const MatGrid& a, const MatGrid& b) {
    MatGrid r(a.nx, a.ny);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] * b.v[i];
    return r;
}

inline MatGrid adjoint_of(const MatGrid& a) {
    MatGrid r(a.nx, a.ny);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i].adjoint();
    return r;
}

inline MatGrid j_twist(const MatGrid& a) {
    MatGrid r(a.nx, a.ny);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = j_twist(a.v[i]);
    return r;
}

// Pointwise multiplication by a scalar field.
inline MatGrid scale_pointwise(const MatGrid& a, const std::vector<double>& s) {
    MatGrid r(a.nx, a.ny);
    for (std::size_t i = 0; i < a.v.size(); ++i) r.v[i] = a.v[i] * s[i];
    return r;
}

} // namespace tconn
