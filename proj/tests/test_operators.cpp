#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "support.hpp"

using namespace tconn;

namespace {

ThetaField single_exp_mode(const Metric& metric, int m) {
    MatGrid g(metric.grid.nx, metric.grid.ny);
    for (int j = 0; j < metric.grid.ny; ++j)
        for (int i = 0; i < metric.grid.nx; ++i)
            g.at(i, j) = Mat2::identity() * std::polar(1.0, kTwoPi * metric.grid.x(i));
    return ThetaField::single_mode(metric, m, g);
}

} // namespace

TEST_CASE("vertical: eigenvalue i*m per mode, V^2 = -Id on connections") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(2);

    const ThetaField f0 = testsup::random_field(metric, 0, 0, rng);
    CHECK(vertical(f0).mode(0).rms_fro() < 1e-15);

    ThetaField f2(metric, 2, 2);
    f2.mode(2) = testsup::random_mat_grid(metric.grid, rng);
    const ThetaField v = vertical(f2);
    CHECK((v.mode(2) - f2.mode(2) * Complex(0.0, 2.0)).rms_fro() < 1e-14);

    const Connection A = testsup::random_connection(metric, rng);
    const ThetaField vv = vertical(vertical(A.as_field()));
    CHECK(quad_norm(add(vv, A.as_field())) < 1e-12 * quad_norm(A.as_field()));
}

TEST_CASE("eta_minus and eta_plus: flat closed forms") {
    const Metric metric = testsup::flat_metric(16);

    // mode-1 field e^{2 pi i x} Id: dbar gives pi*i * e^{2 pi i x} at mode 0.
    const ThetaField f = single_exp_mode(metric, 1);
    const ThetaField em = eta_minus(f);
    CHECK((em.mode(0) - f.mode(1) * Complex(0.0, kPi)).rms_fro() < 1e-12);

    // constant mode-0 field annihilates.
    CHECK(eta_minus(ThetaField::constant(metric, Mat2::identity())).mode(-1).rms_fro() < 1e-15);

    // mode-0 field e^{2 pi i x} Id: d gives pi*i * e^{2 pi i x} at mode +1.
    const ThetaField g = single_exp_mode(metric, 0);
    const ThetaField ep = eta_plus(g);
    CHECK((ep.mode(1) - g.mode(0) * Complex(0.0, kPi)).rms_fro() < 1e-12);
}

TEST_CASE("eta_pm match the coordinate frame oracle, non-flat lambda") {
    const Metric metric = testsup::wavy_metric(32);
    SplitMix64 rng(31);
    const ThetaField u = testsup::random_field(metric, -3, 3, rng, 3);
    const int T = 24;

    const auto su = testsup::sample_field(u, T);
    const auto X = testsup::apply_frame_coordinate(su, metric, testsup::Frame::X);
    const auto H = testsup::apply_frame_coordinate(su, metric, testsup::Frame::H);

    // eta_minus = (X + iH)/2, eta_plus = (X - iH)/2 on samples.
    testsup::SampleStack em_oracle, ep_oracle;
    em_oracle.s.reserve(T);
    ep_oracle.s.reserve(T);
    for (int t = 0; t < T; ++t) {
        em_oracle.s.push_back((X.s[static_cast<std::size_t>(t)] + H.s[static_cast<std::size_t>(t)] * Complex(0, 1)) * 0.5);
        ep_oracle.s.push_back((X.s[static_cast<std::size_t>(t)] - H.s[static_cast<std::size_t>(t)] * Complex(0, 1)) * 0.5);
    }

    const auto em = testsup::sample_field(eta_minus(u), T);
    const auto ep = testsup::sample_field(eta_plus(u), T);
    const double scale = testsup::stack_rms(X) + 1e-300;
    CHECK(testsup::stack_rms_diff(em, em_oracle) / scale < 1e-8);
    CHECK(testsup::stack_rms_diff(ep, ep_oracle) / scale < 1e-8);

    // X = eta_plus + eta_minus and H = i(eta_plus - eta_minus) directly.
    const auto xs = testsup::sample_field(x_derivative(u), T);
    CHECK(testsup::stack_rms_diff(xs, X) / scale < 1e-8);
    const auto hs = testsup::sample_field(h_derivative(u), T);
    CHECK(testsup::stack_rms_diff(hs, H) / scale < 1e-8);
}

TEST_CASE("adjointness <eta_plus u, w> = -<u, eta_minus w> with non-flat lambda") {
    const Metric metric = testsup::wavy_metric(32);
    SplitMix64 rng(37);
    for (int trial = 0; trial < 20; ++trial) {
        const ThetaField u = testsup::random_field(metric, -2, 2, rng, 2);
        const ThetaField w = testsup::random_field(metric, -1, 3, rng, 2);
        const Complex lhs = inner_product(eta_plus(u), w);
        const Complex rhs = inner_product(u, eta_minus(w));
        CHECK(std::abs(lhs + rhs) < 1e-8 * quad_norm(u) * quad_norm(w));
    }
}

TEST_CASE("mu_pm: twisted operators") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(41);
    const ThetaField u = testsup::random_field(metric, -1, 1, rng, 2);

    // A = 0 reduces to eta_pm.
    const Connection zero = Connection::zero(metric);
    CHECK(quad_norm(sub(mu_plus(zero, u), eta_plus(u))) < 1e-14);
    CHECK(quad_norm(sub(mu_minus(zero, u), eta_minus(u))) < 1e-14);

    // constant A_{-1} = K/2 on a constant mode-0 field: mu_minus output is
    // (K/2) c at mode -1 (the derivative term vanishes).
    const Mat2 K = testsup::random_su2_lie(rng);
    const Connection A = Connection::from_cos_sin(metric, MatGrid::constant(16, 16, K), MatGrid(16, 16));
    const Mat2 c(Complex(0.7, 0.1), 0.0, 0.0, Complex(0.7, 0.1));
    const ThetaField cf = ThetaField::constant(metric, c);
    const ThetaField mm = mu_minus(A, cf);
    CHECK((mm.mode(-1) - MatGrid::constant(16, 16, (0.5 * K) * c)).rms_fro() < 1e-13);

    // adjointness <mu_plus u, w> = -<u, mu_minus w>, non-flat metric.
    const Metric wavy = testsup::wavy_metric(32);
    const Connection Aw = testsup::random_connection(wavy, rng, 2);
    for (int trial = 0; trial < 10; ++trial) {
        const ThetaField a = testsup::random_field(wavy, -2, 1, rng, 2);
        const ThetaField b = testsup::random_field(wavy, -1, 2, rng, 2);
        const Complex lhs = inner_product(mu_plus(Aw, a), b);
        const Complex rhs = inner_product(a, mu_minus(Aw, b));
        CHECK(std::abs(lhs + rhs) < 1e-8 * quad_norm(a) * quad_norm(b));
    }
}

TEST_CASE("decompose_connection from theta samples") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(43);
    const MatGrid a = testsup::random_su2_lie_grid(metric.grid, rng);
    const MatGrid b = testsup::random_su2_lie_grid(metric.grid, rng);

    const int T = 12;
    std::vector<MatGrid> samples;
    for (int t = 0; t < T; ++t) {
        const double th = kTwoPi * t / T;
        samples.push_back(a * std::cos(th) + b * std::sin(th));
    }
    const Connection A = decompose_connection(metric, samples);
    const Connection expected = Connection::from_cos_sin(metric, a, b);
    CHECK((A.plus() - expected.plus()).rms_fro() < 1e-12);
    CHECK((A.minus() - expected.minus()).rms_fro() < 1e-12);

    // K cos(2 theta) is not a connection.
    std::vector<MatGrid> bad;
    for (int t = 0; t < T; ++t) bad.push_back(a * std::cos(2.0 * kTwoPi * t / T));
    CHECK_THROWS_AS(decompose_connection(metric, bad), NotAConnection);
}

TEST_CASE("hodge star convention") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(47);
    for (int trial = 0; trial < 20; ++trial) {
        const Connection A = testsup::random_connection(metric, rng);
        const Connection sA = hodge_star(A);
        CHECK((sA.plus() - A.plus() * Complex(0.0, -1.0)).rms_fro() < 1e-15);

        // -star A = V(A) exactly.
        const ThetaField vA = vertical(A.as_field());
        CHECK((sA.plus() * Complex(-1.0) - vA.mode(1)).rms_fro() < 1e-15);
        CHECK((sA.minus() * Complex(-1.0) - vA.mode(-1)).rms_fro() < 1e-15);

        // star(star A) = -A.
        const Connection ssA = hodge_star(sA);
        CHECK((ssA.plus() + A.plus()).rms_fro() < 1e-14);
        CHECK((ssA.minus() + A.minus()).rms_fro() < 1e-14);
    }
}

TEST_CASE("dbar_A basics") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(53);
    const Connection zero = Connection::zero(metric);

    CHECK(dbar_A(zero, ThetaField::constant(metric, testsup::random_mat2(rng))).mode(-1).rms_fro() < 1e-15);

    // central fields commute with the twist: dbar_A(c Id) = dbar(c Id).
    const Connection A = testsup::random_connection(metric, rng, 2);
    const auto s = testsup::random_scalar_grid(metric.grid, rng, 2, false);
    MatGrid central(16, 16);
    for (std::size_t i = 0; i < central.v.size(); ++i) central.v[i] = s[i] * Mat2::identity();
    const ThetaField cf = ThetaField::single_mode(metric, 0, central);
    const MatGrid lhs = dbar_A(A, cf).mode(-1);
    const MatGrid rhs = spectral_dbar(central, metric.grid);
    CHECK((lhs - rhs).rms_fro() < 1e-12 * (1.0 + rhs.rms_fro()));

    // mode-0 precondition
    SplitMix64 rng2(54);
    CHECK_THROWS_AS(dbar_A(zero, testsup::random_field(metric, -1, 1, rng2)), NotMode0);
}

TEST_CASE("f_from_u closed forms") {
    const Metric metric = testsup::flat_metric(16);
    CHECK(quad_norm(f_from_u(ThetaField::constant(metric, Mat2::identity()))) < 1e-14);

    // u = diag(e^{i th}, e^{-i th}): f = u* V(u) = diag(i, -i).
    ThetaField u(metric, -1, 1);
    u.mode(1) = MatGrid::constant(16, 16, Mat2(1.0, 0.0, 0.0, 0.0));
    u.mode(-1) = MatGrid::constant(16, 16, Mat2(0.0, 0.0, 0.0, 1.0));
    const ThetaField f = f_from_u(u);
    const Mat2 diag_i(Complex(0, 1), 0.0, 0.0, Complex(0, -1));
    CHECK((f.mode_or_zero(0) - MatGrid::constant(16, 16, diag_i)).rms_fro() < 1e-13);
    for (int m : {-2, -1, 1, 2}) CHECK(f.mode_or_zero(m).rms_fro() < 1e-13);

    // pointwise anti-Hermitian on a generic unitary (resolved base grid)
    SplitMix64 rng(59);
    const Metric metric32 = testsup::flat_metric(32);
    const ThetaField w = testsup::random_unitary_field(metric32, rng);
    const ThetaField fw = f_from_u(w);
    for (double theta : {0.4, 1.9}) {
        const MatGrid r = reconstruct_at_theta(fw, theta);
        for (const auto& m : r.v) CHECK((m + m.adjoint()).norm() < 1e-8);
    }

    CHECK_THROWS_AS(f_from_u(ThetaField::constant(metric, Mat2(2.0, 0, 0, 2.0))), NotUnitary);
}

TEST_CASE("connection_from_u trivial cases") {
    const Metric metric = testsup::flat_metric(16);
    CHECK(connection_from_u(ThetaField::constant(metric, Mat2::identity())).as_field().sum_norm_sq() < 1e-28);

    // theta-only unitary (no base dependence): X(u) = 0 at lambda = 0.
    ThetaField u(metric, -1, 1);
    u.mode(1) = MatGrid::constant(16, 16, Mat2(1.0, 0.0, 0.0, 0.0));
    u.mode(-1) = MatGrid::constant(16, 16, Mat2(0.0, 0.0, 0.0, 1.0));
    CHECK(connection_from_u(u).as_field().sum_norm_sq() < 1e-28);
}

TEST_CASE("is_connection_residual") {
    const Metric metric = testsup::flat_metric(16);
    SplitMix64 rng(61);

    const Connection A = testsup::random_connection(metric, rng);
    CHECK(is_connection_residual(A.as_field()) < 1e-14);

    // pure mode-2 field: (V^2 + 1) multiplies by -3, so the normalized
    // residual is exactly 3.
    ThetaField f2(metric, 2, 2);
    f2.mode(2) = testsup::random_mat_grid(metric.grid, rng);
    CHECK(std::abs(is_connection_residual(f2) - 3.0) < 1e-12);

    // -X(u)u* for a generic unitary u is far from a connection.
    const ThetaField u = testsup::random_unitary_field(metric, rng);
    const ThetaField raw = connection_raw_from_u(u);
    CHECK(is_connection_residual(raw) > 0.01);
}

TEST_CASE("mypde_residual") {
    const Metric metric = testsup::flat_metric(16);
    CHECK(mypde_residual(ThetaField::constant(metric, Mat2(Complex(0, 1), 0, 0, Complex(0, -1)))) < 1e-12);

    // generic non-holomorphic involution line violates the PDE
    SplitMix64 rng(67);
    const MatGrid pi = testsup::smooth_projector_grid(metric, rng, 0.4);
    const InvolutionField g = InvolutionField::from_projector_grid(metric, pi);
    CHECK(mypde_residual(g.as_field()) > 0.01);
}

TEST_CASE("transport_pde_residual") {
    const Metric metric = testsup::flat_metric(16);
    CHECK(transport_pde_residual(Connection::zero(metric), ThetaField::constant(metric, Mat2::identity())) == 0.0);

    // A = -X(u)u^{-1} as a raw field pairs with u identically, even though
    // it is not a connection.
    SplitMix64 rng(71);
    const Metric metric32 = testsup::flat_metric(32);
    const ThetaField u = testsup::random_unitary_field(metric32, rng);
    const ThetaField raw = connection_raw_from_u(u);
    CHECK(transport_pde_residual(raw, u) < 1e-10);

    // modewise report sums to the total
    const Connection zero = Connection::zero(metric32);
    const auto by_mode = transport_pde_mode_residuals(zero, u);
    double sum_sq = 0.0;
    for (const auto& [m, r] : by_mode) sum_sq += r * r;
    const double total = transport_pde_residual(zero, u) * quad_norm(u);
    CHECK(std::abs(std::sqrt(sum_sq) - total) < 1e-10 * (1.0 + total));
}

TEST_CASE("gauge_transform") {
    const Metric metric = testsup::flat_metric(32);
    SplitMix64 rng(73);

    // constant w: pure conjugation.
    const Mat2 wc = su2_exp(testsup::random_su2_lie(rng));
    const ThetaField w = ThetaField::single_mode(metric, 0, MatGrid::constant(32, 32, wc));
    const Connection A = testsup::random_connection(metric, rng, 2);
    const Connection Aw = gauge_transform(A, w);
    double worst = 0.0;
    for (std::size_t i = 0; i < Aw.plus().v.size(); ++i)
        worst = std::max(worst, (Aw.plus().v[i] - wc.adjoint() * A.plus().v[i] * wc).norm());
    CHECK(worst < 1e-12);

    // gauge of the trivial connection comes out a valid connection shape
    const ThetaField wf = testsup::random_mode0_unitary(metric, rng, 0.3);
    const Connection pure = gauge_transform(Connection::zero(metric), wf);
    CHECK(is_connection_residual(pure.as_field()) < 1e-10);
    // and pairs with u = w*: X(w*) + A' w* = 0
    CHECK(transport_pde_residual(pure, adjoint_field(wf)) < 1e-9);

    CHECK_THROWS_AS(gauge_transform(A, testsup::random_unitary_field(metric, rng)), NotMode0);
}
