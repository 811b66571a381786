// tconn: construct transparent SU(2) connections on the flat square torus,
// lower their degree, and verify transparency by integrating the
// parallel-transport cocycle along closed geodesics.
//
// Exit codes: 0 = all gates pass, 2 = a verification gate failed (the
// violated gate and measured value are printed), 1 = I/O or usage error.

#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "tconn/tconn.hpp"

namespace {

using namespace tconn;

struct Gates {
    double seed = 1e-6;       // holomorphic line residual
    double transport = 1e-7;  // X(u) + A u residual
    double connection = 1e-7; // mode energy outside +-1
    double holonomy = 1e-5;   // max loop defect
    double degree = 1e-9;     // mode truncation for degree reports
    int mode_cap = 8;         // largest theta-degree the pipeline may emit
    int rk4_density = 64;     // starting RK4 steps per unit loop length
};

int g_exit = 0;

void report_gate(const char* name, double value, double gate) {
    const bool pass = value <= gate;
    std::printf("%-28s %.6e  gate %.1e  %s\n", name, value, gate, pass ? "PASS" : "FAIL");
    if (!pass) g_exit = 2;
}

void report_value(const char* name, double value) { std::printf("%-28s %.6e\n", name, value); }

std::string fmt_meta(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

SeedProvenance provenance_from_meta(const Container& c) {
    for (const auto& [k, v] : c.meta) {
        if (k != "provenance") continue;
        if (v == "constant") return SeedProvenance::constant;
        if (v == "weierstrass") return SeedProvenance::weierstrass;
        if (v == "extracted") return SeedProvenance::extracted;
    }
    return SeedProvenance::solver;
}

LineSeed load_seed(const std::string& path) {
    const Container c = load_container(path);
    const InvolutionField g = involution_from_container(c);
    return LineSeed(g.metric(), g.projector(), provenance_from_meta(c));
}

void require_distinct(const std::vector<std::string>& inputs, const std::vector<std::string>& outputs) {
    for (const auto& in : inputs)
        for (const auto& out : outputs)
            if (!in.empty() && in == out) throw IoError("input and output paths must be distinct: " + in);
}

// ---- seed --------------------------------------------------------------------

int cmd_seed(const std::string& kind, int grid_n, double lx, double ly, const std::string& out_path,
             const Gates& gates) {
    if (kind == "weierstrass" && (lx != 1.0 || ly != 1.0))
        throw IoError("seed: the weierstrass seed requires the unit square torus (--lx 1 --ly 1)");
    const Metric metric = Metric::flat(TorusGrid(grid_n, grid_n, lx, ly));
    LineSeed seed = (kind == "constant") ? LineSeed::constant(metric) : weierstrass_line(metric);

    const auto r = holomorphic_line_residual(Connection::zero(metric), seed);
    std::printf("seed kind=%s grid=%d\n", kind.c_str(), grid_n);
    report_gate("residual_projector", r.projector_defect, gates.seed);
    report_value("residual_form", r.star_defect);

    if (!out_path.empty()) {
        save_container(out_path, container_of_involution(seed.involution(),
                                                         {{"provenance", to_string(seed.provenance())},
                                                          {"residual_projector", fmt_meta(r.projector_defect)},
                                                          {"residual_form", fmt_meta(r.star_defect)}}));
        std::printf("wrote %s\n", out_path.c_str());
    }
    return g_exit;
}

// ---- backlund / lower -----------------------------------------------------------

int cmd_backlund(const std::string& seed_path, const std::string& conn_path, const std::string& transport_path,
                 const std::string& out_conn, const std::string& out_transport, const Gates& gates) {
    require_distinct({seed_path, conn_path, transport_path}, {out_conn, out_transport});
    const LineSeed seed = load_seed(seed_path);
    const Metric& metric = seed.metric();

    Connection A = conn_path.empty() ? Connection::zero(metric)
                                     : connection_from_container(load_container(conn_path));
    ThetaField b = transport_path.empty() ? ThetaField::constant(metric, Mat2::identity())
                                          : load_container(transport_path).field;
    b.unitary_tag = true;

    BacklundGates bg;
    bg.seed_holomorphic = gates.seed;
    bg.transport_in = gates.transport;
    bg.transport_out = gates.transport;
    bg.connection = gates.connection;
    const BacklundResult res = backlund_transform(A, b, seed, BacklundParams::unit_alpha(metric.grid), bg);

    std::printf("backlund degree %d -> %d\n", res.degree_before, res.degree_after);
    if (res.degree_after > gates.mode_cap) {
        std::printf("GATE FAIL output degree %d exceeds mode cap %d\n", res.degree_after, gates.mode_cap);
        g_exit = 2;
    }
    report_gate("residual_seed", res.seed_residual, gates.seed);
    report_gate("residual_connection", res.connection_residual, gates.connection);
    report_gate("residual_transport", res.transport_residual, gates.transport);
    const double eq5 = mypde_residual(f_from_u(res.transport));
    report_gate("residual_compatibility", eq5, gates.transport);

    if (!out_conn.empty()) {
        save_container(out_conn, container_of_connection(res.connection,
                                                         {{"residual_connection", fmt_meta(res.connection_residual)},
                                                          {"residual_transport", fmt_meta(res.transport_residual)},
                                                          {"degree", std::to_string(res.degree_after)}}));
        std::printf("wrote %s\n", out_conn.c_str());
    }
    if (!out_transport.empty()) {
        save_container(out_transport, Container{res.transport, ContainerKind::field, {{"degree", std::to_string(res.degree_after)}}});
        std::printf("wrote %s\n", out_transport.c_str());
    }
    return g_exit;
}

int cmd_lower(const std::string& conn_path, const std::string& transport_path, const std::string& out_conn,
              const std::string& out_transport, const Gates& gates) {
    require_distinct({conn_path, transport_path}, {out_conn, out_transport});
    const Connection A = connection_from_container(load_container(conn_path));
    ThetaField b = load_container(transport_path).field;
    b.unitary_tag = true;

    BacklundGates bg;
    bg.transport_in = gates.transport;
    bg.connection = gates.connection;
    const LowerResult res = lower_degree(A, b, bg);

    std::printf("lower degree %d -> %d\n", res.degree_before, res.degree_after);
    report_gate("residual_connection", is_connection_residual(connection_raw_from_u(res.transport)),
                gates.connection);
    report_gate("residual_transport", transport_pde_residual(res.connection, res.transport), gates.transport);

    if (!out_conn.empty()) {
        save_container(out_conn, container_of_connection(res.connection,
                                                         {{"degree", std::to_string(res.degree_after)}}));
        std::printf("wrote %s\n", out_conn.c_str());
    }
    if (!out_transport.empty()) {
        save_container(out_transport, Container{res.transport, ContainerKind::field,
                                                {{"degree", std::to_string(res.degree_after)}}});
        std::printf("wrote %s\n", out_transport.c_str());
    }
    return g_exit;
}

// ---- verify ---------------------------------------------------------------------

int cmd_verify(const std::string& conn_path, const std::string& transport_path, int max_pq, int loops_per_dir,
               std::uint64_t rng_seed, const std::string& csv_path, const Gates& gates) {
    require_distinct({conn_path, transport_path}, {csv_path});
    const Connection A = connection_from_container(load_container(conn_path));

    const auto loops = enumerate_loops(A.grid(), max_pq, loops_per_dir, rng_seed);
    const HolonomyReport rep = holonomy_defect(A, loops, gates.rk4_density);
    std::printf("verify loops=%zu max_pq=%d\n", loops.size(), max_pq);
    report_gate("holonomy_max_defect", rep.max_defect, gates.holonomy);
    report_value("holonomy_mean_defect", rep.mean_defect);

    if (!transport_path.empty()) {
        ThetaField u = load_container(transport_path).field;
        u.unitary_tag = true;
        report_gate("residual_transport", transport_pde_residual(A, u), gates.transport);
        report_gate("residual_compatibility", mypde_residual(f_from_u(u)), gates.transport);
        report_value("j_symmetry_defect", j_symmetry_defect(u));
    }

    if (!csv_path.empty()) {
        std::ofstream os(csv_path);
        if (!os) throw IoError("cannot open " + csv_path);
        write_holonomy_csv(os, rep);
        std::printf("wrote %s\n", csv_path.c_str());
    }
    return g_exit;
}

// ---- degree / info ----------------------------------------------------------------

int cmd_degree(const std::string& field_path, double tol) {
    const Container c = load_container(field_path);
    std::printf("degree %d\n", degree_of(c.field, tol));
    for (int m = c.field.mode_min(); m <= c.field.mode_max(); ++m)
        std::printf("mode %+d rms %.6e\n", m, c.field.mode(m).rms_fro());
    const Parity p = parity_of(c.field, tol);
    std::printf("parity %s\n", p == Parity::even ? "even" : (p == Parity::odd ? "odd" : "mixed"));
    return 0;
}

int cmd_info(const std::string& field_path) {
    const Container c = load_container(field_path);
    const TorusGrid& g = c.field.grid();
    std::printf("kind %s\n", to_string(c.kind));
    std::printf("grid %dx%d periods %.17g x %.17g\n", g.nx, g.ny, g.Lx, g.Ly);
    std::printf("modes [%d, %d]\n", c.field.mode_min(), c.field.mode_max());
    for (const auto& [k, v] : c.meta) std::printf("meta %s %s\n", k.c_str(), v.c_str());
    if (c.kind == ContainerKind::connection) {
        const Connection A = connection_from_container(c);
        std::printf("connection_ok rms %.6e\n", A.plus().rms_fro());
    } else if (c.kind == ContainerKind::involution) {
        const InvolutionField gf = involution_from_container(c);
        std::printf("involution_ok rms %.6e\n", gf.values().rms_fro());
    }
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"transparent SU(2) connections on the flat torus"};
    app.require_subcommand(1);

    Gates gates;
    app.add_option("--tol-seed", gates.seed, "holomorphic line residual gate")->check(CLI::PositiveNumber);
    app.add_option("--tol-transport", gates.transport, "transport residual gate")->check(CLI::PositiveNumber);
    app.add_option("--tol-connection", gates.connection, "connection residual gate")->check(CLI::PositiveNumber);
    app.add_option("--tol-holonomy", gates.holonomy, "holonomy defect gate")->check(CLI::PositiveNumber);
    app.add_option("--tol-degree", gates.degree, "degree truncation tolerance")->check(CLI::PositiveNumber);
    app.add_option("--mode-cap", gates.mode_cap, "largest admissible theta-degree")->check(CLI::Range(2, 64));
    app.add_option("--rk4-density", gates.rk4_density, "starting RK4 steps per unit loop length")
        ->check(CLI::Range(16, 1 << 20));

    // seed
    auto* seed = app.add_subcommand("seed", "construct a holomorphic line seed");
    std::string seed_kind = "weierstrass";
    int grid_n = 64;
    double lx = 1.0, ly = 1.0;
    std::string seed_out;
    seed->add_option("--kind", seed_kind, "constant | weierstrass")
        ->check(CLI::IsMember({"constant", "weierstrass"}));
    seed->add_option("--grid", grid_n, "grid resolution N (NxN)");
    seed->add_option("--lx", lx, "x period")->check(CLI::PositiveNumber);
    seed->add_option("--ly", ly, "y period")->check(CLI::PositiveNumber);
    seed->add_option("--out", seed_out, "output container path");

    // backlund
    auto* backlund = app.add_subcommand("backlund", "apply one raising transformation");
    std::string b_seed, b_conn, b_transport, b_out_conn, b_out_transport;
    backlund->add_option("--seed", b_seed, "seed container (kind=involution)")->required();
    backlund->add_option("--connection", b_conn, "input connection container (default: trivial)");
    backlund->add_option("--transport", b_transport, "input transport solution container (default: identity)");
    backlund->add_option("--out-connection", b_out_conn, "output connection path");
    backlund->add_option("--out-transport", b_out_transport, "output transport path");

    // lower
    auto* lower = app.add_subcommand("lower", "apply one degree-lowering transformation");
    std::string l_conn, l_transport, l_out_conn, l_out_transport;
    lower->add_option("--connection", l_conn, "input connection container")->required();
    lower->add_option("--transport", l_transport, "input transport solution container")->required();
    lower->add_option("--out-connection", l_out_conn, "output connection path");
    lower->add_option("--out-transport", l_out_transport, "output transport path");

    // verify
    auto* verify = app.add_subcommand("verify", "holonomy and residual verification");
    std::string v_conn, v_transport, v_csv;
    int max_pq = 3, loops_per_dir = 2;
    std::uint64_t rng_seed = 1;
    verify->add_option("--connection", v_conn, "connection container")->required();
    verify->add_option("--transport", v_transport, "transport solution container (optional)");
    verify->add_option("--max-pq", max_pq, "largest |p|,|q| loop direction")->check(CLI::PositiveNumber);
    verify->add_option("--loops-per-dir", loops_per_dir, "base points per direction")->check(CLI::PositiveNumber);
    verify->add_option("--rng-seed", rng_seed, "seed for base point sampling");
    verify->add_option("--csv", v_csv, "holonomy report CSV path");

    // degree
    auto* degree = app.add_subcommand("degree", "report the theta-degree of a field");
    std::string d_field;
    degree->add_option("--field", d_field, "field container")->required();

    // info
    auto* info = app.add_subcommand("info", "print container header and validation");
    std::string i_field;
    info->add_option("--field", i_field, "container path")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (seed->parsed()) return cmd_seed(seed_kind, grid_n, lx, ly, seed_out, gates);
        if (backlund->parsed()) return cmd_backlund(b_seed, b_conn, b_transport, b_out_conn, b_out_transport, gates);
        if (lower->parsed()) return cmd_lower(l_conn, l_transport, l_out_conn, l_out_transport, gates);
        if (verify->parsed()) return cmd_verify(v_conn, v_transport, max_pq, loops_per_dir, rng_seed, v_csv, gates);
        if (degree->parsed()) return cmd_degree(d_field, gates.degree);
        if (info->parsed()) return cmd_info(i_field);
    } catch (const SeedNotHolomorphic& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const PipelineResidual& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const DegreeNotLowered& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const VanishingSection& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const RankDefect& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const Precondition& e) {
        std::printf("GATE FAIL %s\n", e.what());
        return 2;
    } catch (const Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 1;
}
