#pragma once

// Field container files: a structured text header followed by a binary
// payload of little-endian 64-bit float pairs (re, im), ordered mode-major,
// then row-major over (y, x), then entry-major (4 matrix entries per point).
// Round trips are bit-exact.
//
//   tconn-field 1
//   nx 64
//   ny 64
//   lx 1
//   ly 1
//   mode_min -1
//   mode_max 1
//   kind connection
//   endian little
//   meta <key> <value...>     (zero or more)
//   payload
//   <binary>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tconn/theta_field.hpp"

namespace tconn {

enum class ContainerKind { field, connection, involution };

inline const char* to_string(ContainerKind k) {
    switch (k) {
        case ContainerKind::field: return "field";
        case ContainerKind::connection: return "connection";
        case ContainerKind::involution: return "involution";
    }
    return "unknown";
}

struct Container {
    ThetaField field;
    ContainerKind kind = ContainerKind::field;
    std::vector<std::pair<std::string, std::string>> meta;
};

namespace iodetail {

static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);

inline void put_f64(std::string& out, double x) {
    std::uint64_t bits;
    std::memcpy(&bits, &x, 8);
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
}

inline double get_f64(const char* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(static_cast<unsigned char>(p[i])) << (8 * i);
    double x;
    std::memcpy(&x, &bits, 8);
    return x;
}

inline std::string fmt_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

} // namespace iodetail

inline void write_container(std::ostream& os, const Container& c) {
    const ThetaField& f = c.field;
    const TorusGrid& g = f.grid();
    std::ostringstream head;
    head << "tconn-field 1\n";
    head << "nx " << g.nx << "\n";
    head << "ny " << g.ny << "\n";
    head << "lx " << iodetail::fmt_double(g.Lx) << "\n";
    head << "ly " << iodetail::fmt_double(g.Ly) << "\n";
    head << "mode_min " << f.mode_min() << "\n";
    head << "mode_max " << f.mode_max() << "\n";
    head << "kind " << to_string(c.kind) << "\n";
    head << "endian little\n";
    for (const auto& [k, v] : c.meta) head << "meta " << k << " " << v << "\n";
    head << "payload\n";
    os << head.str();

    std::string blob;
    blob.reserve(f.grid().npoints() * 64 * static_cast<std::size_t>(f.mode_max() - f.mode_min() + 1));
    for (int m = f.mode_min(); m <= f.mode_max(); ++m) {
        const MatGrid& grid = f.mode(m);
        for (int j = 0; j < g.ny; ++j)
            for (int i = 0; i < g.nx; ++i)
                for (int e = 0; e < 4; ++e) {
                    const Complex z = grid.at(i, j).e[static_cast<std::size_t>(e)];
                    iodetail::put_f64(blob, z.real());
                    iodetail::put_f64(blob, z.imag());
                }
    }
    os.write(blob.data(), static_cast<std::streamsize>(blob.size()));
    if (!os) throw IoError("write_container: stream failure");
}

inline void save_container(const std::string& path, const Container& c) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw IoError("save_container: cannot open " + path);
    write_container(os, c);
}

inline Container read_container(std::istream& is) {
    std::string line;
    if (!std::getline(is, line) || line != "tconn-field 1")
        throw IoError("read_container: missing tconn-field header");
    int nx = 0, ny = 0, mode_min = 0, mode_max = 0;
    double lx = 1.0, ly = 1.0;
    std::string kind_str = "field", endian_str = "little";
    std::vector<std::pair<std::string, std::string>> meta;
    for (;;) {
        if (!std::getline(is, line)) throw IoError("read_container: truncated header");
        if (line == "payload") break;
        std::istringstream ls(line);
        std::string key;
        ls >> key;
        if (key == "nx")
            ls >> nx;
        else if (key == "ny")
            ls >> ny;
        else if (key == "lx")
            ls >> lx;
        else if (key == "ly")
            ls >> ly;
        else if (key == "mode_min")
            ls >> mode_min;
        else if (key == "mode_max")
            ls >> mode_max;
        else if (key == "kind")
            ls >> kind_str;
        else if (key == "endian")
            ls >> endian_str;
        else if (key == "meta") {
            std::string k;
            ls >> k;
            std::string rest;
            std::getline(ls, rest);
            if (!rest.empty() && rest.front() == ' ') rest.erase(rest.begin());
            meta.emplace_back(k, rest);
        } else {
            throw IoError("read_container: unknown header key '" + key + "'");
        }
        if (ls.fail()) throw IoError("read_container: malformed header line '" + line + "'");
    }
    if (endian_str != "little") throw IoError("read_container: unsupported endianness " + endian_str);
    if (mode_min > mode_max) throw IoError("read_container: empty mode range");

    ContainerKind kind;
    if (kind_str == "field")
        kind = ContainerKind::field;
    else if (kind_str == "connection")
        kind = ContainerKind::connection;
    else if (kind_str == "involution")
        kind = ContainerKind::involution;
    else
        throw IoError("read_container: unknown kind " + kind_str);

    const TorusGrid grid(nx, ny, lx, ly);
    ThetaField f(Metric::flat(grid), mode_min, mode_max);
    const std::size_t ndoubles = grid.npoints() * 8;
    std::vector<char> buf(ndoubles * 8);
    for (int m = mode_min; m <= mode_max; ++m) {
        is.read(buf.data(), static_cast<std::streamsize>(buf.size()));
        if (static_cast<std::size_t>(is.gcount()) != buf.size()) throw IoError("read_container: truncated payload");
        MatGrid& grid_m = f.mode(m);
        const char* p = buf.data();
        for (int j = 0; j < ny; ++j)
            for (int i = 0; i < nx; ++i)
                for (int e = 0; e < 4; ++e) {
                    const double re = iodetail::get_f64(p);
                    const double im = iodetail::get_f64(p + 8);
                    p += 16;
                    grid_m.at(i, j).e[static_cast<std::size_t>(e)] = Complex(re, im);
                }
    }
    return Container{std::move(f), kind, std::move(meta)};
}

inline Container load_container(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw IoError("load_container: cannot open " + path);
    return read_container(is);
}

// ---- typed views -------------------------------------------------------------

inline Connection connection_from_container(const Container& c) {
    if (c.kind != ContainerKind::connection) throw IoError("container does not hold a connection");
    const ThetaField& f = c.field;
    for (int m = f.mode_min(); m <= f.mode_max(); ++m)
        if (m != 1 && m != -1 && f.mode(m).rms_fro() > 1e-12)
            throw NotAConnection("connection container carries modes outside +-1");
    return Connection(f.metric(), f.mode_or_zero(1), f.mode_or_zero(-1));
}

inline InvolutionField involution_from_container(const Container& c) {
    if (c.kind != ContainerKind::involution) throw IoError("container does not hold an involution");
    const ThetaField& f = c.field;
    for (int m = f.mode_min(); m <= f.mode_max(); ++m)
        if (m != 0 && f.mode(m).rms_fro() > 1e-12)
            throw NotAnInvolution("involution container carries nonzero theta modes");
    return InvolutionField(f.metric(), f.mode_or_zero(0));
}

inline Container container_of_connection(const Connection& A,
                                         std::vector<std::pair<std::string, std::string>> meta = {}) {
    return Container{A.as_field(), ContainerKind::connection, std::move(meta)};
}

inline Container container_of_involution(const InvolutionField& g,
                                         std::vector<std::pair<std::string, std::string>> meta = {}) {
    return Container{g.as_field(), ContainerKind::involution, std::move(meta)};
}

} // namespace tconn
