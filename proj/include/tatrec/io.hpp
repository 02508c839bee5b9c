#pragma once

#include <bit>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "tatrec/energy.hpp"
#include "tatrec/medium.hpp"
#include "tatrec/wave.hpp"

namespace tatrec {

static_assert(std::endian::native == std::endian::little,
              "file formats store raw little-endian doubles");

namespace io {

/// Shortest decimal that round-trips a double; used by every text format so
/// identical values always serialize to identical bytes.
inline std::string fmt(double v) {
    char buf[40];
    for (int prec = 1; prec <= 17; ++prec) {
        std::snprintf(buf, sizeof buf, "%.*g", prec, v);
        if (std::strtod(buf, nullptr) == v) break;
    }
    return buf;
}

/// Writes through a temporary in the same directory, then renames; readers
/// never observe partial files and reruns produce byte-identical results.
template <typename Fn>
void atomic_write(const std::filesystem::path& path, Fn&& emit) {
    const std::filesystem::path tmp = path.string() + ".tmp";
    {
        std::ofstream os(tmp, std::ios::binary | std::ios::trunc);
        if (!os) throw std::runtime_error("cannot open '" + tmp.string() + "' for writing");
        emit(os);
        os.flush();
        if (!os) throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
    std::filesystem::rename(tmp, path);
}

inline void put_doubles(std::ostream& os, const std::vector<double>& v) {
    os.write(reinterpret_cast<const char*>(v.data()),
             static_cast<std::streamsize>(v.size() * sizeof(double)));
}

inline void get_doubles(std::istream& is, std::vector<double>& v, const std::string& what) {
    is.read(reinterpret_cast<char*>(v.data()),
            static_cast<std::streamsize>(v.size() * sizeof(double)));
    if (static_cast<std::size_t>(is.gcount()) != v.size() * sizeof(double))
        throw std::runtime_error(what + ": truncated payload");
}

// --- F64F: "F64F nx ny dx dy ox oy\n" + nx*ny little-endian doubles, ---
// --- x-major (j fastest), matching the in-memory layout.             ---

inline void write_f64f_body(std::ostream& os, const ScalarField& f) {
    const Grid& g = f.grid;
    os << "F64F " << g.nx << ' ' << g.ny << ' ' << fmt(g.dx) << ' ' << fmt(g.dy) << ' '
       << fmt(g.ox) << ' ' << fmt(g.oy) << '\n';
    put_doubles(os, f.v);
}

inline void write_f64f(const std::filesystem::path& path, const ScalarField& f) {
    atomic_write(path, [&](std::ostream& os) { write_f64f_body(os, f); });
}

/// Field data with its lattice header but no Omega designation; bind to a
/// Grid to obtain a ScalarField.
struct RawField {
    int nx = 0, ny = 0;
    double dx = 0, dy = 0, ox = 0, oy = 0;
    std::vector<double> data;
};

inline RawField read_f64f_body(std::istream& is, const std::string& what) {
    std::string magic;
    RawField r;
    is >> magic >> r.nx >> r.ny >> r.dx >> r.dy >> r.ox >> r.oy;
    if (!is || magic != "F64F") throw std::runtime_error(what + ": bad F64F header");
    if (r.nx < 1 || r.ny < 1 || r.nx > 1 << 16 || r.ny > 1 << 16)
        throw std::runtime_error(what + ": implausible F64F dimensions");
    is.get();  // newline after the header
    r.data.resize(static_cast<std::size_t>(r.nx) * r.ny);
    get_doubles(is, r.data, what);
    return r;
}

inline RawField read_f64f(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    return read_f64f_body(is, path.string());
}

/// Bind a raw field onto a known grid; every lattice parameter must agree.
inline ScalarField bind_field(const RawField& r, const Grid& g, const std::string& what) {
    const bool ok = r.nx == g.nx && r.ny == g.ny && std::abs(r.dx - g.dx) <= 1e-12 * g.dx &&
                    std::abs(r.dy - g.dy) <= 1e-12 * g.dy && std::abs(r.ox - g.ox) <= 1e-9 &&
                    std::abs(r.oy - g.oy) <= 1e-9;
    if (!ok) throw std::runtime_error(what + ": field lattice does not match the grid");
    ScalarField f(g);
    f.v = r.data;
    return f;
}

// --- Medium file: "MED1 ilo jlo ihi jhi\n" + F64F blocks c, g11, g22, q. ---

inline void write_medium(const std::filesystem::path& path, const Medium& m) {
    atomic_write(path, [&](std::ostream& os) {
        const IndexRect& om = m.grid.omega;
        os << "MED1 " << om.ilo << ' ' << om.jlo << ' ' << om.ihi << ' ' << om.jhi << '\n';
        write_f64f_body(os, m.c);
        write_f64f_body(os, m.g11);
        write_f64f_body(os, m.g22);
        write_f64f_body(os, m.q);
    });
}

inline Medium read_medium(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string magic;
    IndexRect om;
    is >> magic >> om.ilo >> om.jlo >> om.ihi >> om.jhi;
    if (!is || magic != "MED1") throw std::runtime_error(path.string() + ": bad MED1 header");
    is.get();
    const std::string what = path.string();
    RawField c = read_f64f_body(is, what), g11 = read_f64f_body(is, what),
             g22 = read_f64f_body(is, what), q = read_f64f_body(is, what);
    Grid g(c.nx, c.ny, c.dx, c.dy, c.ox, c.oy, om);
    return Medium(g, bind_field(c, g, what), bind_field(g11, g, what), bind_field(g22, g, what),
                  bind_field(q, g, what));
}

// --- TRC1: "TRC1 nt nb dt\n" + nb node lines "iom jom x y arclen\n" ---
// --- + (nt+1)*nb little-endian doubles, step-major.                  ---

inline void write_trace(const std::filesystem::path& path, const BoundaryTrace& t) {
    atomic_write(path, [&](std::ostream& os) {
        os << "TRC1 " << t.time.nt << ' ' << t.nb() << ' ' << fmt(t.time.dt) << '\n';
        for (const auto& n : t.nodes)
            os << n.iom << ' ' << n.jom << ' ' << fmt(n.x) << ' ' << fmt(n.y) << ' '
               << fmt(n.arclen) << '\n';
        put_doubles(os, t.values);
    });
}

inline BoundaryTrace read_trace(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("cannot open '" + path.string() + "'");
    std::string magic;
    BoundaryTrace t;
    int nb = 0;
    is >> magic >> t.time.nt >> nb >> t.time.dt;
    if (!is || magic != "TRC1") throw std::runtime_error(path.string() + ": bad TRC1 header");
    if (t.time.nt < 1 || nb < 8 || !(t.time.dt > 0.0))
        throw std::runtime_error(path.string() + ": implausible TRC1 header");
    t.nodes.resize(nb);
    for (auto& n : t.nodes) {
        is >> n.iom >> n.jom >> n.x >> n.y >> n.arclen;
        if (!is) throw std::runtime_error(path.string() + ": bad TRC1 node table");
    }
    is.get();
    t.values.resize(static_cast<std::size_t>(t.time.nt + 1) * nb);
    get_doubles(is, t.values, path.string());
    return t;
}

// --- 8-bit binary PGM, min-max scaled, with a text sidecar holding the ---
// --- scaling so the image is quantitatively interpretable.             ---

inline void write_pgm(const std::filesystem::path& path, const ScalarField& f) {
    double lo = f.v.empty() ? 0.0 : f.v[0], hi = lo;
    for (double a : f.v) {
        lo = std::min(lo, a);
        hi = std::max(hi, a);
    }
    const double span = hi > lo ? hi - lo : 1.0;
    atomic_write(path, [&](std::ostream& os) {
        os << "P5\n" << f.grid.nx << ' ' << f.grid.ny << "\n255\n";
        std::vector<unsigned char> row(f.grid.nx);
        for (int j = f.grid.ny - 1; j >= 0; --j) {  // top image row = max y
            for (int i = 0; i < f.grid.nx; ++i)
                row[i] = static_cast<unsigned char>(
                    std::llround((f(i, j) - lo) / span * 255.0));
            os.write(reinterpret_cast<const char*>(row.data()), row.size());
        }
    });
    atomic_write(path.string() + ".meta", [&](std::ostream& os) {
        os << "min " << fmt(lo) << "\nmax " << fmt(hi) << "\nnx " << f.grid.nx << "\nny "
           << f.grid.ny << '\n';
    });
}

// --- Energy CSV: t,e_hd,e_kin,total,region rows. ---

inline void write_energy_csv(const std::filesystem::path& path,
                             const std::vector<EnergyReport>& reports) {
    atomic_write(path, [&](std::ostream& os) {
        os << "t,e_hd,e_kin,total,region\n";
        for (const auto& r : reports)
            os << fmt(r.t) << ',' << fmt(r.e_hd) << ',' << fmt(r.e_kin) << ',' << fmt(r.total)
               << ',' << region_name(r.region) << '\n';
    });
}

}  // namespace io
}  // namespace tatrec
