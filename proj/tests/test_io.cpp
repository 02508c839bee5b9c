#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "tatrec/io.hpp"
#include "test_util.hpp"

using namespace tatrec;
namespace fs = std::filesystem;

namespace {

fs::path workdir() {
    static const fs::path dir = [] {
        const fs::path d = fs::temp_directory_path() / "tatrec_io_tests";
        fs::remove_all(d);
        fs::create_directories(d);
        return d;
    }();
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    REQUIRE(is.good());
    std::ostringstream os;
    os << is.rdbuf();
    return os.str();
}

std::string first_line(const fs::path& p) {
    std::ifstream is(p, std::ios::binary);
    std::string line;
    std::getline(is, line);
    return line;
}

}  // namespace

TEST_CASE("fmt emits the shortest exact decimal") {
    CHECK(io::fmt(0.0) == "0");
    CHECK(io::fmt(1.0) == "1");
    CHECK(io::fmt(0.5) == "0.5");
    CHECK(io::fmt(0.1) == "0.1");
    CHECK(io::fmt(0.125) == "0.125");

    for (double v : {1.0 / 3.0, M_PI, 0.1 + 0.2, 1e300, -2.5e-17, 6.02214076e23,
                     1.7976931348623157e308}) {
        const std::string s = io::fmt(v);
        CHECK(std::strtod(s.c_str(), nullptr) == v);
        CHECK(s.size() <= 24);
    }
}

TEST_CASE("atomic write leaves only the final file behind") {
    const fs::path p = workdir() / "atomic.txt";
    io::atomic_write(p, [](std::ostream& os) { os << "payload"; });
    CHECK(slurp(p) == "payload");
    CHECK_FALSE(fs::exists(workdir() / "atomic.txt.tmp"));

    // Rewriting produces identical bytes, not an appended file.
    io::atomic_write(p, [](std::ostream& os) { os << "payload"; });
    CHECK(slurp(p) == "payload");

    CHECK_THROWS_AS(
        io::atomic_write(workdir() / "missing_dir" / "x.txt", [](std::ostream&) {}),
        std::runtime_error);
}

TEST_CASE("scalar fields round-trip bitwise through F64F") {
    const Grid g = testutil::square_grid(17, 2);  // h = 1/16, header is exact
    const ScalarField f = testutil::noise_field(g, g.omega, 5);
    const fs::path p = workdir() / "field.f64f";
    io::write_f64f(p, f);

    CHECK(first_line(p) == "F64F 21 21 0.0625 0.0625 -0.125 -0.125");

    const io::RawField r = io::read_f64f(p);
    CHECK(r.nx == g.nx);
    CHECK(r.ny == g.ny);
    CHECK(r.dx == g.dx);
    CHECK(r.ox == g.ox);
    REQUIRE(r.data == f.v);

    const ScalarField back = io::bind_field(r, g, "test");
    CHECK(back.v == f.v);

    // Binding to a mismatched lattice is refused.
    const Grid g2 = testutil::square_grid(19, 2);
    CHECK_THROWS_AS(io::bind_field(r, g2, "test"), std::runtime_error);
}

TEST_CASE("F64F rejects malformed input") {
    const fs::path bad_magic = workdir() / "bad_magic.f64f";
    io::atomic_write(bad_magic, [](std::ostream& os) { os << "FLD0 2 2 1 1 0 0\n"; });
    CHECK_THROWS_AS(io::read_f64f(bad_magic), std::runtime_error);

    const fs::path bad_dims = workdir() / "bad_dims.f64f";
    io::atomic_write(bad_dims, [](std::ostream& os) { os << "F64F 0 2 1 1 0 0\n"; });
    CHECK_THROWS_AS(io::read_f64f(bad_dims), std::runtime_error);

    // Valid header, payload cut short.
    const Grid g = testutil::square_grid(17, 2);
    const fs::path whole = workdir() / "whole.f64f";
    io::write_f64f(whole, ScalarField(g, 1.0));
    const std::string bytes = slurp(whole);
    const fs::path cut = workdir() / "cut.f64f";
    io::atomic_write(cut, [&](std::ostream& os) { os << bytes.substr(0, bytes.size() - 9); });
    CHECK_THROWS_AS(io::read_f64f(cut), std::runtime_error);

    CHECK_THROWS_AS(io::read_f64f(workdir() / "nonexistent.f64f"), std::runtime_error);
}

TEST_CASE("media round-trip bitwise through MED1") {
    const Grid g = testutil::square_grid(17, 2);
    MediumParams mp;
    mp.kind = MediumKind::lens;
    mp.q_amp = 0.3;
    const Medium m = make_medium(g, mp);

    const fs::path p = workdir() / "medium.med";
    io::write_medium(p, m);
    CHECK(first_line(p) == "MED1 2 2 18 18");

    const Medium back = io::read_medium(p);
    CHECK(back.grid.same_shape(g));
    CHECK(back.grid.omega == g.omega);
    CHECK(back.c.v == m.c.v);
    CHECK(back.g11.v == m.g11.v);
    CHECK(back.g22.v == m.g22.v);
    CHECK(back.q.v == m.q.v);

    const fs::path bad = workdir() / "bad.med";
    io::atomic_write(bad, [](std::ostream& os) { os << "MED2 0 0 3 3\n"; });
    CHECK_THROWS_AS(io::read_medium(bad), std::runtime_error);
}

TEST_CASE("traces round-trip bitwise through TRC1") {
    const Grid g = testutil::square_grid(12, 3);
    TimeGrid tg;
    tg.nt = 7;
    tg.dt = 0.03125;  // 2^-5, exact in the text header
    BoundaryTrace t = BoundaryTrace::zeros(g, tg);
    Rng rng(17);
    for (double& v : t.values) v = rng.uniform(-2.0, 2.0);

    const fs::path p = workdir() / "trace.trc";
    io::write_trace(p, t);
    CHECK(first_line(p) == "TRC1 7 44 0.03125");

    const BoundaryTrace back = io::read_trace(p);
    CHECK(back.time.nt == t.time.nt);
    CHECK(back.time.dt == t.time.dt);
    REQUIRE(back.nodes.size() == t.nodes.size());
    for (std::size_t k = 0; k < t.nodes.size(); ++k) {
        CHECK(back.nodes[k].iom == t.nodes[k].iom);
        CHECK(back.nodes[k].jom == t.nodes[k].jom);
        CHECK(back.nodes[k].x == t.nodes[k].x);
        CHECK(back.nodes[k].y == t.nodes[k].y);
        CHECK(back.nodes[k].arclen == t.nodes[k].arclen);
    }
    CHECK(back.values == t.values);
    back.require_layout(g, "test");  // binds to the originating lattice

    const fs::path bad = workdir() / "bad.trc";
    io::atomic_write(bad, [](std::ostream& os) { os << "TRC1 5 4 0.1\n"; });
    CHECK_THROWS_AS(io::read_trace(bad), std::runtime_error);  // nb < 8
}

TEST_CASE("PGM output is a golden byte stream with a scaling sidecar") {
    const Grid g(17, 16, 1.0, 1.0, 0.0, 0.0, IndexRect{1, 1, 15, 14});
    ScalarField f(g, 0.0);
    for (int i = 0; i < 17; ++i)
        for (int j = 0; j < 16; ++j) f(i, j) = i + j;  // min 0, max 31

    const fs::path p = workdir() / "img.pgm";
    io::write_pgm(p, f);

    // Rows run top down (j descending), min-max scaled to [0, 255].
    std::string want = "P5\n17 16\n255\n";
    for (int j = 15; j >= 0; --j)
        for (int i = 0; i < 17; ++i)
            want.push_back(static_cast<char>(std::llround((i + j) * 255.0 / 31.0)));
    const std::string got = slurp(p);
    CHECK(got == want);
    REQUIRE(got.size() == 13 + 17 * 16);
    CHECK(static_cast<unsigned char>(got[13]) == 123);          // (0, 15)
    CHECK(static_cast<unsigned char>(got[13 + 16]) == 255);     // (16, 15)
    CHECK(static_cast<unsigned char>(got[13 + 15 * 17]) == 0);  // (0, 0)
    CHECK(slurp(p.string() + ".meta") == "min 0\nmax 31\nnx 17\nny 16\n");

    // Constant fields map to zero without dividing by zero.
    io::write_pgm(workdir() / "flat.pgm", ScalarField(g, 7.0));
    const std::string flat = slurp(workdir() / "flat.pgm");
    REQUIRE(flat.size() == 13 + 17 * 16);
    for (std::size_t k = 13; k < flat.size(); ++k) CHECK(flat[k] == 0);
}

TEST_CASE("energy reports serialize as a stable CSV") {
    std::vector<EnergyReport> reports(2);
    reports[0].t = 0.0;
    reports[0].e_hd = 1.0;
    reports[0].e_kin = 0.25;
    reports[0].total = 1.25;
    reports[0].region = Region::omega;
    reports[1].t = 0.5;
    reports[1].e_hd = 0.125;
    reports[1].e_kin = 2.0;
    reports[1].total = 2.125;
    reports[1].region = Region::full;

    const fs::path p = workdir() / "energy.csv";
    io::write_energy_csv(p, reports);
    CHECK(slurp(p) ==
          "t,e_hd,e_kin,total,region\n"
          "0,1,0.25,1.25,omega\n"
          "0.5,0.125,2,2.125,full\n");
}
