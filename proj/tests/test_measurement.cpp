#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "tatrec/measurement.hpp"
#include "test_util.hpp"

using namespace tatrec;

TEST_CASE("arc grammar parses named and numeric sides") {
    const Arc a = Arc::parse("bottom:0.25:0.75:1.5");
    CHECK(a.side == 0);
    CHECK(a.from == 0.25);
    CHECK(a.to == 0.75);
    CHECK(a.s == 1.5);

    const Arc b = Arc::parse("2:0:1:0.8");
    CHECK(b.side == 2);
    CHECK(std::string(Arc::side_name(b.side)) == "top");

    const Arc c = Arc::parse(a.format());
    CHECK(c.side == a.side);
    CHECK(c.from == a.from);
    CHECK(c.to == a.to);
    CHECK(c.s == a.s);
}

TEST_CASE("arc grammar rejects malformed input") {
    CHECK_THROWS_AS(Arc::parse("bottom:0.25:0.75"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0:1:1:extra"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("north:0:1:1"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0.5:0.5:1"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0.8:0.2:1"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0:1.2:1"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0:1:0"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:0:1:-2"), std::invalid_argument);
    CHECK_THROWS_AS(Arc::parse("bottom:a:1:1"), std::invalid_argument);
}

TEST_CASE("full boundary cover has no spatial taper") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::full_boundary(g, 2.0);

    CHECK(ms.full_cover);
    CHECK(ms.any());
    CHECK(ms.sup_s() == 2.0);
    for (double s : ms.s) CHECK(s == 2.0);
    for (auto f : ms.on_gamma) CHECK(f == 1);

    // Plateau value 1 everywhere on the perimeter, corners included.
    for (const auto& n : g.boundary_nodes()) CHECK(ms.chi(0.0, n.arclen) == 1.0);
    // Perimeter coordinate wraps.
    CHECK(ms.chi(0.0, 4.25) == ms.chi(0.0, 0.25));
    CHECK(ms.chi(0.0, -0.5) == ms.chi(0.0, 3.5));
}

TEST_CASE("time taper follows the raised cosine over the last tenth") {
    const Grid g = testutil::square_grid(17, 2);
    const double s = 2.0;
    const MeasurementSet ms = MeasurementSet::full_boundary(g, s);

    const double p = 0.5;  // mid bottom
    CHECK(ms.chi(0.0, p) == 1.0);
    CHECK(ms.chi(0.9 * s, p) == 1.0);
    CHECK(ms.chi(0.95 * s, p) == Catch::Approx(0.5).margin(1e-12));
    CHECK(ms.chi(s, p) == 0.0);
    CHECK(ms.chi(1.5 * s, p) == 0.0);
    CHECK(ms.chi(-0.1, p) == 0.0);

    // Non-increasing in time at fixed position.
    double prev = 1.0;
    for (int k = 0; k <= 40; ++k) {
        const double v = ms.chi(k * (1.2 * s / 40.0), p);
        CHECK(v <= prev + 1e-15);
        CHECK(v >= 0.0);
        CHECK(v <= 1.0);
        prev = v;
    }
}

TEST_CASE("partial arc tapers in space over two node spacings") {
    const Grid g = testutil::square_grid(17, 2);  // dx = 1/16
    const MeasurementSet ms = MeasurementSet::from_arcs(g, {Arc::parse("bottom:0.25:0.75:1.0")});
    CHECK_FALSE(ms.full_cover);

    const double w = 2.0 / 16.0;
    CHECK(ms.chi(0.0, 0.5) == 1.0);                                        // deep inside
    CHECK(ms.chi(0.0, 0.25) == 0.0);                                       // arc endpoint
    CHECK(ms.chi(0.0, 0.25 + 0.5 * w) == Catch::Approx(0.5).margin(1e-12));
    CHECK(ms.chi(0.0, 0.75 - 0.5 * w) == Catch::Approx(0.5).margin(1e-12));
    CHECK(ms.chi(0.0, 0.25 + w) == 1.0);
    CHECK(ms.chi(0.0, 0.2) == 0.0);   // off the arc
    CHECK(ms.chi(0.0, 1.5) == 0.0);   // other side entirely

    // Node budgets: bottom nodes with arclen in [0.25, 0.75] carry s.
    const auto nodes = g.boundary_nodes();
    int on = 0;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (ms.on_gamma[k]) {
            ++on;
            CHECK(ms.s[k] == 1.0);
            CHECK(nodes[k].arclen >= 0.25 - 1e-9);
            CHECK(nodes[k].arclen <= 0.75 + 1e-9);
        }
    }
    CHECK(on == 9);
}

TEST_CASE("overlapping arcs keep the larger budget per node") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::from_arcs(
        g, {Arc::parse("bottom:0:1:0.5"), Arc::parse("bottom:0.5:1:2.0")});

    const auto nodes = g.boundary_nodes();
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (nodes[k].i >= g.omega.ilo && nodes[k].j == g.omega.jlo) {
            const double p = nodes[k].arclen;
            if (p > 1.0) continue;
            CHECK(ms.s[k] == (p >= 0.5 - 1e-9 ? 2.0 : 0.5));
        }
    }
    CHECK(ms.sup_s() == 2.0);
}

TEST_CASE("left-side arc reaching the corner claims the start node") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::from_arcs(g, {Arc::parse("left:0.5:1:1.0")});
    CHECK(ms.on_gamma[0] == 1);
    CHECK(ms.s[0] == 1.0);
    // But the bottom side next to it stays dark.
    CHECK(ms.on_gamma[1] == 0);
}

TEST_CASE("three full sides plus a gap is not a full cover") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::from_arcs(
        g, {Arc::parse("bottom:0:0.99:1.0"), Arc::parse("right:0:1:1.0"),
            Arc::parse("top:0:1:1.0"), Arc::parse("left:0:1:1.0")});
    CHECK_FALSE(ms.full_cover);
    // Spatial taper therefore applies: the bottom-right corner is dark.
    CHECK(ms.chi(0.0, 1.0) < 1.0);
}

TEST_CASE("empty arc list is rejected") {
    const Grid g = testutil::square_grid(17, 2);
    CHECK_THROWS_AS(MeasurementSet::from_arcs(g, {}), std::invalid_argument);
}

TEST_CASE("mask lattice matches chi sampled on the trace layout") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::from_arcs(g, {Arc::parse("bottom:0.25:0.75:0.3")});
    TimeGrid tg;
    tg.dt = 0.05;
    tg.nt = 10;

    const auto nodes = BoundaryTrace::layout(g);
    const auto mask = ms.mask_lattice(tg);
    REQUIRE(mask.size() == nodes.size() * 11);
    for (int n = 0; n <= tg.nt; ++n)
        for (std::size_t k = 0; k < nodes.size(); ++k)
            CHECK(mask[static_cast<std::size_t>(n) * nodes.size() + k] ==
                  ms.chi(n * tg.dt, nodes[k].arclen));

    // Beyond the budget the whole row is zero.
    for (std::size_t k = 0; k < nodes.size(); ++k)
        CHECK(mask[static_cast<std::size_t>(8) * nodes.size() + k] == 0.0);
}

TEST_CASE("masking a trace multiplies entrywise") {
    const Grid g = testutil::square_grid(17, 2);
    const MeasurementSet ms = MeasurementSet::from_arcs(g, {Arc::parse("top:0.2:0.8:0.4")});
    TimeGrid tg;
    tg.dt = 0.05;
    tg.nt = 12;

    BoundaryTrace tr = BoundaryTrace::zeros(g, tg);
    for (std::size_t k = 0; k < tr.values.size(); ++k) tr.values[k] = 2.0;

    const BoundaryTrace cut = masked(tr, ms);
    const auto mask = ms.mask_lattice(tg);
    REQUIRE(cut.values.size() == mask.size());
    for (std::size_t k = 0; k < mask.size(); ++k) CHECK(cut.values[k] == 2.0 * mask[k]);

    // Grid mismatch is rejected.
    const Grid g2 = testutil::square_grid(19, 2);
    const MeasurementSet ms2 = MeasurementSet::full_boundary(g2, 1.0);
    CHECK_THROWS_AS(masked(tr, ms2), std::invalid_argument);
}
