#include <cmath>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "tatrec/elliptic.hpp"
#include "tatrec/energy.hpp"
#include "tatrec/operator.hpp"
#include "test_util.hpp"

using namespace tatrec;

namespace {

// Variable-coefficient medium with q = 0 so the extension problem is a pure
// weighted Laplace solve; q > 0 cases are covered separately.
Medium wavy_medium(const Grid& g) {
    ScalarField c(g, 1.0), g11(g, 1.0), g22(g, 1.0), q(g, 0.0);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const double x = g.x(i), y = g.y(j);
            c(i, j) = 1.0 + 0.2 * std::sin(2.0 * x) * std::cos(1.0 + y);
            g11(i, j) = 1.0 + 0.3 * x * x;
            g22(i, j) = 1.0 + 0.15 * y;
        }
    return Medium(g, c, g11, g22, q);
}

std::vector<double> sample_boundary(const Grid& g, double (*f)(double, double)) {
    std::vector<double> b;
    for (const auto& n : g.boundary_nodes()) b.push_back(f(g.x(n.i), g.y(n.j)));
    return b;
}

}  // namespace

TEST_CASE("extension of constant boundary data is that constant") {
    const Grid g = testutil::square_grid(48, 2);
    const Medium m = wavy_medium(g);
    const std::vector<double> b(g.boundary_nodes().size(), 3.0);

    CgInfo info;
    const ScalarField phi = harmonic_extension(m, b, 1e-12, 5000, &info);

    double err = 0.0;
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j)
            err = std::max(err, std::abs(phi(i, j) - 3.0));
    CHECK(err <= 1e-8);
    CHECK(info.rel_residual <= 1e-12);
    CHECK(phi.exterior_linf(g.omega) == 0.0);
}

TEST_CASE("x^2 - y^2 is reproduced exactly on a uniform medium") {
    // The centered second difference of a quadratic is exact, so x^2 - y^2 is
    // harmonic for the discrete operator, not just in the limit.  The solver
    // must return it to solver tolerance at any resolution.
    const Grid g = testutil::square_grid(64, 2);
    const Medium m = Medium::uniform(g);
    const auto b = sample_boundary(g, +[](double x, double y) { return x * x - y * y; });

    const ScalarField phi = harmonic_extension(m, b);

    double err = 0.0;
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double exact = g.x(i) * g.x(i) - g.y(j) * g.y(j);
            err = std::max(err, std::abs(phi(i, j) - exact));
        }
    CHECK(err <= 1e-8);
}

TEST_CASE("extension is orthogonal to zero-boundary fields in the energy form") {
    const Grid g = testutil::square_grid(48, 2);
    const Medium m = testutil::lens_medium(g);
    const auto b = sample_boundary(g, +[](double x, double y) { return std::sin(3.0 * x) + y; });

    const ScalarField phi = harmonic_extension(m, b);
    const ScalarField w = testutil::noise_field(g, g.omega.shrunk(1), 21);

    const double cross = dirichlet_form(m, phi, w, Region::omega);
    const double scale = std::sqrt(dirichlet_form(m, phi, phi, Region::omega) *
                                   dirichlet_form(m, w, w, Region::omega));
    REQUIRE(scale > 0.0);
    CHECK(std::abs(cross) <= 1e-8 * scale);
}

TEST_CASE("energy Pythagoras splits any lift of the boundary data") {
    const Grid g = testutil::square_grid(48, 2);
    const Medium m = testutil::lens_medium(g);
    const auto b = sample_boundary(g, +[](double x, double y) { return x + 0.5 * y * y; });

    const ScalarField phi = harmonic_extension(m, b);

    // Any other field with the same boundary values: the extension plus
    // interior noise.
    ScalarField h = phi;
    const ScalarField w = testutil::noise_field(g, g.omega.shrunk(1), 33);
    for (std::size_t k = 0; k < g.size(); ++k) h.v[k] += w.v[k];

    const double dh = dirichlet_form(m, h, h, Region::omega);
    const double dphi = dirichlet_form(m, phi, phi, Region::omega);
    const double ddiff = dirichlet_form(m, w, w, Region::omega);
    CHECK(std::abs(dh - (dphi + ddiff)) <= 1e-8 * dh);
    CHECK(dphi <= dh * (1.0 + 1e-12));
}

TEST_CASE("extension obeys the discrete maximum principle") {
    const Grid g = testutil::square_grid(40, 2);
    const Medium m = wavy_medium(g);
    const auto bn = g.boundary_nodes();
    std::vector<double> b;
    for (const auto& n : bn) b.push_back(std::sin(7.0 * n.arclen));

    const double blo = *std::min_element(b.begin(), b.end());
    const double bhi = *std::max_element(b.begin(), b.end());
    const ScalarField phi = harmonic_extension(m, b);

    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            REQUIRE(phi(i, j) >= blo - 1e-10);
            REQUIRE(phi(i, j) <= bhi + 1e-10);
        }
}

TEST_CASE("starved iteration budget raises CgFailure with diagnostics") {
    const Grid g = testutil::square_grid(64, 2);
    const Medium m = Medium::uniform(g);
    const auto b = sample_boundary(g, +[](double x, double y) { return std::sin(5.0 * x) * y; });

    try {
        harmonic_extension(m, b, 1e-12, 2);
        FAIL("expected CgFailure");
    } catch (const CgFailure& e) {
        CHECK(e.info.iterations == 2);
        CHECK(e.info.history.size() == 2);
        CHECK(e.info.rel_residual > 1e-12);
    }
    // The failure type participates in the library error hierarchy.
    CHECK_THROWS_AS(harmonic_extension(m, b, 1e-12, 2), NumericError);
}

TEST_CASE("extension validates its inputs") {
    const Grid g = testutil::square_grid(24, 2);
    const Medium m = Medium::uniform(g);
    std::vector<double> b(g.boundary_nodes().size(), 1.0);

    std::vector<double> short_b(b.size() - 1, 1.0);
    CHECK_THROWS_AS(harmonic_extension(m, short_b), std::invalid_argument);

    std::vector<double> bad = b;
    bad[3] = std::nan("");
    CHECK_THROWS_AS(harmonic_extension(m, bad), std::invalid_argument);

    CHECK_THROWS_AS(harmonic_extension(m, b, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(harmonic_extension(m, b, 1e-10, 0), std::invalid_argument);
}
