#include <catch2/catch_amalgamated.hpp>

#include "tatrec/phantoms.hpp"
#include "tatrec/wave.hpp"
#include "test_util.hpp"

using namespace tatrec;

TEST_CASE("cfl time step follows the stencil bound") {
    const Grid g = testutil::square_grid(32, 2);
    const Medium m = Medium::uniform(g);

    const CflEstimate e = cfl_dt(m, 0.5);
    CHECK(e.dt == Catch::Approx(0.5 * g.dx / std::sqrt(2.0)).epsilon(1e-14));
    CHECK(e.safety == 0.5);
    CHECK(e.stable_guaranteed);

    SECTION("doubling the speed halves the step") {
        const Medium m2 = Medium::uniform(g, 2.0);
        CHECK(cfl_dt(m2, 0.5).dt == Catch::Approx(0.5 * e.dt).epsilon(1e-14));
    }

    SECTION("safety above one is rejected") {
        CHECK_THROWS_AS(cfl_dt(m, 1.4), std::invalid_argument);
    }

    SECTION("a zeroth-order term can void the guarantee at safety one") {
        // The speed-based step ignores q; the Gershgorin check does not.
        const Medium mq = Medium::uniform(g, 1.0, 1.0, 1.0, 50.0);
        CHECK_FALSE(cfl_dt(mq, 1.0).stable_guaranteed);
        CHECK(cfl_limit(mq) < cfl_dt(mq, 1.0).dt);
    }

    SECTION("nonpositive safety is rejected") {
        CHECK_THROWS_AS(cfl_dt(m, 0.0), std::invalid_argument);
        CHECK_THROWS_AS(cfl_dt(m, -0.5), std::invalid_argument);
    }
}

TEST_CASE("time grid snaps the step so nt dt lands on T") {
    const TimeGrid tg = make_time_grid(0.73, 0.01);
    CHECK(tg.dt <= 0.01);
    CHECK(tg.nt == 73);
    CHECK(std::abs(tg.nt * tg.dt - 0.73) <= 1e-12 * 0.73);
    CHECK(tg.T() == Catch::Approx(0.73));

    CHECK_THROWS_AS(make_time_grid(-1.0, 0.01), std::invalid_argument);
    CHECK_THROWS_AS(make_time_grid(1.0, 0.0), std::invalid_argument);
}

TEST_CASE("zero initial data stays zero") {
    const Grid g = testutil::square_grid(24, 6);
    const Medium m = Medium::uniform(g);
    const ScalarField z(g, 0.0);
    const TimeGrid tg = make_time_grid(0.1, cfl_dt(m, 0.5).dt);

    const ForwardResult fr = forward_solve(m, z, tg);
    CHECK(fr.trace.max_abs() == 0.0);
    CHECK(fr.u_final.linf() == 0.0);
    CHECK(fr.ut_final.linf() == 0.0);
}

TEST_CASE("boundary trace is sampled on the omega perimeter at every step") {
    const Grid g = testutil::square_grid(32, 8);
    const Medium m = Medium::uniform(g);
    PhantomParams pp;
    pp.seed = 4;
    const ScalarField f = make_phantom(g, g.omega.shrunk(5), pp);
    const TimeGrid tg = make_time_grid(0.2, cfl_dt(m, 0.5).dt);

    const ForwardResult fr = forward_solve(m, f, tg);
    const auto ref = BoundaryTrace::layout(g);
    REQUIRE(fr.trace.nodes.size() == ref.size());
    CHECK(fr.trace.values.size() == static_cast<std::size_t>(tg.nt + 1) * ref.size());
    CHECK(fr.trace.time.nt == tg.nt);

    // Row zero is u(0) = f on the boundary: zero for an interior phantom.
    for (int k = 0; k < fr.trace.nb(); ++k) CHECK(fr.trace.at(0, k) == 0.0);

    // Padding is exterior bookkeeping: a repadded grid with the same interior
    // lattice accepts the trace, a different interior does not.
    CHECK_NOTHROW(fr.trace.require_layout(testutil::square_grid(32, 9), "test"));
    CHECK_THROWS_AS(fr.trace.require_layout(testutil::square_grid(34, 8), "test"),
                    std::invalid_argument);
}

TEST_CASE("leapfrog conserves the discrete energy budget") {
    // 96^2 interior plus a 16-node collar; the polynomial bump keeps the
    // spectral content mild so the O(dt^2) drift model applies.
    const Grid g = testutil::square_grid(96, 16);
    const Medium m = Medium::uniform(g);
    ScalarField f(g, 0.0);
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double r2 =
                (std::pow(g.x(i) - 0.5, 2) + std::pow(g.y(j) - 0.5, 2)) / (0.42 * 0.42);
            if (r2 < 1.0) f(i, j) = std::pow(1.0 - r2, 6);
        }

    const TimeGrid tg = make_time_grid(0.3, cfl_dt(m, 0.5).dt);
    ForwardOptions fo;
    fo.log = EnergyLogging::every_step;
    const ForwardResult fr = forward_solve(m, f, tg, fo);

    REQUIRE(fr.energy_full.size() == static_cast<std::size_t>(tg.nt) + 1);
    const double e0 = fr.energy_full.front().total;
    REQUIRE(e0 > 0.0);
    double drift = 0.0;
    for (const auto& e : fr.energy_full) drift = std::max(drift, std::abs(e.total - e0) / e0);
    CHECK(drift <= 1e-3);
}

TEST_CASE("interior energy drains once the wave crosses the boundary") {
    const Grid g = testutil::square_grid(96, 72);
    const Medium m = Medium::uniform(g);
    PhantomParams pp;
    pp.seed = 6;
    pp.count = 1;
    const ScalarField f = make_phantom(g, g.omega.shrunk(30), pp);

    // T beyond the diagonal transit: all rays from the support have exited.
    const TimeGrid tg = make_time_grid(1.5, cfl_dt(m, 0.5).dt);
    const ForwardResult fr = forward_solve(m, f, tg);
    REQUIRE(fr.energy_omega.size() >= 2);
    const double ratio = fr.energy_omega.back().total / fr.energy_omega.front().total;
    CHECK(ratio <= 0.05);
}

TEST_CASE("finite speed of propagation with an evanescent-tail allowance") {
    const int n = 96;
    const Grid g = testutil::square_grid(n, 24);
    const Medium m = Medium::uniform(g);

    ScalarField f(g, 0.0);
    const double R = 0.1, cx = 0.35, cy = 0.35;
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double r = std::hypot(g.x(i) - cx, g.y(j) - cy) / R;
            if (r < 1.0) f(i, j) = smooth_bump(r);
        }

    const double T = 0.15;
    const TimeGrid tg = make_time_grid(T, cfl_dt(m, 0.5).dt);
    const ForwardResult fr = forward_solve(m, f, tg);

    // Physical support radius grows to R + cT; the leapfrog stencil leaks an
    // exponentially small dispersive tail beyond it, gone within ~12 cells.
    double tail_near = 0.0, tail_far = 0.0;
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double d = std::hypot(g.x(i) - cx, g.y(j) - cy);
            if (d > R + T + 0.05) tail_near = std::max(tail_near, std::abs(fr.u_final(i, j)));
            if (d > R + T + 0.14) tail_far = std::max(tail_far, std::abs(fr.u_final(i, j)));
        }
    CHECK(tail_near <= 1e-4);
    CHECK(tail_far <= 1e-12);
    CHECK(fr.u_final.linf() > 1e-2);
}

TEST_CASE("forward then backward reproduces the initial data") {
    const Grid g = testutil::square_grid(64, 12);
    const Medium m = testutil::lens_medium(g);
    PhantomParams pp;
    pp.seed = 8;
    const ScalarField f = make_phantom(g, g.omega.shrunk(20), pp);

    const TimeGrid tg = make_time_grid(0.35, cfl_dt(m, 0.6).dt);
    const ForwardResult fr = forward_solve(m, f, tg);
    const BackwardResult back =
        backward_dirichlet_solve(m, fr.trace, fr.u_final, fr.ut_final, EnergyLogging::endpoints);

    CHECK(back.warnings.empty());
    double err = 0.0;
    for (std::size_t k = 0; k < f.v.size(); ++k)
        err = std::max(err, std::abs(back.u0.v[k] - f.v[k]));
    CHECK(err <= 1e-10 * f.linf());
}

TEST_CASE("backward solve with silent boundary conserves interior energy") {
    const Grid g = testutil::square_grid(96, 2);
    const Medium m = testutil::lens_medium(g);
    ScalarField u_T(g, 0.0);
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double r2 =
                (std::pow(g.x(i) - 0.5, 2) + std::pow(g.y(j) - 0.5, 2)) / (0.42 * 0.42);
            if (r2 < 1.0) u_T(i, j) = std::pow(1.0 - r2, 6);
        }

    const TimeGrid tg = make_time_grid(0.5, cfl_dt(m, 0.5).dt);
    const BoundaryTrace quiet = BoundaryTrace::zeros(g, tg);
    const BackwardResult back = backward_dirichlet_solve(m, quiet, u_T, ScalarField(g, 0.0),
                                                         EnergyLogging::every_step);

    REQUIRE(back.energy_omega.size() == static_cast<std::size_t>(tg.nt) + 1);
    const double e0 = back.energy_omega.front().total;
    REQUIRE(e0 > 0.0);
    for (const auto& e : back.energy_omega)
        CHECK(std::abs(e.total - e0) / e0 <= 1e-3);
}

TEST_CASE("trivial backward problem returns zero") {
    const Grid g = testutil::square_grid(32, 2);
    const Medium m = Medium::uniform(g);
    const TimeGrid tg = make_time_grid(0.2, cfl_dt(m, 0.5).dt);
    const BackwardResult back = backward_dirichlet_solve(
        m, BoundaryTrace::zeros(g, tg), ScalarField(g, 0.0), ScalarField(g, 0.0));
    CHECK(back.u0.linf() == 0.0);
}

TEST_CASE("incompatible final data is flagged but processed") {
    const Grid g = testutil::square_grid(32, 8);
    const Medium m = Medium::uniform(g);

    // Bump close to the bottom edge so the trace is loud at t = T there.
    ScalarField f(g, 0.0);
    for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
        for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) {
            const double r = std::hypot(g.x(i) - 0.5, g.y(j) - 0.2) / 0.12;
            if (r < 1.0) f(i, j) = smooth_bump(r);
        }
    const TimeGrid tg = make_time_grid(0.25, cfl_dt(m, 0.5).dt);
    const ForwardResult fr = forward_solve(m, f, tg);

    // Zero Cauchy data against a nonzero trace at t = T violates first-order
    // compatibility; the naive reversal path depends on this proceeding.
    const int bottom_mid = g.omega.width() / 2;
    REQUIRE(std::abs(fr.trace.at(tg.nt, bottom_mid)) > 1e-8);
    const BackwardResult back = backward_dirichlet_solve(m, fr.trace, ScalarField(g, 0.0),
                                                         ScalarField(g, 0.0));
    CHECK_FALSE(back.warnings.empty());
    CHECK(back.u0.all_finite());
}

TEST_CASE("forward solve validates its preconditions") {
    const Grid g = testutil::square_grid(48, 4);
    const Medium m = Medium::uniform(g);
    PhantomParams pp;
    pp.seed = 5;
    const ScalarField f = make_phantom(g, g.omega.shrunk(8), pp);

    SECTION("padding must cover half the travel time") {
        // pad 4 nodes = 4/47 length units; T = 1.0 needs 0.5.
        const TimeGrid tg = make_time_grid(1.0, cfl_dt(m, 0.5).dt);
        CHECK_THROWS_AS(forward_solve(m, f, tg), std::invalid_argument);
    }

    SECTION("CFL violation is rejected") {
        TimeGrid tg = make_time_grid(0.1, cfl_dt(m, 0.5).dt);
        tg.dt = 10.0 * tg.dt;
        tg.nt = 3;
        CHECK_THROWS_AS(forward_solve(m, f, tg), std::invalid_argument);
    }

    SECTION("support must keep a margin inside omega") {
        ScalarField wide(g, 0.0);
        for (int i = g.omega.ilo; i <= g.omega.ihi; ++i)
            for (int j = g.omega.jlo; j <= g.omega.jhi; ++j) wide(i, j) = 1.0;
        const TimeGrid tg = make_time_grid(0.05, cfl_dt(m, 0.5).dt);
        CHECK_THROWS_AS(forward_solve(m, wide, tg), std::invalid_argument);
    }
}
