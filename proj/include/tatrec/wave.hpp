#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tatrec/energy.hpp"
#include "tatrec/errors.hpp"
#include "tatrec/operator.hpp"

namespace tatrec {

struct TimeGrid {
    int nt = 0;
    double dt = 0.0;
    double T() const { return nt * dt; }
};

/// Smallest step count whose uniform dt does not exceed dt_max.
inline TimeGrid make_time_grid(double T, double dt_max) {
    if (!(T > 0.0) || !(dt_max > 0.0))
        throw std::invalid_argument("make_time_grid: T and dt_max must be positive");
    int nt = static_cast<int>(std::ceil(T / dt_max - 1e-12));
    if (nt < 1) nt = 1;
    return {nt, T / nt};
}

struct CflEstimate {
    double dt = 0.0;
    double safety = 0.0;
    /// dt also satisfies the Gershgorin bound dt^2 * lambda_max(P) <= 4.
    bool stable_guaranteed = false;
};

/// Heuristic step dt = safety * min(dx,dy) / (speed_max * sqrt(2)), checked
/// against a rigorous eigenvalue bound for the assembled stencil.
inline CflEstimate cfl_dt(const Medium& m, double safety) {
    if (!(safety > 0.0) || safety > 1.0)
        throw std::invalid_argument("cfl_dt: safety must lie in (0, 1]");
    CflEstimate e;
    e.safety = safety;
    e.dt = safety * std::min(m.grid.dx, m.grid.dy) / (m.speed_max() * std::sqrt(2.0));
    OperatorTable T(m);
    double lam = 0.0;
    for (int i = 1; i < m.grid.nx - 1; ++i)
        for (int j = 1; j < m.grid.ny - 1; ++j) {
            const std::size_t k = m.grid.idx(i, j);
            lam = std::max(lam, 2.0 * T.s[k] * (T.fe[k] + T.fw[k] + T.fn[k] + T.fs[k]) + T.qv[k]);
        }
    e.stable_guaranteed = e.dt * e.dt * lam <= 4.0 * (1.0 + 1e-12);
    return e;
}

/// Rigorous step bound from the same Gershgorin estimate.
inline double cfl_limit(const Medium& m) {
    OperatorTable T(m);
    double lam = 0.0;
    for (int i = 1; i < m.grid.nx - 1; ++i)
        for (int j = 1; j < m.grid.ny - 1; ++j) {
            const std::size_t k = m.grid.idx(i, j);
            lam = std::max(lam, 2.0 * T.s[k] * (T.fe[k] + T.fw[k] + T.fn[k] + T.fs[k]) + T.qv[k]);
        }
    return 2.0 / std::sqrt(lam);
}

/// Time series of wave values on the Omega perimeter nodes.  Node indices
/// are stored relative to the Omega corner so traces bind to any grid with
/// the same Omega lattice, regardless of padding.
struct BoundaryTrace {
    struct Node {
        int iom, jom;  // indices relative to (omega.ilo, omega.jlo)
        double x, y;
        double arclen;
    };

    TimeGrid time;
    std::vector<Node> nodes;
    std::vector<double> values;  // (nt+1) x nb, step-major

    int nb() const { return static_cast<int>(nodes.size()); }
    double& at(int n, int k) { return values[static_cast<std::size_t>(n) * nodes.size() + k]; }
    double at(int n, int k) const { return values[static_cast<std::size_t>(n) * nodes.size() + k]; }

    static std::vector<Node> layout(const Grid& g) {
        std::vector<Node> out;
        for (const auto& b : g.boundary_nodes())
            out.push_back({b.i - g.omega.ilo, b.j - g.omega.jlo, b.x, b.y, b.arclen});
        return out;
    }

    static BoundaryTrace zeros(const Grid& g, TimeGrid tg) {
        BoundaryTrace t;
        t.time = tg;
        t.nodes = layout(g);
        t.values.assign(static_cast<std::size_t>(tg.nt + 1) * t.nodes.size(), 0.0);
        return t;
    }

    double max_abs() const {
        double m = 0.0;
        for (double a : values) m = std::max(m, std::abs(a));
        return m;
    }

    /// Throws unless this trace was sampled on the same Omega lattice.
    void require_layout(const Grid& g, const std::string& what) const {
        const auto ref = layout(g);
        if (ref.size() != nodes.size())
            throw std::invalid_argument(what + ": trace boundary layout does not match the grid");
        for (std::size_t k = 0; k < ref.size(); ++k) {
            const bool idx_ok = ref[k].iom == nodes[k].iom && ref[k].jom == nodes[k].jom;
            const bool pos_ok = std::abs(ref[k].x - nodes[k].x) <= 1e-9 &&
                                std::abs(ref[k].y - nodes[k].y) <= 1e-9;
            if (!idx_ok || !pos_ok)
                throw std::invalid_argument(what + ": trace boundary layout does not match the grid");
        }
    }
};

enum class EnergyLogging { none, endpoints, every_step };

struct ForwardOptions {
    EnergyLogging log = EnergyLogging::endpoints;
    bool check_support = true;
};

struct ForwardResult {
    BoundaryTrace trace;
    ScalarField u_final;   // u(T) on the Omega closure, zero outside
    ScalarField ut_final;  // centered-difference u_t(T), same support
    std::vector<EnergyReport> energy_omega;
    std::vector<EnergyReport> energy_full;
};

namespace detail {

/// u_next = 2 u - u_prev - dt^2 P u on the wall interior of the full grid.
inline void leapfrog_step(const OperatorTable& T, const std::vector<double>& u_prev,
                          const std::vector<double>& u, std::vector<double>& u_next, double dt2) {
    const int nx = T.grid.nx, ny = T.grid.ny;
#pragma omp parallel for schedule(static)
    for (int i = 1; i < nx - 1; ++i)
        for (int j = 1; j < ny - 1; ++j) {
            const std::size_t k = T.grid.idx(i, j);
            u_next[k] = 2.0 * u[k] - u_prev[k] - dt2 * T.apply_at(u, i, j);
        }
}

inline ScalarField wrap(const Grid& g, std::vector<double> v) {
    ScalarField f(g);
    f.v = std::move(v);
    return f;
}

}  // namespace detail

/// Explicit leapfrog solve of u_tt + P u = 0, u(0) = f, u_t(0) = 0 on the
/// padded grid with a homogeneous Dirichlet outer wall.  Records the trace
/// on the Omega perimeter and the Cauchy data at t = T.  The padding must
/// keep wall reflections out of Omega for the whole window.
inline ForwardResult forward_solve(const Medium& m, const ScalarField& f, TimeGrid tg,
                                   const ForwardOptions& opts = {}) {
    require_same_grid(m.grid, f.grid, "forward_solve");
    require_finite(f, "forward_solve");
    if (tg.nt < 1 || !(tg.dt > 0.0)) throw std::invalid_argument("forward_solve: empty time grid");

    const Grid& g = m.grid;
    const OperatorTable T(m);
    {
        double lam = 0.0;
        for (int i = 1; i < g.nx - 1; ++i)
            for (int j = 1; j < g.ny - 1; ++j) {
                const std::size_t k = g.idx(i, j);
                lam = std::max(lam,
                               2.0 * T.s[k] * (T.fe[k] + T.fw[k] + T.fn[k] + T.fs[k]) + T.qv[k]);
            }
        if (tg.dt * tg.dt * lam > 4.0 * (1.0 + 1e-12))
            throw std::invalid_argument("forward_solve: dt violates the CFL bound");
    }
    {
        const double wall = std::min(std::min(g.omega.ilo * g.dx, g.omega.jlo * g.dy),
                                     std::min((g.nx - 1 - g.omega.ihi) * g.dx,
                                              (g.ny - 1 - g.omega.jhi) * g.dy));
        if (wall + 1e-12 < m.speed_max() * tg.T() / 2.0)
            throw std::invalid_argument(
                "forward_solve: padding too small, wall reflections would reach Omega before T");
    }
    if (opts.check_support && f.exterior_linf(g.omega.shrunk(2)) > 1e-12 * f.linf())
        throw std::invalid_argument(
            "forward_solve: initial field must be supported inside Omega with a 2-node margin");

    ForwardResult res;
    res.trace = BoundaryTrace::zeros(g, tg);
    const auto bn = g.boundary_nodes();
    const double dt = tg.dt, dt2 = dt * dt;

    std::vector<double> u_prev = f.v, u_cur(g.size()), u_next(g.size());
    {
        const int nx = g.nx, ny = g.ny;
#pragma omp parallel for schedule(static)
        for (int i = 1; i < nx - 1; ++i)
            for (int j = 1; j < ny - 1; ++j) {
                const std::size_t k = g.idx(i, j);
                u_cur[k] = u_prev[k] - 0.5 * dt2 * T.apply_at(u_prev, i, j);
            }
    }

    auto record_trace = [&](int n, const std::vector<double>& u) {
        for (std::size_t k = 0; k < bn.size(); ++k)
            res.trace.at(n, static_cast<int>(k)) = u[g.idx(bn[k].i, bn[k].j)];
    };
    auto log_energy = [&](int n, const std::vector<double>& u, const std::vector<double>& ut) {
        const double t = n * dt;
        ScalarField uf = detail::wrap(g, u), utf = detail::wrap(g, ut);
        res.energy_omega.push_back(energy_of(T, uf, utf, Region::omega, t));
        res.energy_full.push_back(energy_of(T, uf, utf, Region::full, t));
    };
    auto want_level = [&](int n) {
        if (opts.log == EnergyLogging::none) return false;
        if (opts.log == EnergyLogging::every_step) return true;
        return n == 0 || n == tg.nt;
    };

    record_trace(0, u_prev);
    record_trace(1, u_cur);
    if (want_level(0)) log_energy(0, u_prev, std::vector<double>(g.size(), 0.0));

    std::vector<double> ut(g.size());
    auto centered_ut = [&](const std::vector<double>& hi, const std::vector<double>& lo) {
        for (std::size_t k = 0; k < ut.size(); ++k) ut[k] = (hi[k] - lo[k]) / (2.0 * dt);
    };

    for (int n = 1; n < tg.nt; ++n) {
        detail::leapfrog_step(T, u_prev, u_cur, u_next, dt2);
        record_trace(n + 1, u_next);
        if (want_level(n)) {
            centered_ut(u_next, u_prev);
            log_energy(n, u_cur, ut);
        }
        std::swap(u_prev, u_cur);
        std::swap(u_cur, u_next);
    }

    // One extra step past T gives the centered velocity at the final level.
    detail::leapfrog_step(T, u_prev, u_cur, u_next, dt2);
    centered_ut(u_next, u_prev);
    if (want_level(tg.nt)) log_energy(tg.nt, u_cur, ut);

    res.u_final = detail::wrap(g, u_cur);
    res.u_final.zero_outside(g.omega);
    res.ut_final = detail::wrap(g, ut);
    res.ut_final.zero_outside(g.omega);
    return res;
}

struct BackwardResult {
    ScalarField u0;
    std::vector<EnergyReport> energy_omega;  // levels nt down to 0
    std::vector<std::string> warnings;
};

/// Backward Dirichlet solve on the Omega closure: integrates the wave
/// recurrence from t = T down to t = 0 with the trace injected as boundary
/// data at every level and (final_u, final_ut) as the Cauchy data at T.
/// With the trace and Cauchy data of a forward solve this inverts the
/// forward recurrence step for step.
inline BackwardResult backward_dirichlet_solve(const Medium& m, const BoundaryTrace& trace,
                                               const ScalarField& final_u,
                                               const ScalarField& final_ut,
                                               EnergyLogging log = EnergyLogging::none) {
    require_same_grid(m.grid, final_u.grid, "backward_dirichlet_solve");
    require_same_grid(m.grid, final_ut.grid, "backward_dirichlet_solve");
    require_finite(final_u, "backward_dirichlet_solve");
    require_finite(final_ut, "backward_dirichlet_solve");
    trace.require_layout(m.grid, "backward_dirichlet_solve");
    const TimeGrid tg = trace.time;
    if (tg.nt < 1 || !(tg.dt > 0.0))
        throw std::invalid_argument("backward_dirichlet_solve: empty time grid");

    const Grid& g = m.grid;
    const OperatorTable T(m);
    const IndexRect om = g.omega;
    const double dt = tg.dt, dt2 = dt * dt;
    if (dt > cfl_limit(m) * (1.0 + 1e-12))
        throw std::invalid_argument("backward_dirichlet_solve: dt violates the CFL bound");

    BackwardResult res;
    const auto bn = g.boundary_nodes();

    std::vector<double> v_next(g.size(), 0.0), v_cur(g.size(), 0.0), v_prev(g.size(), 0.0);

    // Level nt: interior from final_u, boundary ring from the trace.
    for (int i = om.ilo; i <= om.ihi; ++i)
        for (int j = om.jlo; j <= om.jhi; ++j) v_cur[g.idx(i, j)] = final_u(i, j);
    auto inject = [&](int n, std::vector<double>& v) {
        for (std::size_t k = 0; k < bn.size(); ++k)
            v[g.idx(bn[k].i, bn[k].j)] = trace.at(n, static_cast<int>(k));
    };
    {
        double scale = std::max(trace.max_abs(), final_u.linf());
        double mism = 0.0;
        for (std::size_t k = 0; k < bn.size(); ++k)
            mism = std::max(mism, std::abs(final_u(bn[k].i, bn[k].j) -
                                           trace.at(tg.nt, static_cast<int>(k))));
        if (mism > 1e-8 * std::max(scale, 1e-300))
            res.warnings.push_back("final data and trace disagree on the boundary at t = T");
    }
    inject(tg.nt, v_cur);

    auto step_interior = [&](const std::vector<double>& hi, const std::vector<double>& mid,
                             std::vector<double>& lo) {
#pragma omp parallel for schedule(static)
        for (int i = om.ilo + 1; i <= om.ihi - 1; ++i)
            for (int j = om.jlo + 1; j <= om.jhi - 1; ++j) {
                const std::size_t k = g.idx(i, j);
                lo[k] = 2.0 * mid[k] - hi[k] - dt2 * T.apply_at(mid, i, j);
            }
    };

    // First backward step by Taylor expansion at T.
    {
#pragma omp parallel for schedule(static)
        for (int i = om.ilo + 1; i <= om.ihi - 1; ++i)
            for (int j = om.jlo + 1; j <= om.jhi - 1; ++j) {
                const std::size_t k = g.idx(i, j);
                v_prev[k] = v_cur[k] - dt * final_ut.v[k] - 0.5 * dt2 * T.apply_at(v_cur, i, j);
            }
        inject(tg.nt - 1, v_prev);
    }

    const bool log_all = log == EnergyLogging::every_step;
    const bool log_ends = log != EnergyLogging::none;
    auto log_energy = [&](int n, const std::vector<double>& v, const std::vector<double>& vt) {
        res.energy_omega.push_back(
            energy_of(T, detail::wrap(g, v), detail::wrap(g, vt), Region::omega, n * dt));
    };
    if (log_ends) log_energy(tg.nt, v_cur, final_ut.v);

    // v_next = v^{n+1}, v_cur = v^n, v_prev = v^{n-1}; march n down to 1.
    std::swap(v_next, v_cur);   // v_next = level nt
    std::swap(v_cur, v_prev);   // v_cur = level nt-1
    std::vector<double> vt(g.size(), 0.0);
    for (int n = tg.nt - 1; n >= 1; --n) {
        step_interior(v_next, v_cur, v_prev);
        inject(n - 1, v_prev);
        if (log_all || (log_ends && n == 0)) {
            for (std::size_t k = 0; k < vt.size(); ++k)
                vt[k] = (v_next[k] - v_prev[k]) / (2.0 * dt);
            log_energy(n, v_cur, vt);
        }
        std::swap(v_next, v_cur);
        std::swap(v_cur, v_prev);
    }

    // Level 0 velocity needs a virtual level -1; one extra interior step.
    if (log_ends) {
        step_interior(v_next, v_cur, v_prev);
        for (std::size_t k = 0; k < vt.size(); ++k)
            vt[k] = (v_next[k] - v_prev[k]) / (2.0 * dt);
        log_energy(0, v_cur, vt);
    }

    res.u0 = detail::wrap(g, v_cur);
    res.u0.zero_outside(om);
    return res;
}

}  // namespace tatrec
