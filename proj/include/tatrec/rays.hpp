#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <vector>

#include "tatrec/measurement.hpp"
#include "tatrec/medium.hpp"

namespace tatrec {

/// Catmull-Rom tensor-product interpolant of a nodal field.  C1 across cell
/// boundaries; the gradient returned is the exact gradient of the
/// interpolated surface, so Hamiltonian trajectories see a consistent
/// field.  Border cells clamp the stencil indices (replicated edge rows).
struct BicubicField {
    int nx = 0, ny = 0;
    double dx = 1.0, dy = 1.0, ox = 0.0, oy = 0.0;
    std::vector<double> v;

    BicubicField() = default;
    explicit BicubicField(const ScalarField& f)
        : nx(f.grid.nx), ny(f.grid.ny), dx(f.grid.dx), dy(f.grid.dy), ox(f.grid.ox),
          oy(f.grid.oy), v(f.v) {}

    struct Sample {
        double val, gx, gy;
    };

    static void cr_weights(double u, double w[4], double d[4]) {
        const double u2 = u * u, u3 = u2 * u;
        w[0] = 0.5 * (-u + 2.0 * u2 - u3);
        w[1] = 0.5 * (2.0 - 5.0 * u2 + 3.0 * u3);
        w[2] = 0.5 * (u + 4.0 * u2 - 3.0 * u3);
        w[3] = 0.5 * (-u2 + u3);
        d[0] = 0.5 * (-1.0 + 4.0 * u - 3.0 * u2);
        d[1] = 0.5 * (-10.0 * u + 9.0 * u2);
        d[2] = 0.5 * (1.0 + 8.0 * u - 9.0 * u2);
        d[3] = 0.5 * (-2.0 * u + 3.0 * u2);
    }

    Sample eval(double px, double py) const {
        const double fx = (px - ox) / dx, fy = (py - oy) / dy;
        int i1 = static_cast<int>(std::floor(fx));
        int j1 = static_cast<int>(std::floor(fy));
        i1 = std::min(std::max(i1, 0), nx - 2);
        j1 = std::min(std::max(j1, 0), ny - 2);
        const double u = fx - i1, w = fy - j1;

        double wu[4], du[4], wv[4], dv[4];
        cr_weights(u, wu, du);
        cr_weights(w, wv, dv);

        double col_val[4], col_dx[4];
        for (int r = 0; r < 4; ++r) {
            const int j = std::min(std::max(j1 + r - 1, 0), ny - 1);
            double s = 0.0, sd = 0.0;
            for (int c = 0; c < 4; ++c) {
                const int i = std::min(std::max(i1 + c - 1, 0), nx - 1);
                const double p = v[static_cast<std::size_t>(i) * ny + j];
                s += wu[c] * p;
                sd += du[c] * p;
            }
            col_val[r] = s;
            col_dx[r] = sd;
        }
        Sample out{0.0, 0.0, 0.0};
        for (int r = 0; r < 4; ++r) {
            out.val += wv[r] * col_val[r];
            out.gx += wv[r] * col_dx[r];
            out.gy += dv[r] * col_val[r];
        }
        out.gx /= dx;
        out.gy /= dy;
        return out;
    }
};

/// Point of phase space: position and codirection.
struct PhasePoint {
    double x = 0.0, y = 0.0;
    double xi_x = 0.0, xi_y = 0.0;
};

struct RayPathSample {
    double t, x, y, xi_x, xi_y;
};

struct RayResult {
    bool trapped = false;
    double t_exit = 0.0;
    PhasePoint exit;
    double h_drift = 0.0;  // max |H - H(0)| along accepted states
    std::vector<RayPathSample> path;
};

struct TraceOptions {
    double step_scale = 0.25;   // RK4 step = step_scale * min(dx,dy) / speed bound
    double exit_tol_frac = 1e-8;  // exit located to this fraction of min(dx,dy)
    bool record_path = false;
};

/// Unit-speed geodesic flow of the travel-time metric, realized as the
/// Hamiltonian system of H = (a1 xi_x^2 + a2 xi_y^2) / 2 with a1 = c^2/g11,
/// a2 = c^2/g22 read through bicubic interpolants.  Travel time equals
/// metric arc length on the normalized energy shell 2H = 1.
class GeodesicTracer {
  public:
    explicit GeodesicTracer(const Medium& m)
        : grid_(m.grid), speed_max_(m.speed_max()) {
        ScalarField a1(m.grid), a2(m.grid);
        for (std::size_t k = 0; k < m.grid.size(); ++k) {
            const double c2 = m.c.v[k] * m.c.v[k];
            a1.v[k] = c2 / m.g11.v[k];
            a2.v[k] = c2 / m.g22.v[k];
        }
        a1_ = BicubicField(a1);
        a2_ = BicubicField(a2);
    }

    const Grid& grid() const { return grid_; }
    double speed_max() const { return speed_max_; }

    double hamiltonian(const PhasePoint& p) const {
        const auto s1 = a1_.eval(p.x, p.y), s2 = a2_.eval(p.x, p.y);
        return 0.5 * (s1.val * p.xi_x * p.xi_x + s2.val * p.xi_y * p.xi_y);
    }

    /// Rescales the codirection onto the unit-speed shell 2H = 1.
    PhasePoint normalize(PhasePoint p) const {
        const double h2 = 2.0 * hamiltonian(p);
        if (!(h2 > 0.0))
            throw std::invalid_argument("GeodesicTracer: zero codirection cannot be normalized");
        const double s = 1.0 / std::sqrt(h2);
        p.xi_x *= s;
        p.xi_y *= s;
        return p;
    }

    /// Codirection of unit speed pointing along polar angle theta.
    PhasePoint at_angle(double x, double y, double theta) const {
        return normalize({x, y, std::cos(theta), std::sin(theta)});
    }

    /// Integrates from a point of the Omega closure until the ray leaves
    /// Omega or max_time is spent.  sign = -1 flips the codirection first.
    RayResult trace(PhasePoint start, double max_time, int sign = +1,
                    const TraceOptions& opts = {}) const {
        if (sign < 0) {
            start.xi_x = -start.xi_x;
            start.xi_y = -start.xi_y;
        }
        State s{start.x, start.y, start.xi_x, start.xi_y};
        if (!inside(s)) throw std::invalid_argument("GeodesicTracer: start outside Omega closure");

        RayResult res;
        const double h = opts.step_scale * std::min(grid_.dx, grid_.dy) / speed_max_;
        const double h0 = hamiltonian(start);
        double t = 0.0;
        if (opts.record_path) res.path.push_back({t, s[0], s[1], s[2], s[3]});

        while (t < max_time) {
            State next = rk4(s, h);
            if (!inside(next)) {
                const double s_exit = locate_exit(s, h, opts);
                State e = rk4(s, s_exit);
                res.t_exit = t + s_exit;
                res.exit = clamp_to_boundary({e[0], e[1], e[2], e[3]});
                res.h_drift = std::max(res.h_drift, std::abs(hamiltonian(res.exit) - h0));
                if (opts.record_path)
                    res.path.push_back({res.t_exit, res.exit.x, res.exit.y, res.exit.xi_x,
                                        res.exit.xi_y});
                return res;
            }
            s = next;
            t += h;
            res.h_drift =
                std::max(res.h_drift, std::abs(hamiltonian({s[0], s[1], s[2], s[3]}) - h0));
            if (opts.record_path) res.path.push_back({t, s[0], s[1], s[2], s[3]});
        }
        res.trapped = true;
        res.t_exit = t;
        res.exit = {s[0], s[1], s[2], s[3]};
        return res;
    }

  private:
    using State = std::array<double, 4>;

    Grid grid_;
    BicubicField a1_, a2_;
    double speed_max_ = 1.0;

    bool inside(const State& s) const { return grid_.in_omega_closure(s[0], s[1]); }

    State rhs(const State& s) const {
        const auto s1 = a1_.eval(s[0], s[1]), s2 = a2_.eval(s[0], s[1]);
        const double xx = s[2] * s[2], yy = s[3] * s[3];
        return {s1.val * s[2], s2.val * s[3], -0.5 * (s1.gx * xx + s2.gx * yy),
                -0.5 * (s1.gy * xx + s2.gy * yy)};
    }

    State rk4(const State& s, double h) const {
        const State k1 = rhs(s);
        const State k2 = rhs(advance(s, k1, 0.5 * h));
        const State k3 = rhs(advance(s, k2, 0.5 * h));
        const State k4 = rhs(advance(s, k3, h));
        State out;
        for (int i = 0; i < 4; ++i)
            out[i] = s[i] + h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
        return out;
    }

    static State advance(const State& s, const State& k, double h) {
        return {s[0] + h * k[0], s[1] + h * k[1], s[2] + h * k[2], s[3] + h * k[3]};
    }

    /// Bisection over the step size of a single RK4 step: largest step that
    /// stays inside and smallest that leaves differ by less than the exit
    /// tolerance; the outside endpoint is returned.
    double locate_exit(const State& s, double h, const TraceOptions& opts) const {
        double lo = 0.0, hi = h;
        const double tol = opts.exit_tol_frac * std::min(grid_.dx, grid_.dy) / speed_max_;
        for (int it = 0; it < 80 && hi - lo > tol; ++it) {
            const double mid = 0.5 * (lo + hi);
            if (inside(rk4(s, mid))) lo = mid;
            else hi = mid;
        }
        return hi;
    }

    PhasePoint clamp_to_boundary(PhasePoint p) const {
        p.x = std::min(std::max(p.x, grid_.omega_x_lo()), grid_.omega_x_hi());
        p.y = std::min(std::max(p.y, grid_.omega_y_lo()), grid_.omega_y_hi());
        return p;
    }
};

/// Default exploration budget: many crossings of the domain at the slowest
/// speed; rays that exceed it are reported trapped.
inline double default_ray_budget(const Medium& m) {
    return 50.0 * m.grid.omega_diameter() / m.speed_min();
}

struct ExitPair {
    RayResult plus, minus;
};

/// Exits of the two rays issued from (x, xi) and (x, -xi).
inline ExitPair exit_pair(const GeodesicTracer& tr, const PhasePoint& p, double max_time,
                          const TraceOptions& opts = {}) {
    ExitPair e;
    e.plus = tr.trace(p, max_time, +1, opts);
    e.minus = tr.trace(p, max_time, -1, opts);
    return e;
}

struct DomainTimeResult {
    double T = 0.0;           // longest observed transit; valid if !any_trapped
    bool any_trapped = false;
    int n_rays = 0;
    int n_trapped = 0;
    PhasePoint argmax;        // launch of the longest transit
    std::vector<PhasePoint> trapped_samples;  // capped
};

/// Estimates the longest geodesic transit time through Omega by fanning
/// rays inward from a perimeter sampling.  Corners are avoided by the
/// half-offset sampling; near-tangent launches are legitimate chords.
inline DomainTimeResult domain_T(const Medium& m, int n_boundary = 256, int n_directions = 64,
                                 double max_time = 0.0, const TraceOptions& opts = {}) {
    if (n_boundary < 8 || n_directions < 4)
        throw std::invalid_argument("domain_T: sampling too coarse");
    GeodesicTracer tr(m);
    const Grid& g = m.grid;
    if (max_time <= 0.0) max_time = default_ray_budget(m);

    DomainTimeResult res;
    const double P = g.perimeter();
    const double W = g.omega_width(), H = g.omega_height();

    // Launch fans are independent; results are merged serially in sample
    // order so the argmax (and any tie-break) is thread-count invariant.
    struct FanResult {
        double T = 0.0;
        PhasePoint argmax;
        int n_trapped = 0;
        std::vector<PhasePoint> trapped;
    };
    std::vector<FanResult> fans(static_cast<std::size_t>(n_boundary));

#pragma omp parallel for schedule(dynamic)
    for (int b = 0; b < n_boundary; ++b) {
        const double p = (b + 0.5) * P / n_boundary;
        double x, y, nx_in, ny_in;  // position and inward normal
        if (p < W) {
            x = g.omega_x_lo() + p; y = g.omega_y_lo(); nx_in = 0.0; ny_in = 1.0;
        } else if (p < W + H) {
            x = g.omega_x_hi(); y = g.omega_y_lo() + (p - W); nx_in = -1.0; ny_in = 0.0;
        } else if (p < 2.0 * W + H) {
            x = g.omega_x_hi() - (p - W - H); y = g.omega_y_hi(); nx_in = 0.0; ny_in = -1.0;
        } else {
            x = g.omega_x_lo(); y = g.omega_y_hi() - (p - 2.0 * W - H); nx_in = 1.0; ny_in = 0.0;
        }
        const double base = std::atan2(ny_in, nx_in);
        FanResult& fan = fans[static_cast<std::size_t>(b)];
        for (int d = 0; d < n_directions; ++d) {
            const double theta = base - M_PI / 2.0 + (d + 0.5) * M_PI / n_directions;
            RayResult r = tr.trace(tr.at_angle(x, y, theta), max_time, +1, opts);
            if (r.trapped) {
                ++fan.n_trapped;
                if (fan.trapped.size() < 64) fan.trapped.push_back(tr.at_angle(x, y, theta));
                continue;
            }
            if (r.t_exit > fan.T) {
                fan.T = r.t_exit;
                fan.argmax = tr.at_angle(x, y, theta);
            }
        }
    }

    for (const FanResult& fan : fans) {
        res.n_rays += n_directions;
        res.n_trapped += fan.n_trapped;
        if (fan.n_trapped > 0) res.any_trapped = true;
        for (const PhasePoint& p : fan.trapped)
            if (res.trapped_samples.size() < 64) res.trapped_samples.push_back(p);
        if (fan.T > res.T) {
            res.T = fan.T;
            res.argmax = fan.argmax;
        }
    }
    return res;
}

struct VisibilitySymbol {
    double value = 0.0;  // (chi(exit+) + chi(exit-)) / 2
    double chi_plus = 0.0, chi_minus = 0.0;
    double tau_plus = 0.0, tau_minus = 0.0;
    bool trapped_plus = false, trapped_minus = false;
};

/// Principal symbol of the masked normal operator at one phase point: the
/// average of the cutoff evaluated where the two issued rays leave Omega.
/// Trapped rays contribute zero.
inline VisibilitySymbol visibility_symbol(const GeodesicTracer& tr, const MeasurementSet& ms,
                                          const PhasePoint& p, double max_time,
                                          const TraceOptions& opts = {}) {
    VisibilitySymbol out;
    const ExitPair e = exit_pair(tr, p, max_time, opts);
    out.trapped_plus = e.plus.trapped;
    out.trapped_minus = e.minus.trapped;
    out.tau_plus = e.plus.t_exit;
    out.tau_minus = e.minus.t_exit;
    if (!e.plus.trapped)
        out.chi_plus = ms.chi(e.plus.t_exit, tr.grid().perimeter_coord(e.plus.exit.x, e.plus.exit.y));
    if (!e.minus.trapped)
        out.chi_minus =
            ms.chi(e.minus.t_exit, tr.grid().perimeter_coord(e.minus.exit.x, e.minus.exit.y));
    out.value = 0.5 * (out.chi_plus + out.chi_minus);
    return out;
}

inline VisibilitySymbol visibility_symbol(const Medium& m, const MeasurementSet& ms,
                                          const PhasePoint& p, double max_time = 0.0,
                                          const TraceOptions& opts = {}) {
    GeodesicTracer tr(m);
    if (max_time <= 0.0) max_time = default_ray_budget(m);
    return visibility_symbol(tr, ms, p, max_time, opts);
}

struct FailingDirection {
    int i = 0, j = 0;
    double theta = 0.0;
    double chi_plus = 0.0, chi_minus = 0.0;
};

struct StabilityMap {
    IndexRect region;
    int stride = 1;
    bool verdict = false;
    int checked_nodes = 0;
    int failing_nodes = 0;
    ScalarField pass;  // 1 where every sampled codirection has a visible exit
    std::vector<FailingDirection> failures;  // capped sample
};

/// Checks the microlocal stability condition on the nodes of K: for every
/// sampled codirection at least one of the two issued rays must exit
/// through the observed set with cutoff value >= 1 - delta.  Directions
/// sample [0, pi) with a half-bin offset; the paired ray covers the rest.
inline StabilityMap stability_condition_map(const Medium& m, const MeasurementSet& ms,
                                            const IndexRect& K, int n_directions = 16,
                                            double delta = 1e-3, int stride = 1,
                                            double max_time = 0.0,
                                            const TraceOptions& opts = {}) {
    if (n_directions < 2) throw std::invalid_argument("stability_condition_map: need >= 2 directions");
    if (stride < 1) throw std::invalid_argument("stability_condition_map: stride must be >= 1");
    if (!m.grid.omega.contains(K.ilo, K.jlo) || !m.grid.omega.contains(K.ihi, K.jhi))
        throw std::invalid_argument("stability_condition_map: K must lie inside Omega");
    GeodesicTracer tr(m);
    if (max_time <= 0.0) max_time = default_ray_budget(m);

    StabilityMap out;
    out.region = K;
    out.stride = stride;
    out.pass = ScalarField(m.grid, 0.0);
    out.verdict = true;

    std::vector<int> is;
    for (int i = K.ilo; i <= K.ihi; i += stride) is.push_back(i);
    std::vector<std::vector<FailingDirection>> row_failures(is.size());
    std::vector<int> row_checked(is.size(), 0), row_failed(is.size(), 0);

#pragma omp parallel for schedule(dynamic)
    for (std::size_t r = 0; r < is.size(); ++r) {
        const int i = is[r];
        for (int j = K.jlo; j <= K.jhi; j += stride) {
            ++row_checked[r];
            bool node_ok = true;
            for (int d = 0; d < n_directions; ++d) {
                const double theta = (d + 0.5) * M_PI / n_directions;
                const PhasePoint p = tr.at_angle(m.grid.x(i), m.grid.y(j), theta);
                const VisibilitySymbol vs = visibility_symbol(tr, ms, p, max_time, opts);
                if (std::max(vs.chi_plus, vs.chi_minus) < 1.0 - delta) {
                    node_ok = false;
                    if (row_failures[r].size() < 256)
                        row_failures[r].push_back({i, j, theta, vs.chi_plus, vs.chi_minus});
                }
            }
            const double val = node_ok ? 1.0 : 0.0;
            for (int ii = i; ii < std::min(i + stride, K.ihi + 1); ++ii)
                for (int jj = j; jj < std::min(j + stride, K.jhi + 1); ++jj) out.pass(ii, jj) = val;
            if (!node_ok) ++row_failed[r];
        }
    }

    for (std::size_t r = 0; r < is.size(); ++r) {
        out.checked_nodes += row_checked[r];
        out.failing_nodes += row_failed[r];
        for (const auto& f : row_failures[r])
            if (out.failures.size() < 1024) out.failures.push_back(f);
    }
    out.verdict = out.failing_nodes == 0;
    return out;
}

/// Direction-averaged visibility value on the nodes of K; stride > 1 fills
/// each stride block with its sample's value.
inline ScalarField visibility_average_map(const Medium& m, const MeasurementSet& ms,
                                          const IndexRect& K, int n_directions = 16,
                                          int stride = 1, double max_time = 0.0,
                                          const TraceOptions& opts = {}) {
    if (n_directions < 2) throw std::invalid_argument("visibility_average_map: need >= 2 directions");
    GeodesicTracer tr(m);
    if (max_time <= 0.0) max_time = default_ray_budget(m);
    ScalarField out(m.grid, 0.0);

    std::vector<int> is;
    for (int i = K.ilo; i <= K.ihi; i += stride) is.push_back(i);
#pragma omp parallel for schedule(dynamic)
    for (std::size_t r = 0; r < is.size(); ++r) {
        const int i = is[r];
        for (int j = K.jlo; j <= K.jhi; j += stride) {
            double acc = 0.0;
            for (int d = 0; d < n_directions; ++d) {
                const double theta = (d + 0.5) * M_PI / n_directions;
                const PhasePoint p = tr.at_angle(m.grid.x(i), m.grid.y(j), theta);
                acc += visibility_symbol(tr, ms, p, max_time, opts).value;
            }
            const double mean = acc / n_directions;
            for (int ii = i; ii < std::min(i + stride, K.ihi + 1); ++ii)
                for (int jj = j; jj < std::min(j + stride, K.jhi + 1); ++jj) out(ii, jj) = mean;
        }
    }
    return out;
}

}  // namespace tatrec
