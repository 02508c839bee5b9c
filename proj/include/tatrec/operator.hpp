#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

#include "tatrec/medium.hpp"

namespace tatrec {

/// Boundary handling for apply_p.  dirichlet_zero additionally requires the
/// input to vanish on the region boundary ring, which makes the discrete
/// operator self-adjoint in the weighted L2 product.
enum class BoundaryRule { dirichlet_zero, free_interior };

/// Precomputed stencil and quadrature tables for
///   P f = -(c^2/w) * [ d/dx (a df/dx) + d/dy (b df/dy) ] + q f,
/// with w = sqrt(g11*g22), a = sqrt(g22/g11), b = sqrt(g11/g22).
/// Face coefficients use arithmetic means of the nodal a, b; this flux form
/// keeps the discrete operator symmetric with respect to the weight
/// w/c^2 dx dy exactly (up to roundoff), not just to truncation order.
struct OperatorTable {
    Grid grid;
    std::vector<double> fe, fw, fn, fs;  // face coefficients / dx^2 resp. / dy^2
    std::vector<double> s;               // c^2 / w
    std::vector<double> qv;              // potential
    std::vector<double> wq;              // quadrature weight (w / c^2) dx dy

    explicit OperatorTable(const Medium& m) : grid(m.grid) {
        const int nx = grid.nx, ny = grid.ny;
        const std::size_t n = grid.size();
        fe.assign(n, 0.0);
        fw.assign(n, 0.0);
        fn.assign(n, 0.0);
        fs.assign(n, 0.0);
        s.resize(n);
        qv = m.q.v;
        wq.resize(n);

        std::vector<double> a(n), b(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double w = std::sqrt(m.g11.v[k] * m.g22.v[k]);
            a[k] = std::sqrt(m.g22.v[k] / m.g11.v[k]);
            b[k] = std::sqrt(m.g11.v[k] / m.g22.v[k]);
            const double c2 = m.c.v[k] * m.c.v[k];
            s[k] = c2 / w;
            wq[k] = w / c2 * (grid.dx * grid.dy);
        }
        const double rdx2 = 1.0 / (grid.dx * grid.dx);
        const double rdy2 = 1.0 / (grid.dy * grid.dy);
        for (int i = 0; i < nx; ++i)
            for (int j = 0; j < ny; ++j) {
                const std::size_t k = grid.idx(i, j);
                if (i + 1 < nx) fe[k] = 0.5 * (a[k] + a[grid.idx(i + 1, j)]) * rdx2;
                if (i > 0) fw[k] = 0.5 * (a[k] + a[grid.idx(i - 1, j)]) * rdx2;
                if (j + 1 < ny) fn[k] = 0.5 * (b[k] + b[grid.idx(i, j + 1)]) * rdy2;
                if (j > 0) fs[k] = 0.5 * (b[k] + b[grid.idx(i, j - 1)]) * rdy2;
            }
    }

    /// P u at an interior node; neighbours must exist.
    double apply_at(const std::vector<double>& u, int i, int j) const {
        const std::size_t k = grid.idx(i, j);
        const double uc = u[k];
        const double div = fe[k] * (u[k + grid.ny] - uc) + fw[k] * (u[k - grid.ny] - uc) +
                           fn[k] * (u[k + 1] - uc) + fs[k] * (u[k - 1] - uc);
        return -s[k] * div + qv[k] * uc;
    }

    /// Diagonal entry of P restricted to interior nodes (Jacobi weight).
    double diag_at(int i, int j) const {
        const std::size_t k = grid.idx(i, j);
        return s[k] * (fe[k] + fw[k] + fn[k] + fs[k]) + qv[k];
    }
};

/// Applies P on the strict interior of the region; output is zero on the
/// region boundary ring and outside the region.  With dirichlet_zero the
/// input must vanish on the region boundary (relative tolerance 1e-12).
inline ScalarField apply_p(const OperatorTable& T, const ScalarField& f, BoundaryRule rule,
                           Region region = Region::full) {
    require_same_grid(T.grid, f.grid, "apply_p");
    require_finite(f, "apply_p");
    const IndexRect r = T.grid.rect(region);
    if (rule == BoundaryRule::dirichlet_zero) {
        const double tol = 1e-12 * f.linf();
        if (f.boundary_linf(r) > tol)
            throw std::invalid_argument("apply_p: field does not vanish on the region boundary");
    }
    ScalarField out(T.grid, 0.0);
#pragma omp parallel for schedule(static)
    for (int i = r.ilo + 1; i <= r.ihi - 1; ++i)
        for (int j = r.jlo + 1; j <= r.jhi - 1; ++j)
            out.v[T.grid.idx(i, j)] = T.apply_at(f.v, i, j);
    return out;
}

inline ScalarField apply_p(const Medium& m, const ScalarField& f, BoundaryRule rule,
                           Region region = Region::full) {
    return apply_p(OperatorTable(m), f, rule, region);
}

/// Weighted L2 inner product (f, h) = sum f h (w/c^2) dx dy over the region.
inline double inner_l2(const OperatorTable& T, const ScalarField& f, const ScalarField& h,
                       Region region = Region::full) {
    require_same_grid(T.grid, f.grid, "inner_l2");
    require_same_grid(T.grid, h.grid, "inner_l2");
    const IndexRect r = T.grid.rect(region);
    double acc = 0.0;
    for (int i = r.ilo; i <= r.ihi; ++i)
        for (int j = r.jlo; j <= r.jhi; ++j) {
            const std::size_t k = T.grid.idx(i, j);
            acc += f.v[k] * h.v[k] * T.wq[k];
        }
    return acc;
}

inline double inner_l2(const Medium& m, const ScalarField& f, const ScalarField& h,
                       Region region = Region::full) {
    return inner_l2(OperatorTable(m), f, h, region);
}

/// Symmetric Dirichlet form: face-difference sum plus the potential term.
/// Equals (P f, h) when f or h vanishes on the region boundary; defined for
/// arbitrary fields (used for energies of waves with nonzero traces).
inline double dirichlet_form(const OperatorTable& T, const ScalarField& f, const ScalarField& h,
                             Region region = Region::full) {
    require_same_grid(T.grid, f.grid, "dirichlet_form");
    require_same_grid(T.grid, h.grid, "dirichlet_form");
    const IndexRect r = T.grid.rect(region);
    const double area = T.grid.dx * T.grid.dy;
    double acc = 0.0;
    for (int i = r.ilo; i <= r.ihi; ++i)
        for (int j = r.jlo; j <= r.jhi; ++j) {
            const std::size_t k = T.grid.idx(i, j);
            if (i < r.ihi) {
                const double df = f.v[k + T.grid.ny] - f.v[k];
                const double dh = h.v[k + T.grid.ny] - h.v[k];
                acc += T.fe[k] * df * dh * area;
            }
            if (j < r.jhi) {
                const double df = f.v[k + 1] - f.v[k];
                const double dh = h.v[k + 1] - h.v[k];
                acc += T.fn[k] * df * dh * area;
            }
            acc += T.qv[k] * T.wq[k] * f.v[k] * h.v[k];
        }
    return acc;
}

inline double dirichlet_form(const Medium& m, const ScalarField& f, const ScalarField& h,
                             Region region = Region::full) {
    return dirichlet_form(OperatorTable(m), f, h, region);
}

/// H_D inner product (f, h)_{H_D} = (P f, h): the Dirichlet form restricted
/// to fields vanishing on the region boundary (relative tolerance 1e-12).
inline double inner_hd(const OperatorTable& T, const ScalarField& f, const ScalarField& h,
                       Region region = Region::omega) {
    const IndexRect r = T.grid.rect(region);
    const double tf = 1e-12 * f.linf(), th = 1e-12 * h.linf();
    if (f.boundary_linf(r) > tf || h.boundary_linf(r) > th)
        throw std::invalid_argument("inner_hd: fields must vanish on the region boundary");
    return dirichlet_form(T, f, h, region);
}

inline double inner_hd(const Medium& m, const ScalarField& f, const ScalarField& h,
                       Region region = Region::omega) {
    return inner_hd(OperatorTable(m), f, h, region);
}

}  // namespace tatrec
