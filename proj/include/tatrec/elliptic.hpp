#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "tatrec/errors.hpp"
#include "tatrec/operator.hpp"

namespace tatrec {

struct CgInfo {
    int iterations = 0;
    double rel_residual = 0.0;
    std::vector<double> history;  // relative residual after each iteration
};

struct CgFailure : NumericError {
    CgInfo info;
    CgFailure(const std::string& what, CgInfo inf) : NumericError(what), info(std::move(inf)) {}
};

/// Solves P phi = 0 on the interior of Omega with phi = boundary_values on
/// the Omega perimeter (values in counterclockwise boundary-node order) and
/// phi = 0 outside.  Matrix-free Jacobi-preconditioned CG on the lifted
/// system, run in the weighted L2 inner product that makes P self-adjoint;
/// converged when the preconditioned residual drops below tol relative to
/// the lifted right-hand side.
inline ScalarField harmonic_extension(const Medium& m, const std::vector<double>& boundary_values,
                                      double tol = 1e-10, int max_iter = 5000,
                                      CgInfo* info_out = nullptr) {
    const Grid& g = m.grid;
    const auto bn = g.boundary_nodes();
    if (boundary_values.size() != bn.size())
        throw std::invalid_argument("harmonic_extension: boundary value count mismatch");
    for (double a : boundary_values)
        if (!std::isfinite(a))
            throw std::invalid_argument("harmonic_extension: non-finite boundary values");
    if (!(tol > 0.0) || max_iter < 1)
        throw std::invalid_argument("harmonic_extension: bad tolerance or iteration budget");

    const OperatorTable T(m);
    const IndexRect om = g.omega;
    const int ilo = om.ilo + 1, ihi = om.ihi - 1, jlo = om.jlo + 1, jhi = om.jhi - 1;

    ScalarField phi(g, 0.0);
    for (std::size_t k = 0; k < bn.size(); ++k) phi(bn[k].i, bn[k].j) = boundary_values[k];

    auto wdot = [&](const std::vector<double>& a, const std::vector<double>& b) {
        double acc = 0.0;
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j) {
                const std::size_t k = g.idx(i, j);
                acc += a[k] * b[k] * T.wq[k];
            }
        return acc;
    };

    // r = -P e on the interior (e = lifted boundary data, zero inside).
    std::vector<double> r(g.size(), 0.0);
    for (int i = ilo; i <= ihi; ++i)
        for (int j = jlo; j <= jhi; ++j) r[g.idx(i, j)] = -T.apply_at(phi.v, i, j);

    CgInfo info;
    const double bnorm = std::sqrt(wdot(r, r));
    if (bnorm == 0.0) {
        if (info_out) *info_out = info;
        return phi;
    }

    std::vector<double> x(g.size(), 0.0), z(g.size(), 0.0), p(g.size(), 0.0), ap(g.size(), 0.0);
    auto precondition = [&](const std::vector<double>& rr, std::vector<double>& zz) {
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j) {
                const std::size_t k = g.idx(i, j);
                zz[k] = rr[k] / T.diag_at(i, j);
            }
    };

    precondition(r, z);
    p = z;
    double rz = wdot(r, z);
    double rel = 1.0;

    for (int it = 1; it <= max_iter; ++it) {
#pragma omp parallel for schedule(static)
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j) ap[g.idx(i, j)] = T.apply_at(p, i, j);

        const double pap = wdot(p, ap);
        if (!(pap > 0.0)) {
            info.iterations = it;
            info.rel_residual = rel;
            throw CgFailure("harmonic_extension: CG lost positive definiteness", info);
        }
        const double alpha = rz / pap;
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j) {
                const std::size_t k = g.idx(i, j);
                x[k] += alpha * p[k];
                r[k] -= alpha * ap[k];
            }
        rel = std::sqrt(wdot(r, r)) / bnorm;
        info.history.push_back(rel);
        info.iterations = it;
        info.rel_residual = rel;
        if (rel <= tol) break;

        precondition(r, z);
        const double rz_new = wdot(r, z);
        const double beta = rz_new / rz;
        rz = rz_new;
        for (int i = ilo; i <= ihi; ++i)
            for (int j = jlo; j <= jhi; ++j) {
                const std::size_t k = g.idx(i, j);
                p[k] = z[k] + beta * p[k];
            }
    }

    if (rel > tol)
        throw CgFailure("harmonic_extension: CG failed to reach tolerance within budget", info);

    for (int i = ilo; i <= ihi; ++i)
        for (int j = jlo; j <= jhi; ++j) {
            const std::size_t k = g.idx(i, j);
            phi.v[k] = x[k];
        }
    if (info_out) *info_out = info;
    return phi;
}

}  // namespace tatrec
