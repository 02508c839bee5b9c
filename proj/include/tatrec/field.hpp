#pragma once

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "tatrec/grid.hpp"

namespace tatrec {

/// Nodal scalar field on a Grid, stored x-major (j fastest).
struct ScalarField {
    Grid grid;
    std::vector<double> v;

    ScalarField() = default;
    explicit ScalarField(const Grid& g, double fill = 0.0) : grid(g), v(g.size(), fill) {}

    double& operator()(int i, int j) { return v[grid.idx(i, j)]; }
    double operator()(int i, int j) const { return v[grid.idx(i, j)]; }

    void fill(double a) { std::fill(v.begin(), v.end(), a); }

    double linf() const {
        double m = 0.0;
        for (double a : v) m = std::max(m, std::abs(a));
        return m;
    }

    bool all_finite() const {
        for (double a : v)
            if (!std::isfinite(a)) return false;
        return true;
    }

    /// Max |value| on the boundary ring of `rect`.
    double boundary_linf(const IndexRect& rect) const {
        double m = 0.0;
        for (int i = rect.ilo; i <= rect.ihi; ++i) {
            m = std::max(m, std::abs((*this)(i, rect.jlo)));
            m = std::max(m, std::abs((*this)(i, rect.jhi)));
        }
        for (int j = rect.jlo; j <= rect.jhi; ++j) {
            m = std::max(m, std::abs((*this)(rect.ilo, j)));
            m = std::max(m, std::abs((*this)(rect.ihi, j)));
        }
        return m;
    }

    /// Max |value| over nodes outside `rect`.
    double exterior_linf(const IndexRect& rect) const {
        double m = 0.0;
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.ny; ++j)
                if (!rect.contains(i, j)) m = std::max(m, std::abs((*this)(i, j)));
        return m;
    }

    void zero_outside(const IndexRect& rect) {
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.ny; ++j)
                if (!rect.contains(i, j)) (*this)(i, j) = 0.0;
    }
};

inline void require_same_grid(const Grid& a, const Grid& b, const std::string& what) {
    if (!a.same_shape(b)) throw std::invalid_argument(what + ": grid mismatch");
}

inline void require_finite(const ScalarField& f, const std::string& what) {
    if (!f.all_finite()) throw std::invalid_argument(what + ": field contains non-finite values");
}

}  // namespace tatrec
