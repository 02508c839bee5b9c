#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "tatrec/field.hpp"
#include "tatrec/grid.hpp"

namespace tatrec {

/// Acoustic medium: sound speed c, diagonal Riemannian metric (g11, g22) and
/// potential q, all nodal fields on a common grid.  Physical modelling keeps
/// c = 1, g = I, q = 0 outside Omega; the constructor does not force that so
/// uniform test media remain expressible.
struct Medium {
    Grid grid;
    ScalarField c, g11, g22, q;

    Medium() = default;
    Medium(const Grid& g, ScalarField c_, ScalarField g11_, ScalarField g22_, ScalarField q_)
        : grid(g), c(std::move(c_)), g11(std::move(g11_)), g22(std::move(g22_)), q(std::move(q_)) {
        validate();
    }

    static Medium uniform(const Grid& g, double c0 = 1.0, double g1 = 1.0, double g2 = 1.0,
                          double q0 = 0.0) {
        return Medium(g, ScalarField(g, c0), ScalarField(g, g1), ScalarField(g, g2),
                      ScalarField(g, q0));
    }

    void validate() const {
        require_same_grid(grid, c.grid, "Medium(c)");
        require_same_grid(grid, g11.grid, "Medium(g11)");
        require_same_grid(grid, g22.grid, "Medium(g22)");
        require_same_grid(grid, q.grid, "Medium(q)");
        for (std::size_t k = 0; k < grid.size(); ++k) {
            if (!(c.v[k] > 0.0) || !std::isfinite(c.v[k]))
                throw std::invalid_argument("Medium: c must be positive and finite");
            if (!(g11.v[k] > 0.0) || !(g22.v[k] > 0.0) || !std::isfinite(g11.v[k]) ||
                !std::isfinite(g22.v[k]))
                throw std::invalid_argument("Medium: metric diagonal must be positive and finite");
            if (!std::isfinite(q.v[k]) || q.v[k] < 0.0)
                throw std::invalid_argument("Medium: q must be finite and non-negative");
        }
    }

    /// True if c = 1, g = I, q = 0 holds exactly at every node outside Omega.
    bool exterior_normalized() const {
        for (int i = 0; i < grid.nx; ++i)
            for (int j = 0; j < grid.ny; ++j) {
                if (grid.omega.contains(i, j)) continue;
                if (c(i, j) != 1.0 || g11(i, j) != 1.0 || g22(i, j) != 1.0 || q(i, j) != 0.0)
                    return false;
            }
        return true;
    }

    double c_max() const { return *std::max_element(c.v.begin(), c.v.end()); }
    double c_min() const { return *std::min_element(c.v.begin(), c.v.end()); }

    /// Max over nodes of max(1/g11, 1/g22); enters the CFL bound.
    double inv_metric_max() const {
        double m = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            m = std::max(m, std::max(1.0 / g11.v[k], 1.0 / g22.v[k]));
        return m;
    }

    /// Wavefront speed bound sup c * sqrt(max(1/g11, 1/g22)).
    double speed_max() const {
        double m = 0.0;
        for (std::size_t k = 0; k < grid.size(); ++k)
            m = std::max(m, c.v[k] * std::sqrt(std::max(1.0 / g11.v[k], 1.0 / g22.v[k])));
        return m;
    }

    double speed_min() const {
        double m = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < grid.size(); ++k)
            m = std::min(m, c.v[k] * std::sqrt(std::min(1.0 / g11.v[k], 1.0 / g22.v[k])));
        return m;
    }
};

}  // namespace tatrec
