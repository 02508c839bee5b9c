#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace tatrec {

/// Inclusive node-index rectangle.
struct IndexRect {
    int ilo = 0, jlo = 0, ihi = -1, jhi = -1;

    int width() const { return ihi - ilo + 1; }
    int height() const { return jhi - jlo + 1; }
    bool contains(int i, int j) const {
        return i >= ilo && i <= ihi && j >= jlo && j <= jhi;
    }
    bool boundary(int i, int j) const {
        return contains(i, j) && (i == ilo || i == ihi || j == jlo || j == jhi);
    }
    IndexRect shrunk(int m) const { return {ilo + m, jlo + m, ihi - m, jhi - m}; }
    bool valid() const { return width() >= 2 && height() >= 2; }
    bool operator==(const IndexRect&) const = default;
};

/// Region selector for inner products, energies and operator application.
enum class Region { full, omega };

inline const char* region_name(Region r) { return r == Region::full ? "full" : "omega"; }

/// Rectangular computational lattice: a padded exterior around the interior
/// rectangle Omega on which measurements are taken.  Node (i,j) sits at
/// (ox + i*dx, oy + j*dy); values are stored x-major (j fastest).
struct Grid {
    int nx = 0, ny = 0;
    double dx = 0.0, dy = 0.0;
    double ox = 0.0, oy = 0.0;
    IndexRect omega;

    Grid() = default;
    Grid(int nx_, int ny_, double dx_, double dy_, double ox_, double oy_, IndexRect om)
        : nx(nx_), ny(ny_), dx(dx_), dy(dy_), ox(ox_), oy(oy_), omega(om) {
        validate();
    }

    /// Grid with an (onx x ony)-node Omega whose lower-left node is at the
    /// origin, surrounded by `pad` exterior nodes on every side.
    static Grid padded(int onx, int ony, double dx, double dy, int pad) {
        IndexRect om{pad, pad, pad + onx - 1, pad + ony - 1};
        return Grid(onx + 2 * pad, ony + 2 * pad, dx, dy, -pad * dx, -pad * dy, om);
    }

    void validate() const {
        if (nx < 16 || ny < 16) throw std::invalid_argument("Grid: nx, ny must be >= 16");
        if (!(dx > 0.0) || !(dy > 0.0)) throw std::invalid_argument("Grid: dx, dy must be positive");
        if (!omega.valid()) throw std::invalid_argument("Grid: degenerate Omega rectangle");
        if (pad() < 1) throw std::invalid_argument("Grid: Omega must be strictly inside the grid (pad >= 1)");
    }

    /// Exterior padding width in nodes (minimum over the four sides).
    int pad() const {
        int p = omega.ilo;
        p = std::min(p, omega.jlo);
        p = std::min(p, nx - 1 - omega.ihi);
        p = std::min(p, ny - 1 - omega.jhi);
        return p;
    }

    std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * ny + j; }
    double x(int i) const { return ox + i * dx; }
    double y(int j) const { return oy + j * dy; }

    IndexRect rect(Region r) const {
        return r == Region::full ? IndexRect{0, 0, nx - 1, ny - 1} : omega;
    }

    double omega_width() const { return (omega.width() - 1) * dx; }
    double omega_height() const { return (omega.height() - 1) * dy; }
    double omega_diameter() const { return std::hypot(omega_width(), omega_height()); }

    /// Physical bounds of Omega.
    double omega_x_lo() const { return x(omega.ilo); }
    double omega_x_hi() const { return x(omega.ihi); }
    double omega_y_lo() const { return y(omega.jlo); }
    double omega_y_hi() const { return y(omega.jhi); }

    bool in_omega_closure(double px, double py) const {
        return px >= omega_x_lo() && px <= omega_x_hi() && py >= omega_y_lo() && py <= omega_y_hi();
    }

    bool same_shape(const Grid& o) const {
        return nx == o.nx && ny == o.ny && dx == o.dx && dy == o.dy && ox == o.ox &&
               oy == o.oy && omega == o.omega;
    }

    /// One node of the Omega boundary, with its position and the
    /// counterclockwise perimeter coordinate measured from (ilo,jlo).
    struct BoundaryNode {
        int i, j;
        double x, y;
        double arclen;
    };

    double perimeter() const { return 2.0 * (omega_width() + omega_height()); }

    /// Perimeter nodes of Omega in fixed counterclockwise order starting at
    /// the lower-left corner: bottom, right, top, left.
    std::vector<BoundaryNode> boundary_nodes() const {
        std::vector<BoundaryNode> out;
        const auto& om = omega;
        out.reserve(2 * (om.width() + om.height()) - 4);
        double s = 0.0;
        for (int i = om.ilo; i <= om.ihi; ++i, s += dx)
            out.push_back({i, om.jlo, x(i), y(om.jlo), s});
        s = omega_width();
        for (int j = om.jlo + 1; j <= om.jhi; ++j)
            out.push_back({om.ihi, j, x(om.ihi), y(j), s += dy});
        s = omega_width() + omega_height();
        for (int i = om.ihi - 1; i >= om.ilo; --i)
            out.push_back({i, om.jhi, x(i), y(om.jhi), s += dx});
        s = 2.0 * omega_width() + omega_height();
        for (int j = om.jhi - 1; j >= om.jlo + 1; --j)
            out.push_back({om.ilo, j, x(om.ilo), y(j), s += dy});
        return out;
    }

    /// Counterclockwise perimeter coordinate of a point on (or near) the
    /// Omega boundary.  The point is projected onto the nearest edge.
    double perimeter_coord(double px, double py) const {
        const double xlo = omega_x_lo(), xhi = omega_x_hi();
        const double ylo = omega_y_lo(), yhi = omega_y_hi();
        const double W = omega_width(), H = omega_height();
        const double cx = std::min(std::max(px, xlo), xhi);
        const double cy = std::min(std::max(py, ylo), yhi);
        const double db = cy - ylo, dt = yhi - cy, dl = cx - xlo, dr = xhi - cx;
        const double m = std::min(std::min(db, dt), std::min(dl, dr));
        if (m == db) return cx - xlo;
        if (m == dr) return W + (cy - ylo);
        if (m == dt) return W + H + (xhi - cx);
        return 2.0 * W + H + (yhi - cy);
    }
};

}  // namespace tatrec
