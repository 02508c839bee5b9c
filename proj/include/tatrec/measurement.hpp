#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "tatrec/wave.hpp"

namespace tatrec {

/// One observed stretch of the Omega perimeter: a fraction interval of one
/// side plus the per-point observation time budget s.
struct Arc {
    int side = 0;  // 0 bottom, 1 right, 2 top, 3 left (counterclockwise)
    double from = 0.0, to = 1.0;
    double s = 0.0;

    static const char* side_name(int s) {
        static const char* names[4] = {"bottom", "right", "top", "left"};
        return names[s];
    }

    /// Grammar: side:from:to:s, side named or 0..3.
    static Arc parse(const std::string& text) {
        std::string parts[4];
        std::size_t start = 0;
        for (int p = 0; p < 4; ++p) {
            const std::size_t colon = text.find(':', start);
            if (p < 3) {
                if (colon == std::string::npos)
                    throw std::invalid_argument("Arc: expected side:from:to:s, got '" + text + "'");
                parts[p] = text.substr(start, colon - start);
                start = colon + 1;
            } else {
                if (colon != std::string::npos)
                    throw std::invalid_argument("Arc: trailing fields in '" + text + "'");
                parts[p] = text.substr(start);
            }
        }
        Arc a;
        if (parts[0] == "bottom") a.side = 0;
        else if (parts[0] == "right") a.side = 1;
        else if (parts[0] == "top") a.side = 2;
        else if (parts[0] == "left") a.side = 3;
        else if (parts[0].size() == 1 && parts[0][0] >= '0' && parts[0][0] <= '3')
            a.side = parts[0][0] - '0';
        else
            throw std::invalid_argument("Arc: unknown side '" + parts[0] + "'");
        try {
            a.from = std::stod(parts[1]);
            a.to = std::stod(parts[2]);
            a.s = std::stod(parts[3]);
        } catch (const std::exception&) {
            throw std::invalid_argument("Arc: non-numeric field in '" + text + "'");
        }
        if (!(a.from >= 0.0 && a.from < a.to && a.to <= 1.0))
            throw std::invalid_argument("Arc: need 0 <= from < to <= 1 in '" + text + "'");
        if (!(a.s > 0.0)) throw std::invalid_argument("Arc: budget s must be positive");
        return a;
    }

    std::string format() const {
        std::ostringstream os;
        os << side_name(side) << ':' << from << ':' << to << ':' << s;
        return os.str();
    }
};

/// The observed set: arcs of the perimeter with time budgets, realized both
/// as a smooth cutoff chi(t, arclen) and as per-node flags and budgets.
/// chi is 1 well inside the set, falls to 0 through raised-cosine tapers
/// over the last taper_time_frac of the budget and over taper_space_nodes
/// node spacings at arc ends, and vanishes outside.  A full perimeter cover
/// is cyclic, so no spatial taper is applied there.
struct MeasurementSet {
    Grid grid;
    std::vector<Arc> arcs;
    bool full_cover = false;
    double taper_time_frac = 0.10;
    double taper_space_nodes = 2.0;

    std::vector<std::uint8_t> on_gamma;  // per boundary node
    std::vector<double> s;               // per boundary node, 0 off Gamma

    static MeasurementSet from_arcs(const Grid& g, std::vector<Arc> arcs_in) {
        if (arcs_in.empty()) throw std::invalid_argument("MeasurementSet: no arcs given");
        MeasurementSet ms;
        ms.grid = g;
        ms.arcs = std::move(arcs_in);
        ms.detect_full_cover();
        ms.build_node_budgets();
        return ms;
    }

    static MeasurementSet full_boundary(const Grid& g, double s_budget) {
        std::vector<Arc> arcs(4);
        for (int k = 0; k < 4; ++k) arcs[k] = Arc{k, 0.0, 1.0, s_budget};
        return from_arcs(g, std::move(arcs));
    }

    bool any() const {
        return std::any_of(on_gamma.begin(), on_gamma.end(), [](std::uint8_t b) { return b != 0; });
    }

    double sup_s() const {
        double m = 0.0;
        for (const Arc& a : arcs) m = std::max(m, a.s);
        return m;
    }

    double side_offset(int side) const {
        const double W = grid.omega_width(), H = grid.omega_height();
        const double off[4] = {0.0, W, W + H, 2.0 * W + H};
        return off[side];
    }
    double side_length(int side) const {
        return (side % 2 == 0) ? grid.omega_width() : grid.omega_height();
    }
    double side_spacing(int side) const { return (side % 2 == 0) ? grid.dx : grid.dy; }

    /// Smooth cutoff at time t and counterclockwise perimeter coordinate p.
    double chi(double t, double p) const {
        if (t < 0.0) return 0.0;
        const double P = grid.perimeter();
        p = std::fmod(p, P);
        if (p < 0.0) p += P;
        double best = 0.0;
        for (const Arc& a : arcs) {
            const double off = side_offset(a.side), len = side_length(a.side);
            const double lo = off + a.from * len, hi = off + a.to * len;
            if (p < lo || p > hi) continue;
            double f = time_factor(t, a.s);
            if (!full_cover) {
                const double w = taper_space_nodes * side_spacing(a.side);
                const double d = std::min(p - lo, hi - p);
                if (d < w) f *= 0.5 * (1.0 - std::cos(M_PI * d / w));
            }
            best = std::max(best, f);
        }
        return best;
    }

    /// chi sampled on the trace lattice, step-major like BoundaryTrace.
    std::vector<double> mask_lattice(TimeGrid tg) const {
        const auto nodes = BoundaryTrace::layout(grid);
        std::vector<double> out(static_cast<std::size_t>(tg.nt + 1) * nodes.size());
        for (int n = 0; n <= tg.nt; ++n)
            for (std::size_t k = 0; k < nodes.size(); ++k)
                out[static_cast<std::size_t>(n) * nodes.size() + k] =
                    chi(n * tg.dt, nodes[k].arclen);
        return out;
    }

  private:
    double time_factor(double t, double budget) const {
        const double t0 = (1.0 - taper_time_frac) * budget;
        if (t <= t0) return 1.0;
        if (t >= budget) return 0.0;
        return 0.5 * (1.0 + std::cos(M_PI * (t - t0) / (budget - t0)));
    }

    void detect_full_cover() {
        double covered[4] = {0.0, 0.0, 0.0, 0.0};
        for (const Arc& a : arcs)
            if (a.from == 0.0 && a.to == 1.0) covered[a.side] = 1.0;
        full_cover = covered[0] == 1.0 && covered[1] == 1.0 && covered[2] == 1.0 &&
                     covered[3] == 1.0;
    }

    void build_node_budgets() {
        const auto nodes = BoundaryTrace::layout(grid);
        on_gamma.assign(nodes.size(), 0);
        s.assign(nodes.size(), 0.0);
        for (std::size_t k = 0; k < nodes.size(); ++k) {
            for (const Arc& a : arcs) {
                const double off = side_offset(a.side), len = side_length(a.side);
                const double lo = off + a.from * len, hi = off + a.to * len;
                const double eps = 1e-9 * len;
                if (nodes[k].arclen >= lo - eps && nodes[k].arclen <= hi + eps)
                    s[k] = std::max(s[k], a.s);
            }
            // The perimeter start node also closes the left side.
            if (k == 0) {
                for (const Arc& a : arcs)
                    if (a.side == 3 && a.to == 1.0) s[k] = std::max(s[k], a.s);
            }
            on_gamma[k] = s[k] > 0.0 ? 1 : 0;
        }
    }
};

/// Entrywise product of a trace with the sampled cutoff of the set.
inline BoundaryTrace masked(const BoundaryTrace& trace, const MeasurementSet& ms) {
    trace.require_layout(ms.grid, "masked");
    BoundaryTrace out = trace;
    const auto mask = ms.mask_lattice(trace.time);
    for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] *= mask[k];
    return out;
}

}  // namespace tatrec
