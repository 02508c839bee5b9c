#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <queue>
#include <utility>
#include <vector>

#include "tatrec/measurement.hpp"
#include "tatrec/medium.hpp"

namespace tatrec {

/// Multi-source Dijkstra in the travel-time metric on the 8-neighbour node
/// graph.  Edge weights are trapezoidal: the mean of the two endpoint
/// slownesses along the edge direction times nothing further, since the
/// nodal value sqrt(g11 ex^2 + g22 ey^2)/c already includes the edge length
/// for the displacement (ex, ey).  Sources carry initial potentials, so a
/// label of d(x, z) + p(z) is minimized over all sources z.  Graph paths
/// overestimate true geodesic distance (metrication), never underestimate.
inline std::vector<double> graph_distance(
    const Medium& m, const std::vector<std::pair<std::size_t, double>>& sources) {
    const Grid& g = m.grid;
    const std::size_t n = g.size();
    if (sources.empty()) throw std::invalid_argument("graph_distance: no sources");

    std::vector<double> dist(n, std::numeric_limits<double>::infinity());
    using Item = std::pair<double, std::size_t>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (const auto& [k, p] : sources) {
        if (k >= n) throw std::invalid_argument("graph_distance: source index out of range");
        if (p < dist[k]) {
            dist[k] = p;
            heap.push({p, k});
        }
    }

    // Nodal slowness-lengths for the 8 displacement stencils.
    static const int DI[8] = {1, -1, 0, 0, 1, 1, -1, -1};
    static const int DJ[8] = {0, 0, 1, -1, 1, -1, 1, -1};
    std::vector<std::array<double, 8>> wlen(n);
    for (int i = 0; i < g.nx; ++i)
        for (int j = 0; j < g.ny; ++j) {
            const std::size_t k = g.idx(i, j);
            for (int e = 0; e < 8; ++e) {
                const double ex = DI[e] * g.dx, ey = DJ[e] * g.dy;
                wlen[k][e] =
                    std::sqrt(m.g11.v[k] * ex * ex + m.g22.v[k] * ey * ey) / m.c.v[k];
            }
        }

    while (!heap.empty()) {
        const auto [d, k] = heap.top();
        heap.pop();
        if (d > dist[k]) continue;
        const int i = static_cast<int>(k / g.ny), j = static_cast<int>(k % g.ny);
        for (int e = 0; e < 8; ++e) {
            const int ii = i + DI[e], jj = j + DJ[e];
            if (ii < 0 || ii >= g.nx || jj < 0 || jj >= g.ny) continue;
            const std::size_t kk = g.idx(ii, jj);
            const double nd = d + 0.5 * (wlen[k][e] + wlen[kk][e]);
            if (nd < dist[kk]) {
                dist[kk] = nd;
                heap.push({nd, kk});
            }
        }
    }
    return dist;
}

struct UniquenessResult {
    ScalarField label;    // min over observed nodes z of d(x, z) - s(z)
    ScalarField marked;   // 1 where the label clears the margin
    bool verdict = false; // all K nodes marked
    int unmarked_count = 0;
    int first_unmarked_i = -1, first_unmarked_j = -1;
    double margin = 0.0;
};

/// Unique-continuation coverage test: a point x is marked when some
/// observed boundary node z satisfies d(x, z) <= s(z) - margin.  The margin
/// of one cell diagonal absorbs lattice metrication; graph distances only
/// overestimate, so marks are conservative.  Verdict requires every node of
/// K to be marked.
inline UniquenessResult uniqueness_condition_check(const Medium& m, const MeasurementSet& ms,
                                                   const IndexRect& K, double margin = -1.0) {
    require_same_grid(m.grid, ms.grid, "uniqueness_condition_check");
    if (!m.grid.omega.contains(K.ilo, K.jlo) || !m.grid.omega.contains(K.ihi, K.jhi))
        throw std::invalid_argument("uniqueness_condition_check: K must lie inside Omega");
    if (!ms.any()) throw std::invalid_argument("uniqueness_condition_check: empty observed set");
    if (margin < 0.0) margin = std::max(m.grid.dx, m.grid.dy);

    const auto nodes = BoundaryTrace::layout(m.grid);
    std::vector<std::pair<std::size_t, double>> sources;
    for (std::size_t k = 0; k < nodes.size(); ++k) {
        if (!ms.on_gamma[k]) continue;
        const int i = nodes[k].iom + m.grid.omega.ilo;
        const int j = nodes[k].jom + m.grid.omega.jlo;
        sources.push_back({m.grid.idx(i, j), -ms.s[k]});
    }

    UniquenessResult res;
    res.margin = margin;
    res.label = ScalarField(m.grid, std::numeric_limits<double>::infinity());
    res.label.v = graph_distance(m, sources);
    res.marked = ScalarField(m.grid, 0.0);
    for (int i = 0; i < m.grid.nx; ++i)
        for (int j = 0; j < m.grid.ny; ++j)
            if (res.label(i, j) <= -margin) res.marked(i, j) = 1.0;

    res.verdict = true;
    for (int i = K.ilo; i <= K.ihi; ++i)
        for (int j = K.jlo; j <= K.jhi; ++j)
            if (res.marked(i, j) == 0.0) {
                res.verdict = false;
                ++res.unmarked_count;
                if (res.first_unmarked_i < 0) {
                    res.first_unmarked_i = i;
                    res.first_unmarked_j = j;
                }
            }
    return res;
}

}  // namespace tatrec
