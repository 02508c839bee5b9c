#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "tatrec/medium.hpp"

namespace tatrec {

/// Deterministic uniform doubles from raw mt19937_64 bits; the standard
/// distributions are not bit-stable across library implementations.
struct Rng {
    std::mt19937_64 eng;
    explicit Rng(std::uint64_t seed) : eng(seed) {}
    double uniform() { return (eng() >> 11) * 0x1.0p-53; }
    double uniform(double a, double b) { return a + (b - a) * uniform(); }
    int uniform_int(int a, int b) {  // inclusive
        return a + static_cast<int>(uniform() * (b - a + 1)) % (b - a + 1);
    }
};

/// C-infinity step: 0 for t <= 0, 1 for t >= 1, strictly monotone between.
inline double smooth_step(double t) {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    const double e1 = std::exp(-1.0 / t), e2 = std::exp(-1.0 / (1.0 - t));
    return e1 / (e1 + e2);
}

/// C-infinity bump: exp(1 - 1/(1 - r^2)) for |r| < 1, zero outside; peaks
/// at 1 and vanishes with all derivatives at |r| = 1.
inline double smooth_bump(double r) {
    const double r2 = r * r;
    if (r2 >= 1.0) return 0.0;
    return std::exp(1.0 - 1.0 / (1.0 - r2));
}

enum class PhantomKind { disks, gaussians, bars };

inline PhantomKind phantom_kind_from(const std::string& s) {
    if (s == "disks") return PhantomKind::disks;
    if (s == "gaussians") return PhantomKind::gaussians;
    if (s == "bars") return PhantomKind::bars;
    throw std::invalid_argument("unknown phantom kind '" + s + "'");
}

struct PhantomParams {
    PhantomKind kind = PhantomKind::gaussians;
    std::uint64_t seed = 1;
    int count = 3;
    double bar_angle = 0.0;    // direction along the bars, radians
    double bar_width = 0.0;    // cross-section sigma; 0 picks one from K size
    double bar_spacing = 0.0;  // distance between bar centers; 0 auto
};

/// Initial pressure supported inside K (which must keep at least a 3-node
/// margin to the Omega boundary), with values in [0, 1].  Identical seeds
/// and grids give bitwise identical fields.
inline ScalarField make_phantom(const Grid& g, const IndexRect& K, const PhantomParams& par) {
    if (!g.omega.shrunk(3).valid() || !g.omega.shrunk(3).contains(K.ilo, K.jlo) ||
        !g.omega.shrunk(3).contains(K.ihi, K.jhi))
        throw std::invalid_argument("make_phantom: K must keep a 3-node margin inside Omega");
    if (par.count < 1 || par.count > 64)
        throw std::invalid_argument("make_phantom: count must be in [1, 64]");

    const double xlo = g.x(K.ilo), xhi = g.x(K.ihi), ylo = g.y(K.jlo), yhi = g.y(K.jhi);
    const double ext = std::min(xhi - xlo, yhi - ylo);
    if (!(ext > 0.0)) throw std::invalid_argument("make_phantom: degenerate K");
    Rng rng(par.seed);
    ScalarField f(g, 0.0);

    auto for_k_nodes = [&](auto&& fn) {
        for (int i = K.ilo; i <= K.ihi; ++i)
            for (int j = K.jlo; j <= K.jhi; ++j) fn(i, j, g.x(i), g.y(j));
    };

    switch (par.kind) {
        case PhantomKind::gaussians: {
            // Centers stay 8 sigma inside K so the truncated tails are below
            // 1e-14 of the peak at the K boundary.
            struct Bump { double cx, cy, s, a; };
            std::vector<Bump> bumps;
            for (int b = 0; b < par.count; ++b) {
                double s = rng.uniform(0.05, 0.11) * ext;
                s = std::min(s, ext / 16.5);
                const double m = 8.0 * s;
                bumps.push_back({rng.uniform(xlo + m, xhi - m), rng.uniform(ylo + m, yhi - m), s,
                                 rng.uniform(0.4, 1.0)});
            }
            for_k_nodes([&](int i, int j, double x, double y) {
                double acc = 0.0;
                for (const auto& b : bumps) {
                    const double r2 = (x - b.cx) * (x - b.cx) + (y - b.cy) * (y - b.cy);
                    acc += b.a * std::exp(-r2 / (2.0 * b.s * b.s));
                }
                f(i, j) = acc;
            });
            break;
        }
        case PhantomKind::disks: {
            struct Disk { double cx, cy, r, h; };
            std::vector<Disk> disks;
            const double pad = 2.0 * std::max(g.dx, g.dy);
            for (int b = 0; b < par.count; ++b) {
                const double r = rng.uniform(0.08, 0.2) * ext;
                const double m = r + pad;
                disks.push_back({rng.uniform(xlo + m, xhi - m), rng.uniform(ylo + m, yhi - m), r,
                                 rng.uniform(0.3, 1.0)});
            }
            for_k_nodes([&](int i, int j, double x, double y) {
                double v = 0.0;
                for (const auto& d : disks)
                    if ((x - d.cx) * (x - d.cx) + (y - d.cy) * (y - d.cy) <= d.r * d.r)
                        v = std::max(v, d.h);
                f(i, j) = v;
            });
            break;
        }
        case PhantomKind::bars: {
            // Parallel smooth ridges: gradients concentrate along the bar
            // normal, so the wavefront set points across the bars.  A
            // C-infinity plateau window confines the support to K.
            const double cx = 0.5 * (xlo + xhi), cy = 0.5 * (ylo + yhi);
            const double nxv = -std::sin(par.bar_angle), nyv = std::cos(par.bar_angle);
            const double sw = par.bar_width > 0.0 ? par.bar_width : 0.045 * ext;
            const double sp = par.bar_spacing > 0.0 ? par.bar_spacing : 0.18 * ext;
            const double wm = 0.15;  // window margin as a fraction of each K extent
            for_k_nodes([&](int i, int j, double x, double y) {
                const double off = nxv * (x - cx) + nyv * (y - cy);
                double acc = 0.0;
                for (int b = 0; b < par.count; ++b) {
                    const double center = (b - 0.5 * (par.count - 1)) * sp;
                    acc += std::exp(-(off - center) * (off - center) / (2.0 * sw * sw));
                }
                const double ux = (x - xlo) / (xhi - xlo), uy = (y - ylo) / (yhi - ylo);
                const double win = smooth_step(ux / wm) * smooth_step((1.0 - ux) / wm) *
                                   smooth_step(uy / wm) * smooth_step((1.0 - uy) / wm);
                f(i, j) = acc * win;
            });
            break;
        }
    }

    const double m = f.linf();
    if (m > 1.0)
        for (double& a : f.v) a /= m;
    for (double& a : f.v)
        if (a < 0.0) a = 0.0;
    return f;
}

enum class MediumKind { constant, lens, two_lens, random_smooth };

inline MediumKind medium_kind_from(const std::string& s) {
    if (s == "constant") return MediumKind::constant;
    if (s == "lens") return MediumKind::lens;
    if (s == "two_lens") return MediumKind::two_lens;
    if (s == "random_smooth") return MediumKind::random_smooth;
    throw std::invalid_argument("unknown medium kind '" + s + "'");
}

struct MediumParams {
    MediumKind kind = MediumKind::constant;
    double c0 = 1.0;  // constant kind only
    double amp = -0.3, amp2 = 0.25;
    double radius_frac = 0.2, radius2_frac = 0.15;
    double cx_frac = 0.5, cy_frac = 0.5;
    double cx2_frac = 0.7, cy2_frac = 0.65;
    std::uint64_t seed = 1;
    int modes = 6;
    double q_amp = 0.0;
};

/// Media built on the grid: all kinds keep the metric Euclidean, and all
/// variable kinds are exactly c = 1, q = 0 outside Omega (speed anomalies
/// are compactly supported inside).  Speed contrasts are limited to 50%.
inline Medium make_medium(const Grid& g, const MediumParams& par) {
    if (par.q_amp < 0.0) throw std::invalid_argument("make_medium: q_amp must be >= 0");
    ScalarField c(g, 1.0), one(g, 1.0), q(g, 0.0);

    const double W = g.omega_width(), H = g.omega_height();
    auto lens_center = [&](double fx, double fy) {
        return std::pair<double, double>{g.omega_x_lo() + fx * W, g.omega_y_lo() + fy * H};
    };
    auto add_lens = [&](double amp, double rfrac, double fx, double fy) {
        if (std::abs(amp) > 0.5)
            throw std::invalid_argument("make_medium: |amp| must be <= 0.5");
        if (!(rfrac > 0.0)) throw std::invalid_argument("make_medium: radius_frac must be > 0");
        const auto [cx, cy] = lens_center(fx, fy);
        const double R = rfrac * std::min(W, H);
        const double margin = 2.0 * std::max(g.dx, g.dy);
        if (cx - R < g.omega_x_lo() + margin || cx + R > g.omega_x_hi() - margin ||
            cy - R < g.omega_y_lo() + margin || cy + R > g.omega_y_hi() - margin)
            throw std::invalid_argument("make_medium: lens support must stay inside Omega");
        for (int i = 0; i < g.nx; ++i)
            for (int j = 0; j < g.ny; ++j) {
                const double r = std::hypot(g.x(i) - cx, g.y(j) - cy) / R;
                if (r < 1.0) {
                    const double b = smooth_bump(r);
                    c(i, j) += amp * b;
                    if (par.q_amp != 0.0) q(i, j) += par.q_amp * b * b;
                }
            }
    };

    switch (par.kind) {
        case MediumKind::constant: {
            if (!(par.c0 > 0.0)) throw std::invalid_argument("make_medium: c0 must be positive");
            c.fill(par.c0);
            break;
        }
        case MediumKind::lens: {
            add_lens(par.amp, par.radius_frac, par.cx_frac, par.cy_frac);
            break;
        }
        case MediumKind::two_lens: {
            add_lens(par.amp, par.radius_frac, par.cx_frac, par.cy_frac);
            add_lens(par.amp2, par.radius2_frac, par.cx2_frac, par.cy2_frac);
            break;
        }
        case MediumKind::random_smooth: {
            if (par.modes < 1 || par.modes > 32)
                throw std::invalid_argument("make_medium: modes must be in [1, 32]");
            if (std::abs(par.amp) > 0.5)
                throw std::invalid_argument("make_medium: |amp| must be <= 0.5");
            Rng rng(par.seed);
            struct Mode { double kx, ky, ph, a; };
            std::vector<Mode> dc, dq;
            for (int s = 0; s < 2; ++s) {
                auto& dst = s == 0 ? dc : dq;
                for (int m = 0; m < par.modes; ++m)
                    dst.push_back({static_cast<double>(rng.uniform_int(1, 3)),
                                   static_cast<double>(rng.uniform_int(1, 3)),
                                   rng.uniform(0.0, 2.0 * M_PI), rng.uniform(-1.0, 1.0)});
            }
            const double wm = 0.15;
            ScalarField fc(g, 0.0), fq(g, 0.0);
            double mc = 0.0, mq = 0.0;
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j) {
                    const double ux = (g.x(i) - g.omega_x_lo()) / W;
                    const double uy = (g.y(j) - g.omega_y_lo()) / H;
                    if (ux <= 0.0 || ux >= 1.0 || uy <= 0.0 || uy >= 1.0) continue;
                    const double win = smooth_step(ux / wm) * smooth_step((1.0 - ux) / wm) *
                                       smooth_step(uy / wm) * smooth_step((1.0 - uy) / wm);
                    double ac = 0.0, aq = 0.0;
                    for (const auto& md : dc)
                        ac += md.a * std::cos(2.0 * M_PI * (md.kx * ux + md.ky * uy) + md.ph);
                    for (const auto& md : dq)
                        aq += md.a * std::cos(2.0 * M_PI * (md.kx * ux + md.ky * uy) + md.ph);
                    fc(i, j) = win * ac;
                    fq(i, j) = win * aq;
                    mc = std::max(mc, std::abs(fc(i, j)));
                    mq = std::max(mq, std::abs(fq(i, j)));
                }
            for (int i = 0; i < g.nx; ++i)
                for (int j = 0; j < g.ny; ++j) {
                    if (mc > 0.0) c(i, j) += par.amp * fc(i, j) / mc;
                    if (par.q_amp != 0.0 && mq > 0.0) {
                        const double w = fq(i, j) / mq;
                        q(i, j) = par.q_amp * w * w;
                    }
                }
            break;
        }
    }

    return Medium(g, std::move(c), one, one, std::move(q));
}

}  // namespace tatrec
