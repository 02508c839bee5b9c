#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "tatrec/elliptic.hpp"
#include "tatrec/energy.hpp"
#include "tatrec/errors.hpp"
#include "tatrec/measurement.hpp"
#include "tatrec/wave.hpp"

namespace tatrec {

/// Time reversal with harmonically extended final data: the backward solve
/// uses the Cauchy pair (phi, 0) at t = T, where phi solves P phi = 0 with
/// the trace's final row as Dirichlet data.  Applied to exact forward data
/// this is a pseudo-inverse of the measurement map; the reconstruction
/// error operator it induces is a contraction for large enough T.
inline ScalarField pseudo_inverse_A(const Medium& m, const BoundaryTrace& trace,
                                    CgInfo* cg_info = nullptr,
                                    std::vector<std::string>* warnings = nullptr) {
    trace.require_layout(m.grid, "pseudo_inverse_A");
    std::vector<double> final_row(trace.nodes.size());
    for (int k = 0; k < trace.nb(); ++k) final_row[k] = trace.at(trace.time.nt, k);
    ScalarField phi = harmonic_extension(m, final_row, 1e-10, 5000, cg_info);
    BackwardResult back =
        backward_dirichlet_solve(m, trace, phi, ScalarField(m.grid, 0.0), EnergyLogging::none);
    if (warnings) *warnings = back.warnings;
    return back.u0;
}

/// Naive time reversal: zero final data, trace faded out by a raised-cosine
/// time cutoff over the last cutoff_frac of the window so the injected
/// Dirichlet data is compatible with the zero Cauchy pair at t = T.
inline ScalarField naive_time_reversal_A0(const Medium& m, const BoundaryTrace& trace,
                                          double cutoff_frac = 0.1,
                                          std::vector<std::string>* warnings = nullptr) {
    trace.require_layout(m.grid, "naive_time_reversal_A0");
    if (cutoff_frac < 0.0 || cutoff_frac > 0.5)
        throw std::invalid_argument("naive_time_reversal_A0: cutoff_frac must lie in [0, 0.5]");
    BoundaryTrace cut = trace;
    const double T = trace.time.T(), t0 = (1.0 - cutoff_frac) * T;
    if (cutoff_frac > 0.0) {
        for (int n = 0; n <= trace.time.nt; ++n) {
            const double t = n * trace.time.dt;
            double f = 1.0;
            if (t >= T) f = 0.0;
            else if (t > t0) f = 0.5 * (1.0 + std::cos(M_PI * (t - t0) / (T - t0)));
            for (int k = 0; k < cut.nb(); ++k) cut.at(n, k) *= f;
        }
    }
    // cutoff_frac = 0 keeps the raw trace; the backward solve reports the
    // jump against the zero Cauchy data as a compatibility warning.
    BackwardResult back = backward_dirichlet_solve(m, cut, ScalarField(m.grid, 0.0),
                                                   ScalarField(m.grid, 0.0), EnergyLogging::none);
    if (warnings) *warnings = back.warnings;
    return back.u0;
}

/// Forward options for reconstruction iterates: the support-margin check is
/// waived because iterates are supported on the Omega closure with an
/// exactly zero perimeter ring, not two nodes inside it.
inline ForwardOptions iterate_forward_options() {
    ForwardOptions o;
    o.log = EnergyLogging::endpoints;
    o.check_support = false;
    return o;
}

/// One application of the reconstruction error operator K f = f - A(Lambda f).
inline ScalarField apply_K(const Medium& m, const ScalarField& f, TimeGrid tg) {
    ForwardResult fwd = forward_solve(m, f, tg, iterate_forward_options());
    ScalarField af = pseudo_inverse_A(m, fwd.trace);
    ScalarField out = f;
    for (std::size_t k = 0; k < out.v.size(); ++k) out.v[k] -= af.v[k];
    return out;
}

enum class ReconStatus { converged, stalled, diverged, iter_limit };

inline const char* recon_status_name(ReconStatus s) {
    switch (s) {
        case ReconStatus::converged: return "converged";
        case ReconStatus::stalled: return "stalled";
        case ReconStatus::diverged: return "diverged";
        default: return "iter_limit";
    }
}

struct IterateStat {
    int k = 0;
    double update_norm = 0.0;   // ||f_k - f_{k-1}||_HD (k = 0: ||f_0||)
    double rel_update = 0.0;    // update_norm / ||f_k||_HD
    double update_ratio = 0.0;  // update_norm ratio vs previous iterate (k >= 1)
    double err_hd = -1.0;       // relative H_D error vs ground truth, -1 if unknown
    double energy_ratio = -1.0; // E_Omega(T)/E_Omega(0) of this iterate's forward solve
    int cg_iterations = 0;
};

struct ReconstructionReport {
    std::vector<IterateStat> iterates;
    ReconStatus status = ReconStatus::iter_limit;
    double energy_ratio = -1.0;  // from the first iterate's forward solve
    double final_rel_update = 0.0;
    double final_err_hd = -1.0;
    std::vector<double> wall_ms;  // in-memory diagnostics; not serialized
};

struct NeumannOptions {
    int max_iter = 10;
    double rel_update_tol = 1e-6;
    // An update norm counts as growing when it exceeds the previous one by
    // this factor; three growing updates in a row classify as diverged.
    double divergence_growth = 1.02;
    double stall_ratio = 0.9;
    const ScalarField* ground_truth = nullptr;
};

namespace detail {

inline std::pair<ScalarField, ReconstructionReport> neumann_core(
    const Medium& m, const BoundaryTrace& data, const NeumannOptions& opts,
    const MeasurementSet* ms) {
    data.require_layout(m.grid, "neumann_reconstruct");
    if (opts.max_iter < 1) throw std::invalid_argument("neumann_reconstruct: max_iter must be >= 1");
    if (!(opts.rel_update_tol > 0.0))
        throw std::invalid_argument("neumann_reconstruct: rel_update_tol must be positive");
    if (opts.ground_truth) require_same_grid(m.grid, opts.ground_truth->grid, "neumann_reconstruct");

    const TimeGrid tg = data.time;
    const OperatorTable T(m);

    std::vector<double> mask;
    BoundaryTrace h = data;
    if (ms) {
        if (ms->sup_s() > tg.T() * (1.0 + 1e-12))
            throw std::invalid_argument(
                "masked_reconstruct: observation budget exceeds the trace window");
        mask = ms->mask_lattice(tg);
        for (std::size_t k = 0; k < h.values.size(); ++k) h.values[k] *= mask[k];
    }

    const double gt_norm =
        opts.ground_truth ? hd_seminorm(T, *opts.ground_truth, Region::omega) : 0.0;
    auto rel_err = [&](const ScalarField& f) {
        if (!opts.ground_truth || gt_norm == 0.0) return -1.0;
        ScalarField d = f;
        for (std::size_t k = 0; k < d.v.size(); ++k) d.v[k] -= opts.ground_truth->v[k];
        return hd_seminorm(T, d, Region::omega) / gt_norm;
    };

    ReconstructionReport rep;
    CgInfo cg;
    ScalarField f = pseudo_inverse_A(m, h, &cg);

    IterateStat st0;
    st0.k = 0;
    st0.update_norm = hd_seminorm(T, f, Region::omega);
    st0.rel_update = 1.0;
    st0.err_hd = rel_err(f);
    st0.cg_iterations = cg.iterations;
    rep.iterates.push_back(st0);

    double prev_update = st0.update_norm;
    int growing_streak = 0;
    bool finished = false;

    for (int k = 1; k <= opts.max_iter && !finished; ++k) {
        ForwardResult fwd = forward_solve(m, f, tg, iterate_forward_options());
        BoundaryTrace resid = h;
        for (std::size_t n = 0; n < resid.values.size(); ++n) {
            double lf = fwd.trace.values[n];
            if (ms) lf *= mask[n];
            resid.values[n] -= lf;
        }
        ScalarField d = pseudo_inverse_A(m, resid, &cg);
        for (std::size_t n = 0; n < f.v.size(); ++n) f.v[n] += d.v[n];

        IterateStat st;
        st.k = k;
        st.update_norm = hd_seminorm(T, d, Region::omega);
        const double fn = hd_seminorm(T, f, Region::omega);
        st.rel_update = fn > 0.0 ? st.update_norm / fn : 0.0;
        st.update_ratio = prev_update > 0.0 ? st.update_norm / prev_update : 0.0;
        st.err_hd = rel_err(f);
        st.cg_iterations = cg.iterations;
        if (!fwd.energy_omega.empty()) {
            const double e0 = fwd.energy_omega.front().total;
            const double eT = fwd.energy_omega.back().total;
            st.energy_ratio = e0 > 0.0 ? eT / e0 : -1.0;
            if (rep.energy_ratio < 0.0) rep.energy_ratio = st.energy_ratio;
        }
        rep.iterates.push_back(st);

        growing_streak = st.update_norm > prev_update * opts.divergence_growth
                             ? growing_streak + 1
                             : 0;
        prev_update = st.update_norm;

        if (st.rel_update < opts.rel_update_tol) {
            rep.status = ReconStatus::converged;
            finished = true;
        } else if (growing_streak >= 3) {
            rep.status = ReconStatus::diverged;
            finished = true;
        }
    }

    if (!finished) {
        // Mean ratio of the last few updates decides stalled vs iter_limit.
        double acc = 0.0;
        int cnt = 0;
        for (std::size_t i = rep.iterates.size(); i-- > 1 && cnt < 3;) {
            acc += rep.iterates[i].update_ratio;
            ++cnt;
        }
        rep.status = (cnt > 0 && acc / cnt >= opts.stall_ratio) ? ReconStatus::stalled
                                                                : ReconStatus::iter_limit;
    }
    rep.final_rel_update = rep.iterates.back().rel_update;
    rep.final_err_hd = rep.iterates.back().err_hd;
    return {std::move(f), std::move(rep)};
}

}  // namespace detail

/// Fixed-point form of the Neumann series: f_0 = A h,
/// f_{k+1} = f_k + A(h - Lambda f_k).  max_iter counts corrections after
/// f_0.  Zero traces converge to zero after one correction.
inline std::pair<ScalarField, ReconstructionReport> neumann_reconstruct(
    const Medium& m, const BoundaryTrace& trace, const NeumannOptions& opts = {}) {
    return detail::neumann_core(m, trace, opts, nullptr);
}

/// Neumann iteration on masked data: both the measured trace and each
/// iterate's synthetic trace are multiplied by the sampled cutoff of the
/// measurement set.  Since chi vanishes at the final time, the harmonic
/// extension step sees zero Dirichlet data.
inline std::pair<ScalarField, ReconstructionReport> masked_reconstruct(
    const Medium& m, const BoundaryTrace& trace, const MeasurementSet& ms,
    const NeumannOptions& opts = {}) {
    require_same_grid(m.grid, ms.grid, "masked_reconstruct");
    return detail::neumann_core(m, trace, opts, &ms);
}

/// Numerical counterparts of the contraction argument for one field:
/// the harmonic projection at t = T, the energy comparison it implies, and
/// the one-step error ratio with its energy-based upper bound.
struct ContractionDiagnostics {
    double hd_f = 0.0;               // ||f||_HD
    double k_ratio = 0.0;            // ||K f||_HD / ||f||_HD
    double energy_ratio = 0.0;       // E_Omega(u, T) / E_Omega(u, 0)
    double error_bound = 0.0;        // sqrt(energy_ratio), upper bound for k_ratio
    double orthogonality_rel = 0.0;  // harmonic projection orthogonality residual
    double pythagoras_rel = 0.0;     // |D(uT-phi) - (D(uT) - D(phi))| / D(uT)
    double final_energy_lhs = 0.0;   // D(uT - phi) + kinetic(T)
    double final_energy_rhs = 0.0;   // E_Omega(u, T)
};

inline ContractionDiagnostics contraction_diagnostics(const Medium& m, const ScalarField& f,
                                                      TimeGrid tg) {
    const OperatorTable T(m);
    ContractionDiagnostics d;

    ForwardOptions fo;
    fo.log = EnergyLogging::endpoints;
    ForwardResult fwd = forward_solve(m, f, tg, fo);

    std::vector<double> final_row(fwd.trace.nodes.size());
    for (int k = 0; k < fwd.trace.nb(); ++k) final_row[k] = fwd.trace.at(tg.nt, k);
    ScalarField phi = harmonic_extension(m, final_row);

    ScalarField w = fwd.u_final;
    for (std::size_t k = 0; k < w.v.size(); ++k) w.v[k] -= phi.v[k];

    const double d_w = dirichlet_form(T, w, w, Region::omega);
    const double d_phi = dirichlet_form(T, phi, phi, Region::omega);
    const double d_uT = dirichlet_form(T, fwd.u_final, fwd.u_final, Region::omega);
    const double cross = dirichlet_form(T, w, phi, Region::omega);
    const double kin_T = inner_l2(T, fwd.ut_final, fwd.ut_final, Region::omega);

    d.hd_f = hd_seminorm(T, f, Region::omega);
    d.orthogonality_rel =
        std::abs(cross) / std::max(1e-300, std::sqrt(std::max(d_w, 0.0) * std::max(d_phi, 0.0)));
    d.pythagoras_rel = std::abs(d_w - (d_uT - d_phi)) / std::max(d_uT, 1e-300);
    d.final_energy_lhs = d_w + kin_T;
    d.final_energy_rhs = d_uT + kin_T;

    const double e0 = fwd.energy_omega.front().total;
    const double eT = fwd.energy_omega.back().total;
    d.energy_ratio = e0 > 0.0 ? eT / e0 : 0.0;
    d.error_bound = std::sqrt(std::max(0.0, d.energy_ratio));

    ScalarField kf = f;
    BackwardResult back =
        backward_dirichlet_solve(m, fwd.trace, phi, ScalarField(m.grid, 0.0), EnergyLogging::none);
    for (std::size_t k = 0; k < kf.v.size(); ++k) kf.v[k] -= back.u0.v[k];
    d.k_ratio = d.hd_f > 0.0 ? hd_seminorm(T, kf, Region::omega) / d.hd_f : 0.0;
    return d;
}

}  // namespace tatrec
