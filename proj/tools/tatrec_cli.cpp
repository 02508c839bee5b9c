// Command-line front end for the reconstruction library.  Every subcommand
// reads a `key = value` config (files plus --set overrides), validates the
// key set, runs one pipeline stage, and writes its outputs atomically.
// Identical configs produce byte-identical outputs.

#include <filesystem>
#include <iostream>
#include <optional>
#include <set>
#include <string>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "CLI11.hpp"
#include "json.hpp"

#include "tatrec/config.hpp"
#include "tatrec/distance.hpp"
#include "tatrec/elliptic.hpp"
#include "tatrec/errors.hpp"
#include "tatrec/io.hpp"
#include "tatrec/measurement.hpp"
#include "tatrec/phantoms.hpp"
#include "tatrec/rays.hpp"
#include "tatrec/reconstruct.hpp"
#include "tatrec/wave.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;
using namespace tatrec;

namespace {

const std::set<std::string> kGridKeys = {"grid.nx", "grid.ny", "grid.pad", "grid.extent_x",
                                         "grid.extent_y"};

std::set<std::string> with_grid(std::set<std::string> keys) {
    keys.insert(kGridKeys.begin(), kGridKeys.end());
    return keys;
}

Grid grid_from(const Config& c) {
    const int nx = c.get_int("grid.nx", 0);
    const int ny = c.get_int("grid.ny", nx);
    const int pad = c.get_int("grid.pad", 0);
    if (nx < 2 || ny < 2) throw std::invalid_argument("grid.nx/grid.ny must be >= 2");
    if (pad < 0) throw std::invalid_argument("grid.pad must be >= 0");
    const double ex = c.get_double("grid.extent_x", 1.0);
    const double ey = c.get_double("grid.extent_y", ex);
    if (!(ex > 0.0) || !(ey > 0.0))
        throw std::invalid_argument("grid.extent_x/grid.extent_y must be positive");
    return Grid::padded(nx, ny, ex / (nx - 1), ey / (ny - 1), pad);
}

PhantomParams phantom_params_from(const Config& c) {
    PhantomParams p;
    p.kind = phantom_kind_from(c.get_str("phantom.kind", "gaussians"));
    p.seed = c.get_u64("phantom.seed", 1);
    p.count = c.get_int("phantom.count", 3);
    p.bar_angle = c.get_double("phantom.bar_angle", 0.0);
    p.bar_width = c.get_double("phantom.bar_width", 0.0);
    p.bar_spacing = c.get_double("phantom.bar_spacing", 0.0);
    return p;
}

MediumParams medium_params_from(const Config& c) {
    MediumParams p;
    p.kind = medium_kind_from(c.get_str("medium.kind", "constant"));
    p.c0 = c.get_double("medium.c0", p.c0);
    p.amp = c.get_double("medium.amp", p.amp);
    p.amp2 = c.get_double("medium.amp2", p.amp2);
    p.radius_frac = c.get_double("medium.radius_frac", p.radius_frac);
    p.radius2_frac = c.get_double("medium.radius2_frac", p.radius2_frac);
    p.cx_frac = c.get_double("medium.cx_frac", p.cx_frac);
    p.cy_frac = c.get_double("medium.cy_frac", p.cy_frac);
    p.cx2_frac = c.get_double("medium.cx2_frac", p.cx2_frac);
    p.cy2_frac = c.get_double("medium.cy2_frac", p.cy2_frac);
    p.seed = c.get_u64("medium.seed", 1);
    p.modes = c.get_int("medium.modes", p.modes);
    p.q_amp = c.get_double("medium.q_amp", 0.0);
    return p;
}

MeasurementSet gset_from(const Config& c, const Grid& g) {
    const auto specs = c.get_all("gset.arcs");
    if (!specs.empty()) {
        if (c.has("gset.full_s"))
            throw std::invalid_argument("give either gset.arcs or gset.full_s, not both");
        std::vector<Arc> arcs;
        arcs.reserve(specs.size());
        for (const auto& s : specs) arcs.push_back(Arc::parse(s));
        return MeasurementSet::from_arcs(g, std::move(arcs));
    }
    if (c.has("gset.full_s")) return MeasurementSet::full_boundary(g, c.get_double("gset.full_s", 0.0));
    throw std::invalid_argument("observed set unspecified: set gset.arcs or gset.full_s");
}

Medium medium_in(const Config& c) { return io::read_medium(c.require_str("in.medium")); }

BoundaryTrace trace_in(const Config& c, const Grid& g) {
    BoundaryTrace t = io::read_trace(c.require_str("in.trace"));
    t.require_layout(g, "in.trace");
    return t;
}

json grid_json(const Grid& g) {
    return {{"nx", g.nx},       {"ny", g.ny},       {"dx", g.dx},
            {"dy", g.dy},       {"ox", g.ox},       {"oy", g.oy},
            {"omega", {{"ilo", g.omega.ilo}, {"jlo", g.omega.jlo}, {"ihi", g.omega.ihi},
                       {"jhi", g.omega.jhi}}}};
}

json field_json(const ScalarField& f) {
    double lo = f.v[0], hi = f.v[0];
    for (double v : f.v) {
        lo = std::min(lo, v);
        hi = std::max(hi, v);
    }
    return {{"min", lo}, {"max", hi}, {"linf", f.linf()}};
}

std::vector<std::string> echo_lines(const Config& c) {
    std::vector<std::string> lines;
    std::istringstream is(c.echo());
    std::string line;
    while (std::getline(is, line)) lines.push_back(line);
    return lines;
}

// Outputs are collected so the success line lists every file written.
struct Sink {
    const Config& cfg;
    std::vector<std::string> written;

    std::optional<std::string> path(const std::string& key) {
        if (!cfg.has(key)) return std::nullopt;
        return cfg.last(key);
    }
    void note(const std::string& p) { written.push_back(p); }
    void field(const std::string& key, const ScalarField& f) {
        if (auto p = path(key)) {
            io::write_f64f(*p, f);
            note(*p);
        }
    }
    void image(const std::string& key, const ScalarField& f) {
        if (auto p = path(key)) {
            io::write_pgm(*p, f);
            note(*p);
        }
    }
    void report(const std::string& key, json j) {
        j["config"] = echo_lines(cfg);
        if (auto p = path(key)) {
            io::atomic_write(*p, [&](std::ostream& os) { os << j.dump(2) << '\n'; });
            note(*p);
        }
    }
};

// --- subcommands -----------------------------------------------------------

int run_phantom(const Config& c, Sink& out) {
    c.require_known(with_grid({"phantom.kind", "phantom.seed", "phantom.count",
                               "phantom.bar_angle", "phantom.bar_width", "phantom.bar_spacing",
                               "phantom.margin", "out.field", "out.image", "out.report"}));
    const Grid g = grid_from(c);
    const int margin = c.get_int("phantom.margin", 4);
    const ScalarField f = make_phantom(g, g.omega.shrunk(margin), phantom_params_from(c));
    c.require_str("out.field");
    out.field("out.field", f);
    out.image("out.image", f);
    out.report("out.report", {{"grid", grid_json(g)}, {"field", field_json(f)}});
    return 0;
}

int run_medium(const Config& c, Sink& out) {
    c.require_known(with_grid({"medium.kind", "medium.c0", "medium.amp", "medium.amp2",
                               "medium.radius_frac", "medium.radius2_frac", "medium.cx_frac",
                               "medium.cy_frac", "medium.cx2_frac", "medium.cy2_frac",
                               "medium.seed", "medium.modes", "medium.q_amp", "out.medium",
                               "out.image", "out.report"}));
    const Grid g = grid_from(c);
    const Medium m = make_medium(g, medium_params_from(c));
    const std::string p = c.require_str("out.medium");
    io::write_medium(p, m);
    out.note(p);
    out.image("out.image", m.c);
    out.report("out.report", {{"grid", grid_json(g)},
                              {"c_min", m.c_min()},
                              {"c_max", m.c_max()},
                              {"cfl_limit", cfl_limit(m)}});
    return 0;
}

int run_simulate(const Config& c, Sink& out) {
    c.require_known({"in.medium", "in.phantom", "solve.t_final", "solve.cfl_safety",
                     "solve.dt_max", "solve.energy_log", "out.trace", "out.energy", "out.final",
                     "out.final_ut", "out.report"});
    const Medium m = medium_in(c);
    const ScalarField f =
        io::bind_field(io::read_f64f(c.require_str("in.phantom")), m.grid, "in.phantom");

    const double T = c.get_double("solve.t_final", 0.0);
    if (!(T > 0.0)) throw std::invalid_argument("solve.t_final must be positive");
    const double safety = c.get_double("solve.cfl_safety", 0.9);
    double dt_max = cfl_dt(m, safety).dt;
    if (c.has("solve.dt_max")) dt_max = c.get_double("solve.dt_max", dt_max);
    const TimeGrid tg = make_time_grid(T, dt_max);

    ForwardOptions fo;
    const std::string log = c.get_str("solve.energy_log", "endpoints");
    if (log == "none")
        fo.log = EnergyLogging::none;
    else if (log == "endpoints")
        fo.log = EnergyLogging::endpoints;
    else if (log == "every_step")
        fo.log = EnergyLogging::every_step;
    else
        throw std::invalid_argument("solve.energy_log: unknown mode '" + log + "'");

    const ForwardResult fr = forward_solve(m, f, tg, fo);

    const std::string p = c.require_str("out.trace");
    io::write_trace(p, fr.trace);
    out.note(p);
    if (auto ep = out.path("out.energy")) {
        std::vector<EnergyReport> rows = fr.energy_omega;
        rows.insert(rows.end(), fr.energy_full.begin(), fr.energy_full.end());
        io::write_energy_csv(*ep, rows);
        out.note(*ep);
    }
    out.field("out.final", fr.u_final);
    out.field("out.final_ut", fr.ut_final);

    json j = {{"grid", grid_json(m.grid)},
              {"time", {{"nt", tg.nt}, {"dt", tg.dt}, {"t_final", tg.T()}}},
              {"trace_max_abs", fr.trace.max_abs()}};
    if (!fr.energy_omega.empty()) {
        j["energy_omega_initial"] = fr.energy_omega.front().total;
        j["energy_omega_final"] = fr.energy_omega.back().total;
    }
    out.report("out.report", j);
    return 0;
}

json iterates_json(const ReconstructionReport& rep) {
    json rows = json::array();
    for (const auto& it : rep.iterates)
        rows.push_back({{"k", it.k},
                        {"update_norm", it.update_norm},
                        {"rel_update", it.rel_update},
                        {"update_ratio", it.update_ratio},
                        {"err_hd", it.err_hd},
                        {"energy_ratio", it.energy_ratio},
                        {"cg_iterations", it.cg_iterations}});
    return rows;
}

int run_reconstruct(const Config& c, Sink& out, bool one_shot_only) {
    c.require_known({"in.medium", "in.trace", "in.truth", "recon.method", "recon.iters",
                     "recon.tol", "recon.divergence_growth", "recon.stall_ratio", "recon.cutoff",
                     "gset.arcs", "gset.full_s", "out.field", "out.image", "out.report"});
    const Medium m = medium_in(c);
    const BoundaryTrace trace = trace_in(c, m.grid);
    const std::string method = c.get_str("recon.method", one_shot_only ? "modified" : "neumann");
    c.require_str("out.field");

    json j = {{"grid", grid_json(m.grid)}, {"method", method}};

    if (method == "modified" || method == "naive") {
        ScalarField f(m.grid);
        std::vector<std::string> warnings;
        if (method == "modified") {
            CgInfo cg;
            f = pseudo_inverse_A(m, trace, &cg, &warnings);
            j["cg_iterations"] = cg.iterations;
            j["cg_rel_residual"] = cg.rel_residual;
        } else {
            f = naive_time_reversal_A0(m, trace, c.get_double("recon.cutoff", 0.1), &warnings);
        }
        j["warnings"] = warnings;
        j["field"] = field_json(f);
        out.field("out.field", f);
        out.image("out.image", f);
        out.report("out.report", j);
        return 0;
    }
    if (method != "neumann" || one_shot_only)
        throw std::invalid_argument("recon.method: unknown method '" + method + "'");

    NeumannOptions opts;
    opts.max_iter = c.get_int("recon.iters", opts.max_iter);
    opts.rel_update_tol = c.get_double("recon.tol", opts.rel_update_tol);
    opts.divergence_growth = c.get_double("recon.divergence_growth", opts.divergence_growth);
    opts.stall_ratio = c.get_double("recon.stall_ratio", opts.stall_ratio);
    ScalarField truth(m.grid);
    if (c.has("in.truth")) {
        truth = io::bind_field(io::read_f64f(c.last("in.truth")), m.grid, "in.truth");
        opts.ground_truth = &truth;
    }

    std::pair<ScalarField, ReconstructionReport> res =
        (c.has("gset.arcs") || c.has("gset.full_s"))
            ? masked_reconstruct(m, trace, gset_from(c, m.grid), opts)
            : neumann_reconstruct(m, trace, opts);

    j["status"] = recon_status_name(res.second.status);
    j["iterates"] = iterates_json(res.second);
    j["energy_ratio"] = res.second.energy_ratio;
    j["final_rel_update"] = res.second.final_rel_update;
    j["final_err_hd"] = res.second.final_err_hd;
    j["field"] = field_json(res.first);
    out.field("out.field", res.first);
    out.image("out.image", res.first);
    out.report("out.report", j);

    if (res.second.status == ReconStatus::diverged) {
        std::cerr << json{{"error", "numeric"}, {"what", "reconstruction diverged"}}.dump()
                  << '\n';
        return 2;
    }
    return 0;
}

int run_rays(const Config& c, Sink& out) {
    c.require_known({"in.medium", "rays.n_boundary", "rays.n_directions", "rays.max_time",
                     "rays.step_scale", "rays.x", "rays.y", "rays.theta", "out.report",
                     "out.path"});
    const Medium m = medium_in(c);
    TraceOptions topt;
    topt.step_scale = c.get_double("rays.step_scale", topt.step_scale);
    const double max_time = c.get_double("rays.max_time", 0.0);

    const DomainTimeResult dom = domain_T(m, c.get_int("rays.n_boundary", 256),
                                          c.get_int("rays.n_directions", 64), max_time, topt);
    json j = {{"grid", grid_json(m.grid)},
              {"domain_T", dom.T},
              {"any_trapped", dom.any_trapped},
              {"n_rays", dom.n_rays},
              {"n_trapped", dom.n_trapped},
              {"argmax", {{"x", dom.argmax.x}, {"y", dom.argmax.y}, {"xi_x", dom.argmax.xi_x},
                          {"xi_y", dom.argmax.xi_y}}}};

    if (c.has("rays.x") || c.has("rays.y") || c.has("rays.theta")) {
        GeodesicTracer tr(m);
        TraceOptions single = topt;
        single.record_path = c.has("out.path");
        const PhasePoint start = tr.at_angle(c.get_double("rays.x", 0.0),
                                             c.get_double("rays.y", 0.0),
                                             c.get_double("rays.theta", 0.0));
        const double budget = max_time > 0.0 ? max_time : default_ray_budget(m);
        const RayResult ray = tr.trace(start, budget, +1, single);
        j["ray"] = {{"trapped", ray.trapped},
                    {"t_exit", ray.t_exit},
                    {"exit", {{"x", ray.exit.x}, {"y", ray.exit.y}}},
                    {"h_drift", ray.h_drift}};
        if (auto p = out.path("out.path")) {
            io::atomic_write(*p, [&](std::ostream& os) {
                os << "t,x,y,xi_x,xi_y\n";
                for (const auto& s : ray.path)
                    os << io::fmt(s.t) << ',' << io::fmt(s.x) << ',' << io::fmt(s.y) << ','
                       << io::fmt(s.xi_x) << ',' << io::fmt(s.xi_y) << '\n';
            });
            out.note(*p);
        }
    }
    c.require_str("out.report");
    out.report("out.report", j);
    return 0;
}

int run_visibility(const Config& c, Sink& out) {
    c.require_known({"in.medium", "gset.arcs", "gset.full_s", "vis.n_directions", "vis.delta",
                     "vis.stride", "vis.max_time", "vis.margin", "out.map", "out.pass",
                     "out.report"});
    c.require_str("out.report");
    const Medium m = medium_in(c);
    const MeasurementSet ms = gset_from(c, m.grid);
    const int margin = c.get_int("vis.margin", 0);
    const IndexRect K = m.grid.omega.shrunk(margin);
    if (!K.valid()) throw std::invalid_argument("vis.margin leaves an empty region");
    const int ndir = c.get_int("vis.n_directions", 16);
    const int stride = c.get_int("vis.stride", 1);
    const double max_time = c.get_double("vis.max_time", 0.0);

    const StabilityMap st = stability_condition_map(m, ms, K, ndir,
                                                    c.get_double("vis.delta", 1e-3), stride,
                                                    max_time);
    const UniquenessResult uq = uniqueness_condition_check(m, ms, K);

    json fails = json::array();
    for (const auto& fd : st.failures)
        fails.push_back({{"i", fd.i}, {"j", fd.j}, {"theta", fd.theta},
                         {"chi_plus", fd.chi_plus}, {"chi_minus", fd.chi_minus}});
    out.report("out.report",
               {{"grid", grid_json(m.grid)},
                {"region", {{"ilo", K.ilo}, {"jlo", K.jlo}, {"ihi", K.ihi}, {"jhi", K.jhi}}},
                {"stability", {{"verdict", st.verdict},
                               {"checked_nodes", st.checked_nodes},
                               {"failing_nodes", st.failing_nodes},
                               {"failures", fails}}},
                {"uniqueness", {{"verdict", uq.verdict},
                                {"unmarked_count", uq.unmarked_count},
                                {"margin", uq.margin}}}});
    if (c.has("out.map"))
        out.image("out.map", visibility_average_map(m, ms, K, ndir, stride, max_time));
    out.image("out.pass", st.pass);
    return 0;
}

int run_report(const Config& c, Sink& out) {
    c.require_known({"in.field", "in.medium", "in.trace", "out.report", "out.image"});
    json j;
    if (c.has("in.field")) {
        const io::RawField r = io::read_f64f(c.last("in.field"));
        const Grid g(r.nx, r.ny, r.dx, r.dy, r.ox, r.oy,
                     IndexRect{1, 1, r.nx - 2, r.ny - 2});
        ScalarField f(g);
        f.v = r.data;
        j["field"] = field_json(f);
        j["field"]["nx"] = r.nx;
        j["field"]["ny"] = r.ny;
        out.image("out.image", f);
    }
    if (c.has("in.medium")) {
        const Medium m = io::read_medium(c.last("in.medium"));
        j["medium"] = {{"grid", grid_json(m.grid)},
                       {"c_min", m.c_min()},
                       {"c_max", m.c_max()},
                       {"cfl_limit", cfl_limit(m)}};
    }
    if (c.has("in.trace")) {
        const BoundaryTrace t = io::read_trace(c.last("in.trace"));
        j["trace"] = {{"nt", t.time.nt},
                      {"dt", t.time.dt},
                      {"t_final", t.time.T()},
                      {"nb", t.nb()},
                      {"max_abs", t.max_abs()}};
    }
    if (j.empty()) throw std::invalid_argument("report: give in.field, in.medium, or in.trace");
    c.require_str("out.report");
    out.report("out.report", j);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"thermoacoustic wave simulation and time-reversal reconstruction"};
    app.require_subcommand(1);

    std::vector<std::string> config_files, overrides;
    int threads = 0;
    std::string method_flag;
    int iters_flag = 0;

    CLI::App* sub_phantom = app.add_subcommand("phantom", "generate an initial pressure field");
    CLI::App* sub_medium = app.add_subcommand("medium", "generate an acoustic medium");
    CLI::App* sub_simulate = app.add_subcommand("simulate", "forward wave solve to a boundary trace");
    CLI::App* sub_reconstruct = app.add_subcommand("reconstruct", "iterative reconstruction from a trace");
    CLI::App* sub_timereverse = app.add_subcommand("timereverse", "one-shot time reversal of a trace");
    CLI::App* sub_rays = app.add_subcommand("rays", "geodesic transit diagnostics");
    CLI::App* sub_visibility = app.add_subcommand("visibility", "stability and uniqueness maps");
    CLI::App* sub_report = app.add_subcommand("report", "summarize saved artifacts");

    for (CLI::App* s : {sub_phantom, sub_medium, sub_simulate, sub_reconstruct, sub_timereverse,
                        sub_rays, sub_visibility, sub_report}) {
        s->add_option("--config", config_files, "config file, repeatable");
        s->add_option("--set", overrides, "'key = value' override, repeatable");
        s->add_option("--threads", threads, "worker thread cap");
    }
    sub_reconstruct->add_option("--method", method_flag, "neumann | modified | naive");
    sub_reconstruct->add_option("--iters", iters_flag, "iteration cap");
    sub_timereverse->add_option("--method", method_flag, "modified | naive");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help
        std::cerr << json{{"error", "validation"}, {"what", e.what()}}.dump() << '\n';
        return 1;
    }

    try {
        Config cfg;
        for (const auto& path : config_files) {
            const Config part = Config::from_file(path);
            for (const auto& [k, vs] : part.values)
                for (const auto& v : vs) cfg.values[k].push_back(v);
        }
        for (const auto& kv : overrides) cfg.apply_override(kv);
        if (!method_flag.empty()) cfg.apply_override("recon.method = " + method_flag);
        if (iters_flag > 0) cfg.apply_override("recon.iters = " + std::to_string(iters_flag));

#ifdef _OPENMP
        if (threads > 0) omp_set_num_threads(threads);
#else
        (void)threads;
#endif

        Sink out{cfg, {}};
        int rc = 0;
        if (sub_phantom->parsed()) rc = run_phantom(cfg, out);
        else if (sub_medium->parsed()) rc = run_medium(cfg, out);
        else if (sub_simulate->parsed()) rc = run_simulate(cfg, out);
        else if (sub_reconstruct->parsed()) rc = run_reconstruct(cfg, out, false);
        else if (sub_timereverse->parsed()) rc = run_reconstruct(cfg, out, true);
        else if (sub_rays->parsed()) rc = run_rays(cfg, out);
        else if (sub_visibility->parsed()) rc = run_visibility(cfg, out);
        else if (sub_report->parsed()) rc = run_report(cfg, out);

        std::cout << json{{"ok", rc == 0}, {"outputs", out.written}}.dump() << '\n';
        return rc;
    } catch (const NumericError& e) {
        std::cerr << json{{"error", "numeric"}, {"what", e.what()}}.dump() << '\n';
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << json{{"error", "validation"}, {"what", e.what()}}.dump() << '\n';
        return 1;
    } catch (const std::exception& e) {
        std::cerr << json{{"error", "validation"}, {"what", e.what()}}.dump() << '\n';
        return 1;
    }
}
