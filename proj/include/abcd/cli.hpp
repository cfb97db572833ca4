#pragma once

#include "abcd/config.hpp"
#include "abcd/diagnostics.hpp"
#include "abcd/error.hpp"
#include "abcd/format.hpp"
#include "abcd/linear_waves.hpp"
#include "abcd/region_atlas.hpp"
#include "abcd/spectral.hpp"
#include "abcd/trajectory_io.hpp"
#include "abcd/virial.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <iostream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

namespace abcd::cli {

// JSON config: top-level keys are global options, nested objects are subcommand sections.
// A "params" object is passed through as inline JSON.
class JsonConfig : public CLI::Config {
public:
    std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

    std::vector<CLI::ConfigItem> from_config(std::istream& is) const override {
        std::stringstream ss;
        ss << is.rdbuf();
        json j;
        try {
            j = json::parse(ss.str());
        } catch (const json::exception& e) {
            throw Error(ErrorCode::ConfigError, std::string("malformed config JSON: ") + e.what());
        }
        if (!j.is_object()) throw Error(ErrorCode::ConfigError, "config must be a JSON object");
        std::vector<CLI::ConfigItem> out;
        walk(j, {}, out);
        return out;
    }

private:
    static void walk(const json& j, const std::vector<std::string>& parents, std::vector<CLI::ConfigItem>& out) {
        for (auto it = j.begin(); it != j.end(); ++it) {
            const auto& v = it.value();
            if (v.is_object() && it.key() != "params") {
                auto p = parents;
                p.push_back(it.key());
                walk(v, p, out);
                continue;
            }
            CLI::ConfigItem item;
            item.parents = parents;
            item.name = it.key();
            if (v.is_string()) item.inputs = {v.get<std::string>()};
            else if (v.is_boolean()) item.inputs = {v.get<bool>() ? "true" : "false"};
            else if (v.is_array()) {
                // one input per element; comma-list options join them back
                for (const auto& e : v) item.inputs.push_back(e.is_string() ? e.get<std::string>() : e.dump());
            } else item.inputs = {v.dump()};
            out.push_back(std::move(item));
        }
    }
};

namespace detail {

inline std::vector<double> parse_list(const std::string& s) {
    std::vector<double> v;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        try {
            v.push_back(abcd::detail::parse_num(tok));
        } catch (const Error&) {
            throw Error(ErrorCode::ConfigError, "bad number '" + tok + "' in list");
        }
    }
    return v;
}

// "<num>" or "<num>pi"
inline double parse_len(std::string s) {
    double mult = 1;
    if (s.size() > 2 && s.substr(s.size() - 2) == "pi") {
        mult = std::numbers::pi;
        s = s.substr(0, s.size() - 2);
    }
    try {
        return abcd::detail::parse_num(s) * mult;
    } catch (const Error&) {
        throw Error(ErrorCode::ConfigError, "bad length '" + s + "'");
    }
}

inline Grid parse_grid(const std::string& s) {
    const auto c = s.find(',');
    if (c == std::string::npos) throw Error(ErrorCode::ConfigError, "grid must be n,L");
    const double n = parse_len(s.substr(0, c));
    if (n != std::floor(n)) throw Error(ErrorCode::ConfigError, "grid n must be an integer");
    return Grid(static_cast<int>(n), parse_len(s.substr(c + 1)));
}

inline std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary);
    if (!f) throw Error(ErrorCode::IoError, "cannot open '" + path + "' for writing");
    return f;
}

inline bool ends_with(const std::string& s, const std::string& suf) {
    return s.size() >= suf.size() && s.compare(s.size() - suf.size(), suf.size(), suf) == 0;
}

inline json opt_json(const std::optional<double>& v) { return v ? json(*v) : json(nullptr); }

} // namespace detail

struct Options {
    std::string config;
    std::uint64_t seed = 0;

    std::string params;
    std::optional<double> v0;

    // atlas
    std::string axes = "nu-b";
    double fixed_b = 0.25;
    std::string res = "400x400";
    std::string predicates = "dispersion_like";
    std::string xrange, yrange;
    double boundary_tol = 1e-9;
    std::vector<std::string> outs;

    // waves
    double kmax = 20;
    int samples = 1001;
    bool find_zero_gv = false;

    // simulate
    std::string init = "gaussian:0.05,5";
    std::string grid = "2048,200pi";
    double dt = 0.01, T = 10.0;
    int stride = 100;
    bool no_dealias = false;
    bool physical_units = false;

    // virial-check / decay-report
    std::string traj;
    std::string alpha = "auto";
    std::string weight = "tanh";
    double v = 0.0;
    std::string scale = "lambda";
    double x0 = 0.0;
    double h = 1e-4;
    bool from_snapshots = false;
    double tol = 1e-3;
    std::optional<double> t_min;
    std::string velocities = "0";
    std::string sigmas = "1.5";
    std::string series;
    double threshold = 0.5;
    double ext_scale = 10.0;
    std::string out;
};

inline json params_json(const PhysParams& p) {
    const auto nb = to_nu_b(p);
    const auto n = normalize(p);
    return {{"a", p.a()}, {"b", p.b()}, {"c", p.c()}, {"d", p.d()}, {"theta", p.theta()},
            {"nu", nb.nu}, {"a_tilde", n.a_tilde}, {"c_tilde", n.c_tilde}};
}

inline void emit_json(const json& j, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        out << j.dump(2) << '\n';
        return;
    }
    auto f = detail::open_out(path);
    f << j.dump(2) << '\n';
}

inline int cmd_classify(const Options& o, std::ostream& out) {
    const auto p = load_params(o.params);
    const auto sc = classify(p, o.v0);
    const auto pos = positivity_certificate(p);
    const auto pw = pw_range(p);
    json j;
    j["params"] = params_json(p);
    j["label"] = to_string(sc.label);
    j["v_max"] = detail::opt_json(sc.v_max);
    j["sigma"] = detail::opt_json(sc.sigma);
    j["dispersion_like"] = sc.dispersion_like;
    j["refined"] = sc.refined;
    if (o.v0) {
        j["v0"] = *o.v0;
        j["r_sharp"] = *sc.r_sharp;
        const auto w = alpha_window(*o.v0, p);
        j["alpha_window"] = w ? json::array({w->lo, w->hi}) : json(nullptr);
    }
    j["exterior"] = {{"ellipse", sc.exterior.ellipse},
                     {"hyperbola", sc.exterior.hyperbola},
                     {"sigma_min", sc.exterior.sigma_min},
                     {"sigma_terms", sc.exterior.sigma_terms}};
    j["positivity"] = {{"lemma", to_string(pos.lemma)}, {"alpha", detail::opt_json(pos.alpha)}};
    j["pw_range"] = {{"v_min", pw.v_min}, {"v_max", pw.v_max}};
    j["zero_gv_wavenumbers"] = zero_gv_wavenumbers(p);
    emit_json(j, o.out, out);
    return 0;
}

inline int cmd_atlas(const Options& o, std::ostream& out) {
    RasterSpec spec;
    if (o.axes == "nu-b") spec.axes = Axes::NuB;
    else if (o.axes == "a-c") spec.axes = Axes::AC;
    else throw Error(ErrorCode::ConfigError, "axes must be nu-b or a-c");
    spec.fixed_b = o.fixed_b;
    if (spec.axes == Axes::AC) {
        const double lo = -o.fixed_b - 1.0 / 6.0;
        spec.x_lo = spec.y_lo = lo;
        spec.x_hi = spec.y_hi = 0.0;
    }
    auto range = [](const std::string& s, double& lo, double& hi) {
        if (s.empty()) return;
        const auto v = detail::parse_list(s);
        if (v.size() != 2) throw Error(ErrorCode::ConfigError, "range must be lo,hi");
        lo = v[0];
        hi = v[1];
    };
    range(o.xrange, spec.x_lo, spec.x_hi);
    range(o.yrange, spec.y_lo, spec.y_hi);
    const auto x = o.res.find('x');
    if (x == std::string::npos) throw Error(ErrorCode::ConfigError, "res must be NxM");
    try {
        spec.nx = std::stoi(o.res.substr(0, x));
        spec.ny = std::stoi(o.res.substr(x + 1));
    } catch (const std::exception&) {
        throw Error(ErrorCode::ConfigError, "res must be NxM");
    }
    std::stringstream ss(o.predicates);
    std::string tok;
    while (std::getline(ss, tok, ','))
        if (!tok.empty()) spec.predicates.push_back(parse_predicate(tok));
    spec.v0 = o.v0;
    spec.boundary_tol = o.boundary_tol;
    const auto map = rasterize(spec);
    if (o.outs.empty()) {
        write_csv(map, out);
        return 0;
    }
    for (const auto& path : o.outs) {
        auto f = detail::open_out(path);
        if (detail::ends_with(path, ".svg")) write_svg(map, f);
        else write_csv(map, f);
        if (!f) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
    }
    return 0;
}

inline int cmd_waves(const Options& o, std::ostream& out) {
    const auto p = load_params(o.params);
    if (o.samples < 2) throw Error(ErrorCode::ConfigError, "samples must be >= 2");
    if (!(o.kmax > 0)) throw Error(ErrorCode::ConfigError, "kmax must be positive");
    const auto t = p.triple();
    int status = 0;
    std::ostringstream csv;
    csv << "k,omega,A,group_velocity\n";
    for (int i = 0; i < o.samples; ++i) {
        const double k = o.kmax * i / (o.samples - 1);
        const auto w = wave_sample(p, k);
        // the two printed amplitude forms must agree
        const double alt = amplitude_A_alt(t, k);
        if (std::abs(w.amplitude_A - alt) > 1e-10 * std::max(1.0, std::abs(alt))) status = 1;
        csv << fmt_double(w.k) << ',' << fmt_double(w.omega) << ',' << fmt_double(w.amplitude_A) << ','
            << fmt_double(w.group_velocity) << '\n';
    }
    if (!o.out.empty()) {
        auto f = detail::open_out(o.out);
        f << csv.str();
    } else if (!o.find_zero_gv) {
        out << csv.str();
    }
    if (o.find_zero_gv) {
        const auto pw = pw_range(p);
        json j;
        j["zero_gv_wavenumbers"] = zero_gv_wavenumbers(p);
        j["pw_range"] = {{"v_min", pw.v_min}, {"v_max", pw.v_max}};
        out << j.dump(2) << '\n';
    }
    return status;
}

inline FieldPair make_init(const std::string& spec, const Grid& g, std::uint64_t seed) {
    const auto colon = spec.find(':');
    const std::string kind = spec.substr(0, colon);
    if (kind == "gaussian" || kind == "random") {
        if (colon == std::string::npos) throw Error(ErrorCode::ConfigError, "init needs parameters");
        const auto v = detail::parse_list(spec.substr(colon + 1));
        if (kind == "gaussian") {
            if (v.size() < 2 || v.size() > 3) throw Error(ErrorCode::ConfigError, "gaussian:amp,width[,center]");
            return gaussian_init(g, v[0], v[1], v.size() == 3 ? v[2] : 0.0);
        }
        if (v.size() != 2) throw Error(ErrorCode::ConfigError, "random:amp,width");
        return random_init(g, v[0], v[1], seed);
    }
    return read_initial_csv(spec, g);
}

inline int cmd_simulate(const Options& o, std::ostream& out) {
    const auto p = load_params(o.params);
    const auto np = normalize(p);
    Grid g = detail::parse_grid(o.grid);
    FieldPair init = make_init(o.init, g, o.seed);
    SolverConfig cfg{o.dt, o.T, !o.no_dealias, o.stride};
    if (o.physical_units) {
        // trajectories are always stored in normalized units
        const auto s = to_normalized(init, g, p.b());
        const double sb = std::sqrt(p.b());
        g = s.grid;
        init = s.state;
        cfg.dt /= sb;
        cfg.t_end /= sb;
    }
    const auto tr = evolve(init, g, np, cfg);
    if (!o.out.empty()) write_trajectory(o.out, tr, p);
    const double e0 = energy(tr.snapshots.front(), g, np), e1 = energy(tr.snapshots.back(), g, np);
    json j{{"snapshots", tr.snapshots.size()},
           {"t_final", tr.snapshots.back().t},
           {"energy_initial", e0},
           {"energy_final", e1},
           {"energy_rel_drift", e0 != 0 ? std::abs(e1 - e0) / std::abs(e0) : 0.0}};
    out << j.dump(2) << '\n';
    return 0;
}

inline Weight weight_from(const Options& o) {
    Weight w;
    w.profile = parse_profile(o.weight);
    w.v = o.v;
    w.x0 = o.x0;
    if (o.scale != "lambda") w.fixed_scale = detail::parse_len(o.scale);
    return w;
}

inline int cmd_virial_check(const Options& o, std::ostream& out) {
    if (o.traj.empty()) throw Error(ErrorCode::ConfigError, "--traj is required");
    auto lt = read_trajectory(o.traj);
    auto& tr = lt.traj;
    double alpha = 0.0;
    if (o.alpha == "auto") {
        const auto c = positivity_certificate(tr.params);
        alpha = c.alpha.value_or(0.0);
    } else {
        alpha = detail::parse_len(o.alpha);
    }
    const Weight w = weight_from(o);
    const double tmin = o.t_min.value_or(w.fixed_scale ? -INFINITY : 2.0);
    std::vector<FieldPair> keep;
    for (auto& s : tr.snapshots)
        if (s.t >= tmin) keep.push_back(std::move(s));
    tr.snapshots = std::move(keep);
    ResidualOptions ro;
    ro.from_snapshots = o.from_snapshots;
    ro.h = o.h;
    const auto res = virial_residual(tr, alpha, w, ro);
    std::ostringstream csv;
    csv << "t,dH_dt_fd,Q,SQ,NQ,VH,residual\n";
    double worst = 0;
    for (const auto& r : res) {
        csv << fmt_double(r.t) << ',' << fmt_double(r.dH_dt_fd) << ',' << fmt_double(r.Q) << ',' << fmt_double(r.SQ)
            << ',' << fmt_double(r.NQ) << ',' << fmt_double(r.VH) << ',' << fmt_double(r.residual) << '\n';
        worst = std::max(worst, r.relative());
    }
    if (!o.out.empty()) {
        auto f = detail::open_out(o.out);
        f << csv.str();
    } else {
        out << csv.str();
    }
    json j{{"alpha", alpha}, {"samples", res.size()}, {"max_relative_residual", worst}, {"tol", o.tol}};
    (o.out.empty() ? std::cerr : out) << j.dump(2) << '\n';
    return worst <= o.tol ? 0 : 1;
}

inline int cmd_decay_report(const Options& o, std::ostream& out) {
    if (o.traj.empty()) throw Error(ErrorCode::ConfigError, "--traj is required");
    const auto lt = read_trajectory(o.traj);
    DecayOptions opt;
    opt.ratio_threshold = o.threshold;
    opt.exterior_scale = o.ext_scale;
    if (o.t_min) opt.t_min = *o.t_min;
    const auto rep = decay_report(lt.traj, detail::parse_list(o.velocities), detail::parse_list(o.sigmas), opt);
    json j;
    j["params"] = {{"a_tilde", lt.traj.params.a_tilde}, {"c_tilde", lt.traj.params.c_tilde}};
    j["frames"] = json::array();
    std::ostringstream csv;
    csv << "t,frame_id,window_h1,sech2,sech4,eloc\n";
    for (const auto& f : rep.frames) {
        j["frames"].push_back({{"id", f.id},
                               {"kind", f.spec.kind == FrameKind::Cone ? "cone" : "exterior"},
                               {"speed", f.spec.speed},
                               {"samples", f.samples.size()},
                               {"rejected_from", detail::opt_json(f.rejected_from)},
                               {"decay_predicted", f.decay_predicted},
                               {"ratio", f.ratio},
                               {"monotone_fraction", f.monotone_fraction},
                               {"flagged", f.flagged}});
        for (const auto& s : f.samples)
            csv << fmt_double(s.t) << ',' << f.id << ',' << fmt_double(s.window_h1) << ',' << fmt_double(s.w1) << ','
                << fmt_double(s.w2) << ',' << fmt_double(s.eloc) << '\n';
    }
    j["any_flagged"] = rep.any_flagged();
    emit_json(j, o.out, out);
    if (!o.series.empty()) {
        auto f = detail::open_out(o.series);
        f << csv.str();
    }
    return rep.any_flagged() ? 1 : 0;
}

// parse and dispatch; returns the process exit status
inline int run(int argc, const char* const* argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
    CLI::App app{"abcd_lab: numerical laboratory for the Hamiltonian abcd Boussinesq system"};
    app.config_formatter(std::make_shared<JsonConfig>());
    app.set_config("--config", "", "JSON config file (flags override it)");
    app.require_subcommand(1);
    app.fallthrough();
    Options o;
    auto list = [](CLI::Option* opt) { opt->delimiter(',')->multi_option_policy(CLI::MultiOptionPolicy::Join); };
    app.add_option("--seed", o.seed, "seed for random initial data");

    auto* classify_cmd = app.add_subcommand("classify", "classify a parameter triple");
    classify_cmd->add_option("--params", o.params, "params JSON file or inline JSON")->required();
    classify_cmd->add_option("--v0", o.v0, "v0 in (0,1) for the uniform-cone checks");
    classify_cmd->add_option("--out", o.out, "write JSON here instead of stdout");

    auto* atlas = app.add_subcommand("atlas", "rasterize region predicates");
    atlas->add_option("--axes", o.axes, "nu-b or a-c");
    atlas->add_option("--b", o.fixed_b, "fixed b for a-c axes");
    atlas->add_option("--res", o.res, "NxM resolution");
    list(atlas->add_option("--predicates", o.predicates,
                           "comma list of dispersion_like,refined,r_sharp,ellipse,hyperbola,obstruction"));
    atlas->add_option("--v0", o.v0, "v0 for r_sharp");
    list(atlas->add_option("--xrange", o.xrange, "lo,hi"));
    list(atlas->add_option("--yrange", o.yrange, "lo,hi"));
    atlas->add_option("--boundary-tol", o.boundary_tol, "slack for the boundary flag");
    atlas->add_option("--out", o.outs, "output .svg or .csv (repeatable)");

    auto* waves = app.add_subcommand("waves", "dispersion relation and group velocity");
    waves->add_option("--params", o.params, "params JSON file or inline JSON")->required();
    waves->add_option("--kmax", o.kmax, "largest sampled wavenumber");
    waves->add_option("--samples", o.samples, "number of samples");
    waves->add_option("--out", o.out, "CSV output");
    waves->add_flag("--find-zero-gv", o.find_zero_gv, "print zero group velocity wavenumbers as JSON");

    auto* sim = app.add_subcommand("simulate", "evolve the normalized system");
    sim->add_option("--params", o.params, "params JSON file or inline JSON")->required();
    sim->add_option("--init", o.init, "gaussian:amp,width[,center] | random:amp,width | file.csv");
    list(sim->add_option("--grid", o.grid, "n,L (L may end in pi)"));
    sim->add_option("--dt", o.dt, "time step");
    sim->add_option("--T", o.T, "final time");
    sim->add_option("--stride", o.stride, "snapshot every stride steps");
    sim->add_flag("--no-dealias", o.no_dealias, "disable the 2/3 rule");
    sim->add_flag("--physical-units", o.physical_units, "grid, dt and T are in physical units");
    sim->add_option("--out", o.out, "trajectory CSV");

    auto* vc = app.add_subcommand("virial-check", "compare dH/dt with Q+SQ+NQ+VH");
    vc->add_option("--traj", o.traj, "trajectory file")->required();
    vc->add_option("--alpha", o.alpha, "auto or a number");
    vc->add_option("--weight", o.weight, "tanh or sech2");
    vc->add_option("--v", o.v, "weight center velocity");
    vc->add_option("--scale", o.scale, "lambda or a fixed scale");
    vc->add_option("--x0", o.x0, "weight center offset");
    vc->add_option("--fd-step", o.h, "finite difference step");
    vc->add_flag("--from-snapshots", o.from_snapshots, "difference neighbouring snapshots");
    vc->add_option("--tol", o.tol, "relative residual tolerance");
    vc->add_option("--t-min", o.t_min, "skip snapshots before this time");
    vc->add_option("--out", o.out, "residual CSV");

    auto* dr = app.add_subcommand("decay-report", "windowed and weighted norms along a trajectory");
    dr->add_option("--traj", o.traj, "trajectory file")->required();
    list(dr->add_option("--velocities", o.velocities, "cone velocities, comma list"));
    list(dr->add_option("--sigma", o.sigmas, "exterior frame speeds, comma list"));
    dr->add_option("--threshold", o.threshold, "terminal/initial ratio above which a predicted decay is flagged");
    dr->add_option("--ext-scale", o.ext_scale, "exterior weight scale L");
    dr->add_option("--t-min", o.t_min, "first time used");
    dr->add_option("--out", o.out, "report JSON");
    dr->add_option("--series", o.series, "series CSV");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        out << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return 2;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    }

    try {
        if (classify_cmd->parsed()) return cmd_classify(o, out);
        if (atlas->parsed()) return cmd_atlas(o, out);
        if (waves->parsed()) return cmd_waves(o, out);
        if (sim->parsed()) return cmd_simulate(o, out);
        if (vc->parsed()) return cmd_virial_check(o, out);
        if (dr->parsed()) return cmd_decay_report(o, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return exit_code(e.code());
    } catch (const json::exception& e) {
        err << "error: ConfigError: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return 4;
    }
    return 2;
}

} // namespace abcd::cli
