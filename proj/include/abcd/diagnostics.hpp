#pragma once

#include "abcd/error.hpp"
#include "abcd/parallel.hpp"
#include "abcd/params.hpp"
#include "abcd/region_atlas.hpp"
#include "abcd/spectral.hpp"
#include "abcd/virial.hpp"
#include "abcd/weight.hpp"

#include <cmath>
#include <optional>
#include <string>
#include <vector>

namespace abcd {

// J_v(t) = (v t - lambda(t), v t + lambda(t)), lambda = t / log^2 t
struct WindowSpec {
    double v = 0.0;
    double t = 2.0;
    double lambda() const { return lambda_law(t); }
    double lo() const { return v * std::abs(t) - lambda(); }
    double hi() const { return v * std::abs(t) + lambda(); }
};

namespace detail {
inline RVec h1_density(const FieldPair& f, const Grid& g) {
    SpectralOps ops(g);
    const RVec ux = ops.deriv(f.u, 1), ex = ops.deriv(f.eta, 1);
    RVec d(f.u.size());
    for (std::size_t j = 0; j < d.size(); ++j)
        d[j] = f.u[j] * f.u[j] + ux[j] * ux[j] + f.eta[j] * f.eta[j] + ex[j] * ex[j];
    return d;
}
} // namespace detail

// sharp cutoff H1 x H1 norm over nodes lo <= x < hi
inline double window_norm(const FieldPair& f, const Grid& g, double lo, double hi) {
    if (!(lo < hi) || lo < -0.5 * g.length - 1e-12 * g.length || hi > 0.5 * g.length + 1e-12 * g.length)
        throw Error(ErrorCode::WindowOutsideGrid, "window leaves the grid");
    const RVec d = detail::h1_density(f, g);
    double s = 0;
    for (int j = 0; j < g.n; ++j) {
        const double x = g.x(j);
        if (x >= lo && x < hi) s += d[j];
    }
    return std::sqrt(s * g.dx());
}
inline double window_norm(const FieldPair& f, const Grid& g, const WindowSpec& w) {
    if (!(w.t >= 2)) throw Error(ErrorCode::BadRange, "window needs t >= 2");
    return window_norm(f, g, w.lo(), w.hi());
}

// localized weights keep 3 scale lengths inside the grid; one-sided ones need only the center inside
inline void check_weight_in_grid(const Weight& w, const Grid& g, double t) {
    const double c = w.center(t), s = w.scale(t), h = 0.5 * g.length;
    const bool localized = w.profile == Profile::Sech2 || w.profile == Profile::Sech4;
    const double m = localized ? 3 * s : s;
    if (c - m < -h || c + m > h) throw Error(ErrorCode::WindowOutsideGrid, "weight frame reaches the periodic seam");
}

// int w (u^2 + u_x^2 + eta^2 + eta_x^2)
inline double weighted_norm(const FieldPair& f, const Grid& g, const Weight& w, double t, int power = 1) {
    check_weight_in_grid(w, g, t);
    const RVec d = detail::h1_density(f, g);
    double s = 0;
    for (int j = 0; j < g.n; ++j) s += std::pow(w(g.x(j), t), power) * d[j];
    return s * g.dx();
}

inline double local_energy(const FieldPair& f, const Grid& g, const NormParams& p, const Weight& w, double t,
                           int power = 1) {
    SpectralOps ops(g);
    const RVec ux = ops.deriv(f.u, 1), ex = ops.deriv(f.eta, 1);
    double s = 0;
    for (int j = 0; j < g.n; ++j) {
        const double dens = -p.a_tilde * ux[j] * ux[j] - p.c_tilde * ex[j] * ex[j] + f.u[j] * f.u[j] +
                            f.eta[j] * f.eta[j] + f.u[j] * f.u[j] * f.eta[j];
        s += std::pow(w(g.x(j), t), power) * dens;
    }
    return 0.5 * s * g.dx();
}

// ---------------------------------------------------------------- decay report

enum class FrameKind { Cone, Exterior };

struct FrameSpec {
    FrameKind kind;
    double speed; // v for cones, sigma for exterior frames (sign picks the side)
};

struct FrameSample {
    double t, window_h1, w1, w2, eloc;
};

struct FrameSeries {
    FrameSpec spec;
    std::string id;
    std::vector<FrameSample> samples;
    std::optional<double> rejected_from; // first time the frame reached the seam
    bool decay_predicted = false;
    double ratio = 0;             // terminal / initial of w2
    double monotone_fraction = 0; // share of decreasing steps of w2 over the last half
    bool flagged = false;
};

struct DecayOptions {
    double t_min = 2.0;
    double exterior_scale = 10.0;
    double ratio_threshold = 0.5;
};

struct DecayReport {
    std::vector<FrameSeries> frames;
    bool any_flagged() const {
        for (const auto& f : frames)
            if (f.flagged) return true;
        return false;
    }
};

inline PhysParams phys_from_norm(const NormParams& n) {
    const double b = 1.0 / (3.0 * (n.a_tilde + n.c_tilde + 2.0));
    return validate_phys(n.a_tilde * b, b, n.c_tilde * b, b);
}

inline bool decay_predicted(const FrameSpec& f, const PhysParams& p) {
    const auto sc = classify(p);
    if (f.kind == FrameKind::Cone) {
        if (sc.v_max) return std::abs(f.speed) < *sc.v_max;
        if (sc.label == ScenarioLabel::ExteriorPlusOrigin_b_le_2_9) return f.speed == 0.0;
        return sc.refined && f.speed == 0.0;
    }
    const double smin = sc.sigma ? *sc.sigma : sc.exterior.sigma_min;
    return std::abs(f.speed) > smin;
}

inline std::string frame_id(const FrameSpec& f) {
    return std::string(f.kind == FrameKind::Cone ? "cone_v=" : "ext_sigma=") + fmt_double(f.speed);
}

inline FrameSeries frame_series(const Trajectory& tr, const FrameSpec& spec, const DecayOptions& opt) {
    FrameSeries fs;
    fs.spec = spec;
    fs.id = frame_id(spec);
    const Grid& g = tr.grid;
    for (const auto& s : tr.snapshots) {
        if (s.t < opt.t_min) continue;
        try {
            FrameSample smp{};
            smp.t = s.t;
            Weight w;
            if (spec.kind == FrameKind::Cone) {
                const WindowSpec ws{spec.speed, s.t};
                smp.window_h1 = window_norm(s, g, ws);
                w.profile = Profile::Sech2;
                w.v = spec.speed;
                smp.w1 = weighted_norm(s, g, w, s.t);
                w.profile = Profile::Sech4;
                smp.w2 = weighted_norm(s, g, w, s.t);
                w.profile = Profile::Sech2;
                smp.eloc = local_energy(s, g, tr.params, w, s.t);
            } else {
                const double c = spec.speed * s.t;
                w.profile = spec.speed >= 0 ? Profile::HalfOnePlusTanh : Profile::HalfOneMinusTanh;
                w.v = spec.speed;
                w.fixed_scale = opt.exterior_scale;
                smp.w1 = weighted_norm(s, g, w, s.t, 1);
                smp.w2 = weighted_norm(s, g, w, s.t, 2);
                smp.window_h1 = spec.speed >= 0 ? window_norm(s, g, c, 0.5 * g.length) : window_norm(s, g, -0.5 * g.length, c);
                smp.eloc = local_energy(s, g, tr.params, w, s.t);
            }
            fs.samples.push_back(smp);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::WindowOutsideGrid) throw;
            fs.rejected_from = s.t;
            break;
        }
    }
    if (fs.samples.size() >= 2) {
        const double first = fs.samples.front().w2, last = fs.samples.back().w2;
        fs.ratio = first > 0 ? last / first : 0.0;
        const std::size_t h = fs.samples.size() / 2;
        std::size_t dec = 0, tot = 0;
        for (std::size_t i = h + 1; i < fs.samples.size(); ++i, ++tot)
            if (fs.samples[i].w2 <= fs.samples[i - 1].w2) ++dec;
        fs.monotone_fraction = tot ? double(dec) / tot : 1.0;
    }
    return fs;
}

inline DecayReport decay_report(const Trajectory& tr, const std::vector<double>& velocities,
                                const std::vector<double>& sigmas, const DecayOptions& opt = {}) {
    std::size_t usable = 0;
    for (const auto& s : tr.snapshots)
        if (s.t >= opt.t_min) ++usable;
    if (usable < 2) throw Error(ErrorCode::TooShortTrajectory, "need at least two snapshots with t >= 2");
    std::vector<FrameSpec> specs;
    for (double v : velocities) specs.push_back({FrameKind::Cone, v});
    for (double s : sigmas) specs.push_back({FrameKind::Exterior, s});
    const auto p = phys_from_norm(tr.params);
    DecayReport r;
    r.frames.resize(specs.size());
    parallel_for(specs.size(), [&](std::size_t i) { r.frames[i] = frame_series(tr, specs[i], opt); });
    for (auto& f : r.frames) {
        f.decay_predicted = decay_predicted(f.spec, p);
        f.flagged = f.decay_predicted && f.samples.size() >= 2 && f.ratio > opt.ratio_threshold;
    }
    return r;
}

// ---------------------------------------------------------------- virial residual

struct ResidualSample {
    double t, dH_dt_fd, Q, SQ, NQ, VH, residual;
    double relative() const { return std::abs(residual) / std::max(1.0, std::abs(dH_dt_fd)); }
};

// centered difference of H from the solver flow, +-h around the state
inline double dH_dt_local(Solver& solver, const FieldPair& f, const Weight& w, double alpha, double h) {
    const Grid& g = solver.grid();
    SpecPair sp = solver.to_spec(f), sm = solver.to_spec(f);
    solver.step(sp, h);
    solver.step(sm, -h);
    const double Hp = eval_functionals(solver.to_phys(sp, f.t + h), g, w, alpha, f.t + h).H;
    const double Hm = eval_functionals(solver.to_phys(sm, f.t - h), g, w, alpha, f.t - h).H;
    return (Hp - Hm) / (2 * h);
}

struct ResidualOptions {
    bool from_snapshots = false; // difference neighbouring snapshots instead of local solver steps
    double h = 1e-4;
    bool dealias = false; // the decomposition is for the unfiltered products
};

inline std::vector<ResidualSample> virial_residual(const Trajectory& tr, double alpha, const Weight& w,
                                                   const ResidualOptions& opt = {}) {
    const auto& S = tr.snapshots;
    std::vector<ResidualSample> out;
    if (opt.from_snapshots) {
        if (S.size() < 3) throw Error(ErrorCode::TooShortTrajectory, "need three snapshots for differencing");
        for (std::size_t i = 1; i + 1 < S.size(); ++i) {
            const double Hp = eval_functionals(S[i + 1], tr.grid, w, alpha, S[i + 1].t).H;
            const double Hm = eval_functionals(S[i - 1], tr.grid, w, alpha, S[i - 1].t).H;
            const double fd = (Hp - Hm) / (S[i + 1].t - S[i - 1].t);
            const auto d = eval_decomposition(S[i], tr.grid, tr.params, w, alpha, S[i].t);
            out.push_back({S[i].t, fd, d.Q, d.SQ, d.NQ, d.VH, fd - d.total()});
        }
        return out;
    }
    if (S.empty()) throw Error(ErrorCode::TooShortTrajectory, "empty trajectory");
    out.resize(S.size());
    parallel_for(S.size(), [&](std::size_t i) {
        Solver solver(tr.grid, tr.params, opt.dealias);
        const double fd = dH_dt_local(solver, S[i], w, alpha, opt.h);
        const auto d = eval_decomposition(S[i], tr.grid, tr.params, w, alpha, S[i].t);
        out[i] = {S[i].t, fd, d.Q, d.SQ, d.NQ, d.VH, fd - d.total()};
    });
    return out;
}

} // namespace abcd
