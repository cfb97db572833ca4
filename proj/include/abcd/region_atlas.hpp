#pragma once

#include "abcd/error.hpp"
#include "abcd/format.hpp"
#include "abcd/parallel.hpp"
#include "abcd/params.hpp"

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace abcd {

// Inequalities as printed. A guard of a few ulps keeps rational boundary
// points entered as doubles on the boundary; slack > 0 loosens, < 0 tightens.
namespace ineq {
inline double guard(double l, double r) {
    return 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(l) + std::abs(r));
}
inline bool lt(double l, double r, double slack = 0.0) { return l < r - guard(l, r) + slack; }
inline bool le(double l, double r, double slack = 0.0) { return l <= r + guard(l, r) + slack; }
inline bool gt(double l, double r, double slack = 0.0) { return lt(r, l, slack); }
inline bool ge(double l, double r, double slack = 0.0) { return le(r, l, slack); }
} // namespace ineq

inline const double kRefinedBreak = (19.0 + std::sqrt(181.0)) / 90.0;
inline const double kKappaCrit = (2.0 - std::sqrt(3.0)) / 3.0;
inline const double kBCrit = (3.0 + std::sqrt(3.0)) / 12.0;

inline bool is_dispersion_like(const Triple& t, double slack = 0.0) {
    const double lhs = 3.0 * t.b * (t.a + t.c) + 2.0 * t.b * t.b;
    return ineq::lt(lhs, 8.0 * t.a * t.c, slack);
}
inline bool is_dispersion_like(const PhysParams& p) { return is_dispersion_like(p.triple()); }

namespace detail {
// s is the smaller normalized coefficient, o the other one
inline bool refined_branch(double s, double o, double lower, double slack) {
    const double K = kRefinedBreak;
    if (s >= lower && s < -K) return ineq::gt(45.0 * s * o, 1.0 - o, slack);
    if (s >= -K && s < -1.0 / 3.0) return ineq::gt(18.0 * s * o + s + o, 0.0, slack);
    if (s >= -1.0 / 3.0 && s < -1.0 / 9.0) return ineq::gt(27.0 * s * o, 6.0 * o + 1.0, slack);
    return false;
}
} // namespace detail

inline bool is_refined_dispersion_like(const Triple& t, double slack = 0.0) {
    if (is_dispersion_like(t, slack)) return true;
    const double at = t.a / t.b, ct = t.c / t.b;
    bool ok = false;
    if (ct <= at && at < 0.0) ok = ok || detail::refined_branch(ct, at, -1.0, slack);
    if (at <= ct && ct < 0.0) ok = ok || detail::refined_branch(at, ct, -1.0 - 1.0 / (6.0 * t.b), slack);
    return ok;
}
inline bool is_refined_dispersion_like(const PhysParams& p) { return is_refined_dispersion_like(p.triple()); }

struct KappaScales {
    double v0, v0_plus, kappa0, b0, b1;
    std::optional<double> b2;
};

inline KappaScales kappa_scales(double v0) {
    if (!(v0 > 0.0 && v0 < 1.0)) throw Error(ErrorCode::V0OutOfRange, "v0 must lie in (0,1)");
    KappaScales k{};
    k.v0 = v0;
    k.v0_plus = (1.0 + v0) / 2.0;
    k.kappa0 = (1.0 - v0) / 4.0;
    k.b0 = 1.0 / (9.0 * k.kappa0);
    k.b1 = 1.0 / (2.0 * (2.0 * k.kappa0 + 1.0));
    if (k.kappa0 < kKappaCrit) {
        const double q = k.kappa0;
        k.b2 = 1.0 / (5.0 * q + 2.0 - std::sqrt((2 * q + 1) * (2 * q + 1) - 6 * q) -
                      std::sqrt((3 * q + 1) * (3 * q + 1) - 18 * q));
    }
    return k;
}

struct Thresholds {
    double r_minus, r_plus, rt_minus, rt_plus;
    std::optional<double> s_minus, s_plus, st_minus, st_plus;
};

inline Thresholds thresholds(double kappa0, double b) {
    if (!(kappa0 > 0.0 && kappa0 < 0.25))
        throw Error(ErrorCode::KappaOutOfRange, "kappa0 must lie in (0,1/4)");
    if (!(b > 1.0 / 6.0)) throw Error(ErrorCode::BTooSmall, "thresholds need b > 1/6");
    const double q = kappa0;
    const double s1 = std::sqrt((2 * q + 1) * (2 * q + 1) - 6 * q);
    Thresholds t{};
    t.r_minus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(2 * q + 1) - s1);
    t.r_plus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(2 * q + 1) + s1);
    t.rt_minus = 2.0 / 3.0 * b * ((2 * q + 1) - s1);
    t.rt_plus = 2.0 / 3.0 * b * ((2 * q + 1) + s1);
    if (q < kKappaCrit) {
        const double s2 = std::sqrt((3 * q + 1) * (3 * q + 1) - 18 * q);
        t.s_minus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(3 * q + 1) - s2);
        t.s_plus = 2.0 / 3.0 + 2.0 / 3.0 * b * (-(3 * q + 1) + s2);
        t.st_minus = 2.0 / 3.0 * b * ((3 * q + 1) - s2);
        t.st_plus = 2.0 / 3.0 * b * ((3 * q + 1) + s2);
    }
    return t;
}

struct BarBounds {
    double A2, A3, A4, B2, B3, B4;
    double min_A, max_B;
    int min_A_index, max_B_index; // 2, 3 or 4 as selected by the branch tables
};

inline BarBounds bar_bounds(double kappa0, double nu, double b) {
    const double q = kappa0;
    BarBounds r{};
    r.A2 = 3 * q + (3 * nu - 2) / (4 * b);
    r.A3 = (18 * q * b + 2 * (3 * nu - 2)) / (12 * b + 3 * nu - 2);
    r.A4 = (12 * q * b + 3 * nu - 2) / (12 * b + 2 * (3 * nu - 2));
    r.B2 = 3 * nu / (4 * b) - 3 * q;
    r.B3 = (2 * nu - 6 * q * b) / (4 * b - nu);
    r.B4 = (nu - 4 * q * b) / (4 * b - 2 * nu);

    const auto th = thresholds(kappa0, b);
    if (nu <= th.r_minus || nu >= th.r_plus)
        r.min_A_index = 4;
    else if (th.s_minus && nu >= *th.s_minus && nu <= *th.s_plus)
        r.min_A_index = 2;
    else
        r.min_A_index = 3;
    if (nu <= th.rt_minus || nu >= th.rt_plus)
        r.max_B_index = 4;
    else if (th.st_minus && nu >= *th.st_minus && nu <= *th.st_plus)
        r.max_B_index = 2;
    else
        r.max_B_index = 3;
    const double A[] = {r.A2, r.A3, r.A4}, B[] = {r.B2, r.B3, r.B4};
    r.min_A = A[r.min_A_index - 2];
    r.max_B = B[r.max_B_index - 2];
    return r;
}

struct AlphaWindow {
    double lo, hi;
    double mid() const { return 0.5 * (lo + hi); }
};

inline std::optional<AlphaWindow> alpha_window(double v0, const PhysParams& p) {
    const auto k = kappa_scales(v0);
    const auto nb = to_nu_b(p);
    const auto bb = bar_bounds(k.kappa0, nb.nu, nb.b);
    if (!ineq::le(bb.max_B, bb.min_A)) return std::nullopt;
    return AlphaWindow{bb.max_B, bb.min_A};
}

// R1 in its expanded printing 9 b0 nu^2 - 6 b0 nu <= 12 b^2 - (12 b0 + 1) b
inline bool in_R_sharp(double v0, double nu, double b, double slack = 0.0) {
    const double b0 = kappa_scales(v0).b0;
    if (!ineq::ge(b, b0, slack)) return false;
    const bool r1 = ineq::le(9 * b0 * nu * nu - 6 * b0 * nu, 12 * b * b - (12 * b0 + 1) * b, slack);
    const bool r2 = ineq::ge(4 * (10 * b - 2 * (3 * b0 + 1) - (9 * b0 - 2) * nu) * b,
                             15 * b0 * nu * (3 * nu - 2), slack);
    const bool r3 = ineq::ge(4 * (30 * b - 2 * (18 * b0 + 1) + 3 * (9 * b0 - 2) * nu) * b,
                             45 * b0 * nu * (3 * nu - 2), slack);
    return r1 && r2 && r3;
}
inline bool in_R_sharp(double v0, const PhysParams& p) {
    const auto nb = to_nu_b(p);
    return in_R_sharp(v0, nb.nu, nb.b);
}

// compact printing 3 b0 nu (3 b0 nu - 2) <= (12 (b - b0) - 1) b, kept for comparison
inline bool r1_compact(double b0, double nu, double b) {
    return ineq::le(3 * b0 * nu * (3 * b0 * nu - 2), (12 * (b - b0) - 1) * b);
}

struct ExteriorConditions {
    bool ellipse;
    bool hyperbola;
    double sigma_min;
    std::array<double, 4> sigma_terms;
};

inline std::array<double, 4> sigma_terms(const Triple& t) {
    const double a = t.a, b = t.b, c = t.c;
    return {1.0, (15 * b - 2) / (3 * std::sqrt((2 * b - a) * (2 * b - c))),
            (12 * b * b - 2 * b + 9 * a * c) / (3 * b * std::sqrt((b - 2 * a) * (b - 2 * c))),
            3 * std::sqrt(a * c) / b};
}

inline bool ellipse_condition(const Triple& t, double slack = 0.0) {
    return ineq::le(153 * t.b * t.b - 54 * t.b + 4, 9 * t.a * t.c, slack);
}

inline bool hyperbola_condition(const Triple& t, double slack = 0.0) {
    const double b = t.b;
    const double rhs = b * (std::sqrt(48 * (6 * b - 1) * (6 * b - 1) + (21 * b - 2) * (21 * b - 2)) - 1);
    return ineq::ge(54 * t.a * t.c, rhs, slack);
}

// the (nu,b) printing of the hyperbola region
inline bool hyperbola_nu_form(double nu, double b) {
    return ineq::ge(-3 * nu * nu + 2 * nu,
                    2 * b / 9 * (20 - 75 * b + std::sqrt(2169 * b * b - 660 * b + 152)));
}

inline ExteriorConditions exterior_conditions(const Triple& t) {
    ExteriorConditions e{};
    e.sigma_terms = sigma_terms(t);
    e.sigma_min = *std::max_element(e.sigma_terms.begin(), e.sigma_terms.end());
    e.ellipse = ellipse_condition(t);
    e.hyperbola = hyperbola_condition(t);
    return e;
}
inline ExteriorConditions exterior_conditions(const PhysParams& p) { return exterior_conditions(p.triple()); }

inline bool obstruction_set(const Triple& t) {
    return t.a < 0 && t.c < 0 && ineq::ge(2 * t.a * t.b + 3 * t.a * t.c, t.b * t.b) &&
           ineq::ge(2 * t.b * t.c + 3 * t.a * t.c, t.b * t.b);
}

inline double sigma_ac(double b) {
    if (!(b > 1.0 / 6.0)) throw Error(ErrorCode::BTooSmall, "sigma_ac needs b > 1/6");
    if (b <= kBCrit) return 1.0;
    return 2 * (b - 1.0 / 6.0) * (b - 1.0 / 8.0) / (b * (b - 1.0 / 12.0));
}

enum class ScenarioLabel {
    ExteriorOnly_b_le_3_16,
    ExteriorPlusOrigin_b_le_2_9,
    ConeBand_b_le_crit,
    ConeBand_sigma_b,
    NotClassified,
};

inline const char* to_string(ScenarioLabel l) {
    switch (l) {
    case ScenarioLabel::ExteriorOnly_b_le_3_16: return "ExteriorOnly_b_le_3_16";
    case ScenarioLabel::ExteriorPlusOrigin_b_le_2_9: return "ExteriorPlusOrigin_b_le_2_9";
    case ScenarioLabel::ConeBand_b_le_crit: return "ConeBand_b_le_crit";
    case ScenarioLabel::ConeBand_sigma_b: return "ConeBand_sigma_b";
    case ScenarioLabel::NotClassified: return "NotClassified";
    }
    return "NotClassified";
}

struct DecayScenario {
    ScenarioLabel label = ScenarioLabel::NotClassified;
    std::optional<double> v_max;
    std::optional<double> sigma;
    bool dispersion_like = false;
    bool refined = false;
    std::optional<bool> r_sharp;
    ExteriorConditions exterior{};
};

inline DecayScenario classify(const PhysParams& p, std::optional<double> v0 = std::nullopt) {
    DecayScenario s;
    s.dispersion_like = is_dispersion_like(p);
    s.refined = is_refined_dispersion_like(p);
    s.exterior = exterior_conditions(p);
    if (v0) s.r_sharp = in_R_sharp(*v0, p);
    if (!on_ac_line(p.triple())) return s;
    const double b = p.b();
    if (b <= 3.0 / 16.0) {
        s.label = ScenarioLabel::ExteriorOnly_b_le_3_16;
        s.sigma = 1.0;
    } else if (b <= 2.0 / 9.0) {
        s.label = ScenarioLabel::ExteriorPlusOrigin_b_le_2_9;
        s.sigma = 1.0;
    } else if (b <= kBCrit) {
        s.label = ScenarioLabel::ConeBand_b_le_crit;
        s.v_max = 1.0 - 2.0 / (9.0 * b);
        s.sigma = 1.0;
    } else {
        s.label = ScenarioLabel::ConeBand_sigma_b;
        s.v_max = 1.0 - 2.0 / (9.0 * b);
        s.sigma = sigma_ac(b);
    }
    return s;
}

// ---------------------------------------------------------------- raster

enum class Predicate { DispersionLike, Refined, RSharp, Ellipse, Hyperbola, Obstruction };
enum class Axes { NuB, AC };

inline const char* to_string(Predicate p) {
    switch (p) {
    case Predicate::DispersionLike: return "dispersion_like";
    case Predicate::Refined: return "refined";
    case Predicate::RSharp: return "r_sharp";
    case Predicate::Ellipse: return "ellipse";
    case Predicate::Hyperbola: return "hyperbola";
    case Predicate::Obstruction: return "obstruction";
    }
    return "?";
}

inline Predicate parse_predicate(const std::string& s) {
    for (auto p : {Predicate::DispersionLike, Predicate::Refined, Predicate::RSharp, Predicate::Ellipse,
                   Predicate::Hyperbola, Predicate::Obstruction})
        if (s == to_string(p)) return p;
    throw Error(ErrorCode::ConfigError, "unknown predicate '" + s + "'");
}

struct RasterSpec {
    Axes axes = Axes::NuB;
    double x_lo = 0.0, x_hi = 1.0;       // nu, or a
    double y_lo = 1.0 / 6.0, y_hi = 0.5; // b, or c
    int nx = 400, ny = 400;
    double fixed_b = 0.25;               // used by the a-c axes
    std::optional<double> v0;            // needed by r_sharp
    double boundary_tol = 1e-9;
    std::vector<Predicate> predicates;
};

struct RegionLayer {
    Predicate predicate;
    std::vector<std::uint8_t> value;
    std::vector<std::uint8_t> boundary;
};

struct RegionMap {
    RasterSpec spec;
    std::vector<double> xs, ys;
    std::vector<std::uint8_t> valid;
    std::vector<RegionLayer> layers;
    std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * spec.nx + i; }
};

inline bool eval_predicate(Predicate pr, const Triple& t, std::optional<double> v0, double slack) {
    switch (pr) {
    case Predicate::DispersionLike: return is_dispersion_like(t, slack);
    case Predicate::Refined: return is_refined_dispersion_like(t, slack);
    case Predicate::RSharp:
        if (!v0) throw Error(ErrorCode::ConfigError, "r_sharp needs v0");
        return in_R_sharp(*v0, 2.0 * (t.c + t.b), t.b, slack);
    case Predicate::Ellipse: return ellipse_condition(t, slack);
    case Predicate::Hyperbola: return hyperbola_condition(t, slack);
    case Predicate::Obstruction: return obstruction_set(t);
    }
    return false;
}

inline RegionMap rasterize(const RasterSpec& spec) {
    if (spec.predicates.empty()) throw Error(ErrorCode::BadRange, "empty predicate set");
    if (spec.nx < 2 || spec.ny < 2) throw Error(ErrorCode::BadRange, "resolution must be >= 2 per axis");
    if (!(spec.x_lo < spec.x_hi) || !(spec.y_lo < spec.y_hi))
        throw Error(ErrorCode::BadRange, "axis range must be increasing");
    if (spec.axes == Axes::AC && !(spec.fixed_b > 0.0)) throw Error(ErrorCode::BadRange, "a-c axes need b > 0");
    for (auto p : spec.predicates)
        if (p == Predicate::RSharp && !spec.v0) throw Error(ErrorCode::BadRange, "r_sharp needs v0");

    RegionMap m;
    m.spec = spec;
    m.xs.resize(spec.nx);
    m.ys.resize(spec.ny);
    for (int i = 0; i < spec.nx; ++i) m.xs[i] = spec.x_lo + (spec.x_hi - spec.x_lo) * i / (spec.nx - 1);
    for (int j = 0; j < spec.ny; ++j) m.ys[j] = spec.y_lo + (spec.y_hi - spec.y_lo) * j / (spec.ny - 1);
    const std::size_t ncell = static_cast<std::size_t>(spec.nx) * spec.ny;
    m.valid.assign(ncell, 0);
    for (auto p : spec.predicates) m.layers.push_back({p, std::vector<std::uint8_t>(ncell, 0), std::vector<std::uint8_t>(ncell, 0)});

    parallel_for(spec.ny, [&](std::size_t j) {
        for (int i = 0; i < spec.nx; ++i) {
            const std::size_t idx = m.index(i, static_cast<int>(j));
            Triple t{};
            bool ok;
            if (spec.axes == Axes::NuB) {
                const double nu = m.xs[i], b = m.ys[j];
                ok = in_R0(nu, b);
                t = {-nu / 2.0 + 1.0 / 3.0 - b, b, nu / 2.0 - b};
            } else {
                t = {m.xs[i], spec.fixed_b, m.ys[j]};
                ok = t.a < 0 && t.c < 0;
            }
            m.valid[idx] = ok;
            if (!ok) continue;
            for (auto& layer : m.layers) {
                const bool loose = eval_predicate(layer.predicate, t, spec.v0, spec.boundary_tol);
                const bool tight = eval_predicate(layer.predicate, t, spec.v0, -spec.boundary_tol);
                layer.value[idx] = loose;
                layer.boundary[idx] = loose != tight;
            }
        }
    });
    return m;
}

inline void write_csv(const RegionMap& m, std::ostream& os) {
    os << "x,y,predicate,value,boundary\n";
    for (int j = 0; j < m.spec.ny; ++j)
        for (int i = 0; i < m.spec.nx; ++i) {
            const auto idx = m.index(i, j);
            for (const auto& l : m.layers)
                os << fmt_double(m.xs[i]) << ',' << fmt_double(m.ys[j]) << ',' << to_string(l.predicate) << ','
                   << int(l.value[idx]) << ',' << int(l.boundary[idx]) << '\n';
        }
}

inline void write_svg(const RegionMap& m, std::ostream& os) {
    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    const int cell = std::max(1, 800 / std::max(m.spec.nx, m.spec.ny));
    const int W = cell * m.spec.nx, H = cell * m.spec.ny;
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W + 160 << "\" height=\"" << H << "\">\n";
    os << "<rect x=\"0\" y=\"0\" width=\"" << W << "\" height=\"" << H << "\" fill=\"#ffffff\"/>\n";
    for (int j = 0; j < m.spec.ny; ++j)
        for (int i = 0; i < m.spec.nx; ++i) {
            const auto idx = m.index(i, j);
            const int px = i * cell, py = (m.spec.ny - 1 - j) * cell;
            if (!m.valid[idx]) {
                os << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell << "\" height=\"" << cell
                   << "\" fill=\"#dddddd\"/>\n";
                continue;
            }
            for (std::size_t k = 0; k < m.layers.size(); ++k) {
                const auto& l = m.layers[k];
                if (!l.value[idx] && !l.boundary[idx]) continue;
                os << "<rect x=\"" << px << "\" y=\"" << py << "\" width=\"" << cell << "\" height=\"" << cell
                   << "\" fill=\"" << (l.boundary[idx] ? "#000000" : colors[k % 6]) << "\" fill-opacity=\""
                   << (l.boundary[idx] ? "1" : "0.35") << "\"/>\n";
            }
        }
    for (std::size_t k = 0; k < m.layers.size(); ++k)
        os << "<text x=\"" << W + 10 << "\" y=\"" << 20 + 20 * k << "\" fill=\"" << colors[k % 6]
           << "\" font-size=\"14\">" << to_string(m.layers[k].predicate) << "</text>\n";
    os << "</svg>\n";
}

} // namespace abcd
