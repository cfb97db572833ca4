#pragma once

#include "abcd/error.hpp"
#include "abcd/params.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <vector>

namespace abcd {

struct WaveSample {
    double k, omega, amplitude_A, group_velocity;
};

// odd branch: equals the "+" branch for k >= 0
inline double omega(const Triple& t, double k) {
    const double k2 = k * k;
    return k * std::sqrt((1 - t.a * k2) * (1 - t.c * k2)) / (1 + t.b * k2);
}
inline double omega(const PhysParams& p, double k) { return omega(p.triple(), k); }

// numerator of w'(k) as a polynomial in x = k^2
inline double gv_numerator(const Triple& t, double x) {
    const double a = t.a, b = t.b, c = t.c;
    return ((a * b * c * x + 3 * a * c) * x - (b + 2 * a + 2 * c)) * x + 1;
}

inline double group_velocity(const Triple& t, double k) {
    const double k2 = k * k;
    const double den = (1 + t.b * k2) * (1 + t.b * k2) * std::sqrt((1 - t.a * k2) * (1 - t.c * k2));
    return gv_numerator(t, k2) / den;
}
inline double group_velocity(const PhysParams& p, double k) { return group_velocity(p.triple(), k); }

// large-k limit of the group velocity
inline double group_velocity_inf(const Triple& t) { return std::sqrt(t.a * t.c) / t.b; }

inline double amplitude_A(const Triple& t, double k) {
    if (k == 0.0) return 1.0; // long-wave limit of both forms
    return k * (1 - t.a * k * k) / (omega(t, k) * (1 + t.b * k * k));
}
inline double amplitude_A_alt(const Triple& t, double k) {
    if (k == 0.0) return 1.0;
    return omega(t, k) * (1 + t.b * k * k) / (k * (1 - t.c * k * k));
}

inline WaveSample wave_sample(const PhysParams& p, double k) {
    const auto t = p.triple();
    return {k, omega(t, k), amplitude_A(t, k), group_velocity(t, k)};
}

// P(mu), mu = b k^2, on the a = c line
inline double pmu(const PhysParams& p, double mu) {
    if (!on_ac_line(p.triple())) throw Error(ErrorCode::NotOnAcLine, "pmu needs a = c");
    const double bt = 1.0 / (6.0 * p.b()) - 1.0;
    return (1 + (-1 - 3 * bt) * mu - bt * mu * mu) / ((1 + mu) * (1 + mu));
}

struct PwRange {
    double v_min, v_max;
};

namespace detail {
template <class F>
double golden_min(F&& f, double lo, double hi, int iters = 200) {
    const double g = (std::sqrt(5.0) - 1) / 2;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    for (int i = 0; i < iters && hi - lo > 1e-15 * (std::abs(lo) + std::abs(hi)); ++i) {
        if (f1 < f2) {
            hi = x2; x2 = x1; f2 = f1;
            x1 = hi - g * (hi - lo); f1 = f(x1);
        } else {
            lo = x1; x1 = x2; f1 = f2;
            x2 = lo + g * (hi - lo); f2 = f(x2);
        }
    }
    return std::min(f1, f2);
}
} // namespace detail

// inf and sup of the signed group velocity over k >= 0 (k = infinity as a limit)
inline PwRange pw_range(const PhysParams& p) {
    const auto t = p.triple();
    if (on_ac_line(t)) return {1.0 - 3.0 / (16.0 * t.b), 1.0};
    // search in s = log10(mu), mu = b k^2
    auto gv_s = [&](double s) { return group_velocity(t, std::sqrt(std::pow(10.0, s) / t.b)); };
    const int ns = 4001;
    const double s_lo = -6, s_hi = 6, ds = (s_hi - s_lo) / (ns - 1);
    std::vector<double> vals(ns);
    for (int i = 0; i < ns; ++i) vals[i] = gv_s(s_lo + i * ds);
    const auto imin = std::min_element(vals.begin(), vals.end()) - vals.begin();
    const auto imax = std::max_element(vals.begin(), vals.end()) - vals.begin();
    auto bracket = [&](long i, double& lo, double& hi) {
        lo = s_lo + std::max<long>(i - 1, 0) * ds;
        hi = s_lo + std::min<long>(i + 1, ns - 1) * ds;
    };
    double lo, hi;
    bracket(imin, lo, hi);
    double vmin = detail::golden_min(gv_s, lo, hi);
    bracket(imax, lo, hi);
    double vmax = -detail::golden_min([&](double s) { return -gv_s(s); }, lo, hi);
    const double vinf = group_velocity_inf(t);
    vmin = std::min({vmin, vals[imin], 1.0, vinf});
    vmax = std::max({vmax, vals[imax], 1.0, vinf});
    return {vmin, vmax};
}

namespace detail {
// real roots of c3 x^3 + c2 x^2 + c1 x + c0, c3 != 0
inline std::vector<double> cubic_real_roots(double c3, double c2, double c1, double c0) {
    const double A = c2 / c3, B = c1 / c3, C = c0 / c3;
    const double p = B - A * A / 3, q = 2 * A * A * A / 27 - A * B / 3 + C;
    const double shift = -A / 3;
    const double disc = q * q / 4 + p * p * p / 27;
    std::vector<double> r;
    if (disc > 0) {
        const double sq = std::sqrt(disc);
        r.push_back(std::cbrt(-q / 2 + sq) + std::cbrt(-q / 2 - sq) + shift);
    } else if (p == 0) {
        r.push_back(shift);
    } else {
        const double m = 2 * std::sqrt(-p / 3);
        const double arg = std::clamp(3 * q / (p * m), -1.0, 1.0);
        const double th = std::acos(arg) / 3;
        for (int j = 0; j < 3; ++j) r.push_back(m * std::cos(th - 2 * std::numbers::pi * j / 3) + shift);
    }
    return r;
}
} // namespace detail

// positive k with w'(k) = 0, from the cubic in k^2
inline std::vector<double> zero_gv_wavenumbers(const PhysParams& p) {
    const auto t = p.triple();
    const double c3 = t.a * t.b * t.c, c2 = 3 * t.a * t.c, c1 = -(t.b + 2 * t.a + 2 * t.c), c0 = 1;
    auto f = [&](double x) { return gv_numerator(t, x); };
    auto df = [&](double x) { return (3 * c3 * x + 2 * c2) * x + c1; };
    auto scale = [&](double x) {
        return std::abs(c3 * x * x * x) + std::abs(c2 * x * x) + std::abs(c1 * x) + 1;
    };
    std::vector<double> xs = detail::cubic_real_roots(c3, c2, c1, c0);
    // tangential roots sit at critical points; Newton only gets sqrt(eps) there, so snap to them
    std::vector<double> tangent;
    const double qa = 3 * c3, qb = 2 * c2, qc = c1, qd = qb * qb - 4 * qa * qc;
    if (qd >= 0) {
        for (double s : {-1.0, 1.0}) {
            const double xc = (-qb + s * std::sqrt(qd)) / (2 * qa);
            if (std::abs(f(xc)) <= 1e-12 * scale(xc)) tangent.push_back(xc);
        }
    }
    for (double& x : xs)
        for (double xc : tangent)
            if (std::abs(x - xc) <= 1e-4 * std::max(1.0, std::abs(xc))) x = xc;
    xs.insert(xs.begin(), tangent.begin(), tangent.end());
    std::vector<double> out;
    for (double x : xs) {
        const bool is_tangent = std::find(tangent.begin(), tangent.end(), x) != tangent.end();
        if (is_tangent) {
            if (x > 0) {
                const double k = std::sqrt(x);
                bool dup = false;
                for (double e : out) dup = dup || std::abs(e - k) <= 1e-6 * std::max(1.0, k);
                if (!dup) out.push_back(k);
            }
            continue;
        }
        for (int it = 0; it < 50; ++it) {
            const double d = df(x);
            if (d == 0) break;
            const double step = f(x) / d;
            if (!std::isfinite(step)) break;
            x -= step;
            if (std::abs(step) <= 1e-15 * std::max(1.0, std::abs(x))) break;
        }
        if (!(x > 0) || std::abs(f(x)) > 1e-10 * scale(x)) continue;
        const double k = std::sqrt(x);
        bool dup = false;
        for (double e : out) dup = dup || std::abs(e - k) <= 1e-6 * std::max(1.0, k);
        if (!dup) out.push_back(k);
    }
    std::sort(out.begin(), out.end());
    return out;
}

} // namespace abcd
