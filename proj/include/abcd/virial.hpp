#pragma once

#include "abcd/error.hpp"
#include "abcd/params.hpp"
#include "abcd/region_atlas.hpp"
#include "abcd/spectral.hpp"
#include "abcd/weight.hpp"

#include <array>
#include <cmath>
#include <optional>
#include <vector>

namespace abcd {

// coefficients of Q in canonical variables; a, c enter as a/b, c/b
struct VirialCoeffs {
    std::array<double, 4> A, B; // A[0] = A1 ... A[3] = A4
    double D11, D12, D21, D22;
    double alpha;
};

inline VirialCoeffs quad_coeffs(const NormParams& n, double alpha) {
    const double a = n.a_tilde, c = n.c_tilde;
    VirialCoeffs q{};
    q.alpha = alpha;
    q.A = {0.5, -alpha - 1.5 * a, -(1 - a) * alpha - 2 * a - 0.5, -a * (0.5 - alpha)};
    q.B = {0.5, alpha - 1.5 * c, (1 - c) * alpha - 2 * c - 0.5, -c * (0.5 + alpha)};
    q.D11 = -0.5 * (1 + a) * (-alpha - 1) - 0.5;
    q.D12 = -a * (alpha - 0.5);
    q.D21 = -0.5 * (1 + c) * (alpha - 1) - 0.5;
    q.D22 = -c * (-alpha - 0.5);
    return q;
}
inline VirialCoeffs quad_coeffs(const PhysParams& p, double alpha) { return quad_coeffs(normalize(p), alpha); }

struct StarCoeffs {
    std::array<double, 4> A, B;
    double v0_plus, alpha;
};

inline StarCoeffs star_coeffs(double nu, double b, double alpha, double v0) {
    if (!(v0 > 0.0 && v0 < 1.0)) throw Error(ErrorCode::V0OutOfRange, "v0 must lie in (0,1)");
    StarCoeffs s{};
    s.alpha = alpha;
    s.v0_plus = (1 + v0) / 2;
    const double h = 1 - s.v0_plus, m = 3 * nu - 2;
    s.A = {h / 2, 1.5 * h + m / (4 * b) - alpha, 1.5 * h + m / (3 * b) - (2 + m / (6 * b)) * alpha,
           h / 2 + m / (12 * b) - (1 + m / (6 * b)) * alpha};
    s.B = {h / 2, 1.5 * h - 3 * nu / (4 * b) + alpha, 1.5 * h - nu / b + (2 - nu / (2 * b)) * alpha,
           h / 2 - nu / (4 * b) + (1 - nu / (2 * b)) * alpha};
    return s;
}
inline StarCoeffs star_coeffs(const PhysParams& p, double alpha, double v0) {
    const auto nb = to_nu_b(p);
    return star_coeffs(nb.nu, nb.b, alpha, v0);
}

// ---------------------------------------------------------------- SOS

// p(r) = (((1-r)^2 + 5)/2)^2 + 5r - 9 = r (r^3 - 4r^2 + 16r - 4) / 4
inline double sos_p(double r) {
    const double s = ((1 - r) * (1 - r) + 5) / 2;
    return s * s + 5 * r - 9;
}

// unique positive root of r^3 - 4r^2 + 16r - 4 (q' > 0 everywhere)
inline double sos_r0() {
    auto q = [](double r) { return ((r - 4) * r + 16) * r - 4; };
    double lo = 0, hi = 1;
    for (int i = 0; i < 200 && hi - lo > 0; ++i) {
        const double mid = 0.5 * (lo + hi);
        if (mid == lo || mid == hi) break;
        (q(mid) < 0 ? lo : hi) = mid;
    }
    double r = 0.5 * (lo + hi);
    for (int i = 0; i < 3; ++i) r -= q(r) / ((3 * r - 8) * r + 16);
    return r;
}

struct SosWitness {
    double a_hat, b_hat, c_hat, d_hat;
    std::array<double, 4> target; // coefficients of w^2, w_x^2, w_xx^2, w_xxx^2
    double eps, delta;
};

inline SosWitness sos_certificate(double eps) {
    const double r0 = sos_r0();
    if (!(eps > 0.0 && eps < r0)) throw Error(ErrorCode::EpsOutOfRange, "eps must lie in (0, r0)");
    const double a = 3 + sos_p(eps) / (2 * (1 - eps));
    SosWitness w{};
    w.eps = eps;
    w.delta = 9 - a * a;
    w.a_hat = std::sqrt(9 - w.delta);
    w.b_hat = ((1 - eps) * (1 - eps) + 5) / 2;
    w.c_hat = 1 - eps;
    w.d_hat = 1;
    w.target = {9 - w.delta, 3 + eps, -5, 1};
    return w;
}

// ---------------------------------------------------------------- certificates

enum class PosLemma { Pos1, Pos2, Pos3, Pos4, DispersionLike, None };

inline const char* to_string(PosLemma l) {
    switch (l) {
    case PosLemma::Pos1: return "Pos1";
    case PosLemma::Pos2: return "Pos2";
    case PosLemma::Pos3: return "Pos3";
    case PosLemma::Pos4: return "Pos4";
    case PosLemma::DispersionLike: return "DispersionLike";
    case PosLemma::None: return "None";
    }
    return "None";
}

struct PositivityCertificate {
    PosLemma lemma = PosLemma::None;
    std::optional<double> alpha;
    std::optional<double> alpha_lo, alpha_hi;
};

namespace detail {
// linear-in-alpha coefficient p + q alpha
struct Lin {
    double p, q;
};

// A_i and B_i for i = 2..4 as functions of alpha
inline std::array<Lin, 3> lin_A(double a) { return {{{-1.5 * a, -1}, {-2 * a - 0.5, -(1 - a)}, {-0.5 * a, a}}}; }
inline std::array<Lin, 3> lin_B(double c) { return {{{-1.5 * c, 1}, {-2 * c - 0.5, 1 - c}, {-0.5 * c, -c}}}; }
// weights of the critical square 9,3,-5,1 (over 18) taken off A_2..A_4
inline constexpr std::array<double, 3> kPrimeShift = {1.0 / 6, -5.0 / 18, 1.0 / 18};

// open interval of alpha where every p + q alpha > 0
inline std::optional<std::pair<double, double>> open_interval(const std::vector<Lin>& cs) {
    double lo = -INFINITY, hi = INFINITY;
    for (const auto& c : cs) {
        if (c.q > 0) lo = std::max(lo, -c.p / c.q);
        else if (c.q < 0) hi = std::min(hi, -c.p / c.q);
        else if (!(c.p > 0)) return std::nullopt;
    }
    if (!(lo < hi)) return std::nullopt;
    // widths at rounding level count as empty; the floor matters when both ends sit near zero
    if (std::isfinite(lo) && std::isfinite(hi) && !(hi - lo > ineq::guard(std::max(1.0, std::abs(lo)), std::abs(hi))))
        return std::nullopt;
    return std::make_pair(lo, hi);
}

inline std::vector<Lin> constraints(const NormParams& n, bool prime_f, bool prime_g) {
    std::vector<Lin> cs;
    const auto A = lin_A(n.a_tilde), B = lin_B(n.c_tilde);
    for (int i = 0; i < 3; ++i) {
        cs.push_back({A[i].p - (prime_f ? kPrimeShift[i] : 0.0), A[i].q});
        cs.push_back({B[i].p - (prime_g ? kPrimeShift[i] : 0.0), B[i].q});
    }
    return cs;
}
} // namespace detail

inline PositivityCertificate positivity_certificate(const NormParams& n) {
    PositivityCertificate out;
    auto attempt = [&](PosLemma lemma, bool pf, bool pg) {
        if (out.alpha) return;
        auto iv = detail::open_interval(detail::constraints(n, pf, pg));
        if (!iv) return;
        out.lemma = lemma;
        out.alpha_lo = iv->first;
        out.alpha_hi = iv->second;
        out.alpha = 0.5 * (iv->first + iv->second);
    };
    const bool c_le_a = n.c_tilde <= n.a_tilde;
    attempt(PosLemma::DispersionLike, false, false);
    attempt(c_le_a ? PosLemma::Pos1 : PosLemma::Pos2, true, true);
    if (c_le_a) attempt(PosLemma::Pos3, false, true);
    else attempt(PosLemma::Pos4, true, false);
    return out;
}
inline PositivityCertificate positivity_certificate(const PhysParams& p) { return positivity_certificate(normalize(p)); }

// ---------------------------------------------------------------- functionals

struct Functionals {
    double I, J, H;
    bool touches_boundary;
};

struct Decomposition {
    double Q, SQ, NQ, VH;
    double Q_canonical;
    bool touches_boundary;
    double total() const { return Q + SQ + NQ + VH; }
};

namespace detail {
struct WeightSamples {
    RVec phi, d1, d2, d3; // x-derivatives of profile((x - c)/s)
    RVec y, p1y, p2y;     // y, and y-derivatives phi'(y), phi''(y)
    double s, sp;
};

inline WeightSamples sample_weight(const Weight& w, const Grid& g, double t) {
    WeightSamples ws;
    ws.s = w.scale(t);
    ws.sp = w.scale_prime(t);
    const int n = g.n;
    for (RVec* v : {&ws.phi, &ws.d1, &ws.d2, &ws.d3, &ws.y, &ws.p1y, &ws.p2y}) v->resize(n);
    for (int j = 0; j < n; ++j) {
        const double y = w.y(g.x(j), t);
        const auto d = profile_derivs(w.profile, y);
        ws.y[j] = y;
        ws.phi[j] = d[0];
        ws.p1y[j] = d[1];
        ws.p2y[j] = d[2];
        ws.d1[j] = d[1] / ws.s;
        ws.d2[j] = d[2] / (ws.s * ws.s);
        ws.d3[j] = d[3] / (ws.s * ws.s * ws.s);
    }
    return ws;
}

// profile transition must sit at least 10 scale lengths from the seam
inline bool touches_boundary(const Weight& w, const Grid& g, double t) {
    const double c = w.center(t), s = w.scale(t);
    return c - 10 * s < -0.5 * g.length || c + 10 * s > 0.5 * g.length;
}

inline double dot(const RVec& w, const RVec& a, const RVec& b, double dx) {
    double s = 0;
    for (std::size_t j = 0; j < a.size(); ++j) s += w[j] * a[j] * b[j];
    return s * dx;
}
inline RVec mul(const RVec& a, const RVec& b) {
    RVec r(a.size());
    for (std::size_t j = 0; j < a.size(); ++j) r[j] = a[j] * b[j];
    return r;
}
} // namespace detail

// I = int phi (u eta + u_x eta_x), J = int phi_x eta u_x, H = I + alpha J
inline Functionals eval_functionals(const FieldPair& f, const Grid& g, const Weight& w, double alpha, double t) {
    SpectralOps ops(g);
    const auto ws = detail::sample_weight(w, g, t);
    const RVec ux = ops.deriv(f.u, 1), ex = ops.deriv(f.eta, 1);
    const double dx = g.dx();
    Functionals r{};
    r.I = detail::dot(ws.phi, f.u, f.eta, dx) + detail::dot(ws.phi, ux, ex, dx);
    r.J = detail::dot(ws.d1, f.eta, ux, dx);
    r.H = r.I + alpha * r.J;
    r.touches_boundary = detail::touches_boundary(w, g, t);
    return r;
}

// dH/dt = Q + SQ + NQ + VH for the normalized system
inline Decomposition eval_decomposition(const FieldPair& f, const Grid& g, const NormParams& p, const Weight& w,
                                        double alpha, double t) {
    SpectralOps ops(g);
    const auto ws = detail::sample_weight(w, g, t);
    const double dx = g.dx(), a = p.a_tilde, c = p.c_tilde;
    const RVec& u = f.u;
    const RVec& e = f.eta;
    const RVec ux = ops.deriv(u, 1), ex = ops.deriv(e, 1);
    const RVec Tu = ops.helmholtz(u), Te = ops.helmholtz(e);
    const RVec Tux = ops.deriv(Tu, 1);
    const RVec ue = detail::mul(u, e), uu = detail::mul(u, u);
    const RVec Tuu = ops.helmholtz(uu), Tue = ops.helmholtz(ue);
    const RVec Tue_x = ops.deriv(Tue, 1);

    Decomposition d{};
    d.Q = ((1 + c) * (alpha - 1) + 0.5) * detail::dot(ws.d1, e, e, dx) +
          c * (-alpha - 0.5) * detail::dot(ws.d1, ex, ex, dx) +
          ((1 + a) * (-alpha - 1) + 0.5) * detail::dot(ws.d1, u, u, dx) +
          a * (alpha - 0.5) * detail::dot(ws.d1, ux, ux, dx) + (1 + c) * (1 - alpha) * detail::dot(ws.d1, e, Te, dx) +
          (1 + a) * (alpha + 1) * detail::dot(ws.d1, u, Tu, dx);

    d.SQ = alpha * (1 + a) * detail::dot(ws.d2, u, Tux, dx) + alpha * c / 2 * detail::dot(ws.d3, e, e, dx);

    d.NQ = 0.5 * (-alpha - 1) * detail::dot(ws.d1, uu, e, dx) + 0.5 * (1 - alpha) * detail::dot(ws.d1, e, Tuu, dx) +
           (alpha + 1) * detail::dot(ws.d1, u, Tue, dx) + alpha * detail::dot(ws.d2, u, Tue_x, dx);

    // time dependence of the weight
    const double s = ws.s, sp = ws.sp, v = w.v;
    RVec dens(u.size()), eux(u.size());
    for (std::size_t j = 0; j < u.size(); ++j) {
        dens[j] = ue[j] + ux[j] * ex[j];
        eux[j] = e[j] * ux[j];
    }
    double vh_i = 0, vh_j = 0;
    for (std::size_t j = 0; j < u.size(); ++j) {
        vh_i += (-v / s - sp / s * ws.y[j]) * ws.p1y[j] * dens[j];
        vh_j += (-sp / (s * s) * ws.p1y[j] - v / (s * s) * ws.p2y[j] - sp / (s * s) * ws.y[j] * ws.p2y[j]) * eux[j];
    }
    d.VH = (vh_i + alpha * vh_j) * dx;

    // same Q through f = T u, g = T eta
    const auto q = quad_coeffs(p, alpha);
    RVec fd = Tu, gd = Te;
    double qc = 0;
    for (int i = 0; i < 4; ++i) {
        qc += q.A[i] * detail::dot(ws.d1, fd, fd, dx) + q.B[i] * detail::dot(ws.d1, gd, gd, dx);
        if (i == 0) {
            qc += detail::dot(ws.d3, fd, fd, dx) * q.D11 + detail::dot(ws.d3, gd, gd, dx) * q.D21;
        } else if (i == 1) {
            qc += detail::dot(ws.d3, fd, fd, dx) * q.D12 + detail::dot(ws.d3, gd, gd, dx) * q.D22;
        }
        if (i < 3) {
            fd = ops.deriv(fd, 1);
            gd = ops.deriv(gd, 1);
        }
    }
    d.Q_canonical = qc;
    d.touches_boundary = detail::touches_boundary(w, g, t);
    return d;
}

} // namespace abcd
