#pragma once

#include "abcd/error.hpp"
#include "abcd/params.hpp"

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <memory>
#include <mutex>
#include <numbers>
#include <random>
#include <vector>

namespace abcd {

using cplx = std::complex<double>;
using RVec = std::vector<double>;
using CVec = std::vector<cplx>;

struct Grid {
    int n = 2048;
    double length = 200.0 * std::numbers::pi;

    Grid() = default;
    Grid(int n_, double L) : n(n_), length(L) {
        if (n < 16 || (n & (n - 1)) != 0) throw Error(ErrorCode::ConfigError, "grid size must be a power of two >= 16");
        if (!(L > 0) || !std::isfinite(L)) throw Error(ErrorCode::ConfigError, "grid length must be positive");
    }
    double dx() const { return length / n; }
    double x(int j) const { return -0.5 * length + j * dx(); }
    int nmodes() const { return n / 2 + 1; }
    double k(int m) const { return 2.0 * std::numbers::pi * m / length; }
    RVec xs() const {
        RVec v(n);
        for (int j = 0; j < n; ++j) v[j] = x(j);
        return v;
    }
};

// FFTW planning is not thread-safe, execution on distinct buffers is
inline std::mutex& fftw_plan_mutex() {
    static std::mutex m;
    return m;
}

class Fft {
public:
    explicit Fft(int n) : n_(n) {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        rbuf_ = fftw_alloc_real(n);
        cbuf_ = fftw_alloc_complex(n / 2 + 1);
        fwd_ = fftw_plan_dft_r2c_1d(n, rbuf_, cbuf_, FFTW_ESTIMATE);
        inv_ = fftw_plan_dft_c2r_1d(n, cbuf_, rbuf_, FFTW_ESTIMATE);
    }
    ~Fft() {
        std::lock_guard<std::mutex> lk(fftw_plan_mutex());
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(inv_);
        fftw_free(rbuf_);
        fftw_free(cbuf_);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    void forward(const RVec& in, CVec& out) {
        std::memcpy(rbuf_, in.data(), sizeof(double) * n_);
        fftw_execute(fwd_);
        out.resize(n_ / 2 + 1);
        std::memcpy(reinterpret_cast<double*>(out.data()), cbuf_, sizeof(fftw_complex) * (n_ / 2 + 1));
    }
    // normalized: inverse(forward(x)) == x
    void inverse(const CVec& in, RVec& out) {
        std::memcpy(cbuf_, reinterpret_cast<const double*>(in.data()), sizeof(fftw_complex) * (n_ / 2 + 1));
        fftw_execute(inv_); // c2r destroys its input, which is our private buffer
        out.resize(n_);
        const double s = 1.0 / n_;
        for (int j = 0; j < n_; ++j) out[j] = rbuf_[j] * s;
    }

private:
    int n_;
    double* rbuf_;
    fftw_complex* cbuf_;
    fftw_plan fwd_, inv_;
};

struct FieldPair {
    RVec u, eta;
    double t = 0.0;
};

// spectral state (eta_hat, u_hat)
struct SpecPair {
    CVec eta, u;
};

class SpectralOps {
public:
    explicit SpectralOps(const Grid& g) : grid_(g), fft_(g.n) {
        const int M = g.nmodes();
        k_.resize(M);
        ik_.resize(M);
        for (int m = 0; m < M; ++m) {
            k_[m] = g.k(m);
            ik_[m] = (m == g.n / 2) ? cplx(0) : cplx(0, k_[m]);
        }
    }
    const Grid& grid() const { return grid_; }
    double k(int m) const { return k_[m]; }
    cplx ik(int m) const { return ik_[m]; }

    CVec fwd(const RVec& f) { CVec o; fft_.forward(f, o); return o; }
    RVec inv(const CVec& f) { RVec o; fft_.inverse(f, o); return o; }

    // d^order f / dx^order
    RVec deriv(const RVec& f, int order) {
        CVec h = fwd(f);
        for (int m = 0; m < grid_.nmodes(); ++m) {
            cplx s = 1;
            for (int o = 0; o < order; ++o) s *= (order % 2 == 1 ? ik_[m] : cplx(0, k_[m]));
            h[m] *= s;
        }
        return inv(h);
    }
    // (1 - d_xx)^{-1} f
    RVec helmholtz(const RVec& f) {
        CVec h = fwd(f);
        for (int m = 0; m < grid_.nmodes(); ++m) h[m] /= 1.0 + k_[m] * k_[m];
        return inv(h);
    }
    // rectangle rule
    double integrate(const RVec& f) const {
        double s = 0;
        for (double v : f) s += v;
        return s * grid_.dx();
    }

private:
    Grid grid_;
    Fft fft_;
    RVec k_;
    CVec ik_;
};

inline RVec helmholtz_solve(const RVec& u, const Grid& g) {
    SpectralOps ops(g);
    return ops.helmholtz(u);
}

struct SolverConfig {
    double dt = 0.01;
    double t_end = 10.0;
    bool dealias = true;
    int stride = 100;

    void validate(const Grid& g) const {
        if (!(dt > 0) || !std::isfinite(dt)) throw Error(ErrorCode::ConfigError, "dt must be positive");
        if (dt > 0.5 * g.dx()) throw Error(ErrorCode::ConfigError, "dt exceeds 0.5*dx");
        if (!(t_end >= 0) || !std::isfinite(t_end)) throw Error(ErrorCode::ConfigError, "T must be nonnegative");
        if (stride < 1) throw Error(ErrorCode::ConfigError, "stride must be >= 1");
    }
};

struct Trajectory {
    Grid grid;
    NormParams params{};
    std::vector<FieldPair> snapshots;
};

class Solver {
public:
    Solver(const Grid& g, const NormParams& p, bool dealias = true) : ops_(g), p_(p), dealias_(dealias) {
        const int M = g.nmodes();
        la_.resize(M);
        lc_.resize(M);
        mask_.assign(M, 1.0);
        for (int m = 0; m < M; ++m) {
            const double k = ops_.k(m);
            const cplx s = -ops_.ik(m) / (1.0 + k * k);
            la_[m] = s * (1.0 - p.a_tilde * k * k);
            lc_[m] = s * (1.0 - p.c_tilde * k * k);
            if (dealias && 3 * m > g.n) mask_[m] = 0.0;
        }
    }

    const Grid& grid() const { return ops_.grid(); }
    SpectralOps& ops() { return ops_; }

    SpecPair to_spec(const FieldPair& f) { return {ops_.fwd(f.eta), ops_.fwd(f.u)}; }
    FieldPair to_phys(const SpecPair& s, double t) {
        FieldPair f;
        f.eta = ops_.inv(s.eta);
        f.u = ops_.inv(s.u);
        f.t = t;
        return f;
    }

    void rhs(const SpecPair& s, SpecPair& d) {
        const int M = grid().nmodes();
        const RVec u = ops_.inv(s.u), eta = ops_.inv(s.eta);
        RVec P(u.size()), Q(u.size());
        for (std::size_t j = 0; j < u.size(); ++j) {
            P[j] = u[j] * eta[j];
            Q[j] = 0.5 * u[j] * u[j];
        }
        const CVec Ph = ops_.fwd(P), Qh = ops_.fwd(Q);
        d.eta.resize(M);
        d.u.resize(M);
        for (int m = 0; m < M; ++m) {
            const double k = ops_.k(m);
            const cplx s0 = -ops_.ik(m) / (1.0 + k * k);
            d.eta[m] = la_[m] * s.u[m] + s0 * mask_[m] * Ph[m];
            d.u[m] = lc_[m] * s.eta[m] + s0 * mask_[m] * Qh[m];
        }
    }

    FieldPair rhs(const FieldPair& f) {
        SpecPair d;
        rhs(to_spec(f), d);
        return to_phys(d, f.t);
    }

    void step(SpecPair& s, double dt) {
        const int M = grid().nmodes();
        auto axpy = [&](const SpecPair& a, double h, const SpecPair& k) {
            SpecPair r{a.eta, a.u};
            for (int m = 0; m < M; ++m) {
                r.eta[m] += h * k.eta[m];
                r.u[m] += h * k.u[m];
            }
            return r;
        };
        SpecPair k1, k2, k3, k4;
        rhs(s, k1);
        rhs(axpy(s, 0.5 * dt, k1), k2);
        rhs(axpy(s, 0.5 * dt, k2), k3);
        rhs(axpy(s, dt, k3), k4);
        for (int m = 0; m < M; ++m) {
            s.eta[m] += dt / 6.0 * (k1.eta[m] + 2.0 * k2.eta[m] + 2.0 * k3.eta[m] + k4.eta[m]);
            s.u[m] += dt / 6.0 * (k1.u[m] + 2.0 * k2.u[m] + 2.0 * k3.u[m] + k4.u[m]);
        }
    }

    static bool finite(const SpecPair& s) {
        for (std::size_t m = 0; m < s.u.size(); ++m)
            if (!std::isfinite(s.u[m].real()) || !std::isfinite(s.u[m].imag()) || !std::isfinite(s.eta[m].real()) ||
                !std::isfinite(s.eta[m].imag()))
                return false;
        return true;
    }

    // RK4 from init; on_snapshot sees t0, every stride-th step and the final state
    void evolve(const FieldPair& init, const SolverConfig& cfg, const std::function<void(const FieldPair&)>& on_snapshot) {
        cfg.validate(grid());
        long nsteps = std::lround(cfg.t_end / cfg.dt);
        if (nsteps == 0 && cfg.t_end > 0) nsteps = 1;
        const double dt = nsteps > 0 ? cfg.t_end / nsteps : cfg.dt;
        SpecPair s = to_spec(init);
        on_snapshot(init);
        for (long i = 1; i <= nsteps; ++i) {
            step(s, dt);
            if (!finite(s)) throw Error(ErrorCode::NonFiniteState, "non-finite state at t=" + std::to_string(init.t + i * dt));
            if (i % cfg.stride == 0 || i == nsteps) on_snapshot(to_phys(s, init.t + i * dt));
        }
    }

private:
    SpectralOps ops_;
    NormParams p_;
    bool dealias_;
    CVec la_, lc_;
    RVec mask_;
};

inline Trajectory evolve(const FieldPair& init, const Grid& g, const NormParams& p, const SolverConfig& cfg) {
    Trajectory tr{g, p, {}};
    Solver s(g, p, cfg.dealias);
    s.evolve(init, cfg, [&](const FieldPair& f) { tr.snapshots.push_back(f); });
    return tr;
}

// exact flow of the linearized normalized system
inline FieldPair linear_propagator(const FieldPair& f, const Grid& g, const NormParams& p, double t) {
    SpectralOps ops(g);
    CVec eh = ops.fwd(f.eta), uh = ops.fwd(f.u);
    for (int m = 0; m < g.nmodes(); ++m) {
        const double k = ops.k(m);
        const cplx s = -ops.ik(m) / (1.0 + k * k);
        const cplx m12 = s * (1.0 - p.a_tilde * k * k), m21 = s * (1.0 - p.c_tilde * k * k);
        const double w2 = -(m12 * m21).real(); // M^2 = -w^2 I
        const double w = std::sqrt(std::max(w2, 0.0));
        const double c = std::cos(w * t), sn = w > 0 ? std::sin(w * t) / w : t;
        const cplx e0 = eh[m], u0 = uh[m];
        eh[m] = c * e0 + sn * m12 * u0;
        uh[m] = c * u0 + sn * m21 * e0;
    }
    FieldPair o;
    o.eta = ops.inv(eh);
    o.u = ops.inv(uh);
    o.t = f.t + t;
    return o;
}

inline double energy(const FieldPair& f, const Grid& g, const NormParams& p) {
    SpectralOps ops(g);
    const RVec ux = ops.deriv(f.u, 1), ex = ops.deriv(f.eta, 1);
    RVec d(f.u.size());
    for (std::size_t j = 0; j < d.size(); ++j)
        d[j] = -p.a_tilde * ux[j] * ux[j] - p.c_tilde * ex[j] * ex[j] + f.u[j] * f.u[j] + f.eta[j] * f.eta[j] +
               f.u[j] * f.u[j] * f.eta[j];
    return 0.5 * ops.integrate(d);
}

// physical (u, eta)(t, x) on [-L/2, L/2) <-> normalized u_b(t, x) = u(sqrt(b) t, sqrt(b) x)
struct Scaled {
    FieldPair state;
    Grid grid;
};
inline Scaled to_normalized(const FieldPair& f, const Grid& g, double b) {
    const double s = std::sqrt(b);
    return {{f.u, f.eta, f.t / s}, Grid(g.n, g.length / s)};
}
inline Scaled from_normalized(const FieldPair& f, const Grid& g, double b) {
    const double s = std::sqrt(b);
    return {{f.u, f.eta, f.t * s}, Grid(g.n, g.length * s)};
}

// ------------------------------------------------------------ initial data

// u = eta = amp exp(-((x - center)/width)^2)
inline FieldPair gaussian_init(const Grid& g, double amp, double width, double center = 0.0) {
    if (!(width > 0)) throw Error(ErrorCode::ConfigError, "gaussian width must be positive");
    FieldPair f;
    f.u.resize(g.n);
    f.eta.resize(g.n);
    for (int j = 0; j < g.n; ++j) {
        const double z = (g.x(j) - center) / width;
        f.u[j] = f.eta[j] = amp * std::exp(-z * z);
    }
    return f;
}

// a few Gaussian bumps with random signs and centers, independent for u and eta
inline FieldPair random_init(const Grid& g, double amp, double width, std::uint64_t seed, int bumps = 6) {
    if (!(width > 0)) throw Error(ErrorCode::ConfigError, "random width must be positive");
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> coef(-1.0, 1.0), pos(-g.length / 16, g.length / 16);
    FieldPair f;
    f.u.assign(g.n, 0.0);
    f.eta.assign(g.n, 0.0);
    for (RVec* v : {&f.u, &f.eta})
        for (int b = 0; b < bumps; ++b) {
            const double c = coef(rng), x0 = pos(rng);
            for (int j = 0; j < g.n; ++j) {
                const double z = (g.x(j) - x0) / width;
                (*v)[j] += amp * c * std::exp(-z * z);
            }
        }
    return f;
}

} // namespace abcd
