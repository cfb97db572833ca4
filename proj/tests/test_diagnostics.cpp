#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abcd/diagnostics.hpp"

#include <numbers>

using namespace abcd;
using std::numbers::pi;

static ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::ConfigError;
}

// u = sin x, eta = cos 2x and their exact H1 density
static FieldPair toy(const Grid& g) {
    FieldPair f{RVec(g.n), RVec(g.n), 0.0};
    for (int j = 0; j < g.n; ++j) {
        f.u[j] = std::sin(g.x(j));
        f.eta[j] = std::cos(2 * g.x(j));
    }
    return f;
}
static double toy_density(double x) {
    return std::sin(x) * std::sin(x) + std::cos(x) * std::cos(x) + std::cos(2 * x) * std::cos(2 * x) +
           4 * std::sin(2 * x) * std::sin(2 * x);
}

TEST_CASE("window norm") {
    const Grid g(64, 2 * pi);
    const auto f = toy(g);
    FieldPair z{RVec(g.n, 0.0), RVec(g.n, 0.0), 0.0};
    CHECK(window_norm(z, g, -1.0, 1.0) == 0.0);
    // whole grid: 2 pi (1 + 5/2)
    CHECK(window_norm(f, g, -pi, pi) == doctest::Approx(std::sqrt(7 * pi)).epsilon(1e-12));
    for (auto [lo, hi] : {std::pair{-1.0, 1.0}, std::pair{-3.0, 0.2}, std::pair{0.5, 3.1}}) {
        double s = 0;
        for (int j = 0; j < g.n; ++j)
            if (g.x(j) >= lo && g.x(j) < hi) s += toy_density(g.x(j));
        CHECK(window_norm(f, g, lo, hi) == doctest::Approx(std::sqrt(s * g.dx())).epsilon(1e-12));
    }
    CHECK(code_of([&] { window_norm(f, g, -4.0, 0.0); }) == ErrorCode::WindowOutsideGrid);
    CHECK(code_of([&] { window_norm(f, g, 1.0, 1.0); }) == ErrorCode::WindowOutsideGrid);
    CHECK(code_of([&] { window_norm(f, g, WindowSpec{0.0, 1.5}); }) == ErrorCode::BadRange);

    const Grid big(256, 200 * pi);
    const WindowSpec ws{0.3, 10.0};
    CHECK(ws.lambda() == doctest::Approx(10 / std::pow(std::log(10.0), 2)));
    CHECK(ws.lo() == doctest::Approx(3 - ws.lambda()));
    CHECK(window_norm(gaussian_init(big, 0.1, 3.0), big, ws) > 0);
}

TEST_CASE("lambda law and its derivative") {
    for (double t = 2; t < 1e6; t *= 1.7) {
        const double h = 1e-6 * t;
        const double fd = (lambda_law(t + h) - lambda_law(t - h)) / (2 * h);
        CHECK(lambda_law_prime(t) == doctest::Approx(fd).epsilon(1e-7));
        CHECK(lambda_law_prime(t) / lambda_law(t) == doctest::Approx((1 - 2 / std::log(t)) / t).epsilon(1e-14));
        CHECK(lambda_law(t) > 0);
    }
}

TEST_CASE("weighted norms") {
    const Grid g(64, 2 * pi);
    const auto f = toy(g);
    Weight w{Profile::Sech2, 0.0, 0.0, 0.7};
    const double n1 = weighted_norm(f, g, w, 0.0, 1), n2 = weighted_norm(f, g, w, 0.0, 2);
    CHECK(n2 <= n1);
    CHECK(n2 > 0);
    double s = 0;
    for (int j = 0; j < g.n; ++j) s += std::pow(1 / std::cosh(g.x(j) / 0.7), 2) * toy_density(g.x(j));
    CHECK(n1 == doctest::Approx(s * g.dx()).epsilon(1e-12));
    Weight w4{Profile::Sech4, 0.0, 0.0, 0.7};
    CHECK(weighted_norm(f, g, w4, 0.0) == doctest::Approx(n2).epsilon(1e-12));
    // weight to the power 0 is the full squared norm
    CHECK(weighted_norm(f, g, w, 0.0, 0) == doctest::Approx(7 * pi).epsilon(1e-12));
    Weight wide{Profile::Sech2, 0.0, 0.0, 2.0};
    CHECK(code_of([&] { weighted_norm(f, g, wide, 0.0); }) == ErrorCode::WindowOutsideGrid);
}

TEST_CASE("local energy") {
    const NormParams p{-1.0 / 3, -1.0 / 3};
    const Grid g(512, 64 * pi);
    const auto f = gaussian_init(g, 0.05, 3.0);
    Weight psi{Profile::HalfOnePlusTanh, 0.0, 0.0, 10.0};
    CHECK(local_energy(f, g, p, psi, 0.0, 0) == doctest::Approx(energy(f, g, p)).epsilon(1e-13));
    FieldPair z{RVec(g.n, 0.0), RVec(g.n, 0.0), 0.0};
    CHECK(local_energy(z, g, p, psi, 0.0) == 0.0);
    CHECK(local_energy(f, g, p, psi, 0.0) > 0);
}

TEST_CASE("exterior local energy does not grow above the coercivity speed") {
    // a = c = -1/12, b = 1/4 in normalized form; sigma_min = 1 there
    const auto pp = a_equals_c_line(0.25);
    const auto p = normalize(pp);
    REQUIRE(sigma_ac(0.25) == 1.0);
    const Grid g(1024, 160 * pi);
    const auto tr = evolve(gaussian_init(g, 0.05, 3.0), g, p, SolverConfig{0.05, 60.0, true, 10});
    Weight psi{Profile::HalfOnePlusTanh, 1.5, 0.0, 10.0};
    const double e0 = energy(tr.snapshots.front(), g, p);
    double worst = -1e300;
    for (std::size_t i = 1; i + 1 < tr.snapshots.size(); ++i) {
        const auto& a = tr.snapshots[i - 1];
        const auto& b = tr.snapshots[i + 1];
        const double d = (local_energy(b, g, p, psi, b.t) - local_energy(a, g, p, psi, a.t)) / (b.t - a.t);
        worst = std::max(worst, d);
        CHECK(local_energy(tr.snapshots[i], g, p, psi, tr.snapshots[i].t) >= 0);
    }
    MESSAGE("max dE_loc/dt relative to E: " << worst / e0);
    CHECK(worst <= 1e-4 * e0);
}

TEST_CASE("decay report: zero data and short trajectories") {
    const NormParams p = normalize(a_equals_c_line(0.25));
    const Grid g(512, 100 * pi);
    FieldPair z{RVec(g.n, 0.0), RVec(g.n, 0.0), 0.0};
    const auto tr = evolve(z, g, p, SolverConfig{0.1, 10.0, true, 10});
    const auto rep = decay_report(tr, {0.0, 0.3}, {1.5, -1.5});
    REQUIRE(rep.frames.size() == 4);
    for (const auto& f : rep.frames) {
        CHECK(f.samples.size() >= 2);
        for (const auto& s : f.samples) {
            CHECK(s.window_h1 == 0.0);
            CHECK(s.w1 == 0.0);
            CHECK(s.w2 == 0.0);
            CHECK(s.eloc == 0.0);
        }
        CHECK_FALSE(f.flagged);
    }
    CHECK_FALSE(rep.any_flagged());
    CHECK(rep.frames[0].id == "cone_v=0");
    CHECK(rep.frames[0].decay_predicted);
    CHECK(rep.frames[2].decay_predicted);

    const auto short_tr = evolve(z, g, p, SolverConfig{0.1, 1.0, true, 1});
    CHECK(code_of([&] { decay_report(short_tr, {0.0}, {}); }) == ErrorCode::TooShortTrajectory);
    Trajectory empty{g, p, {}};
    CHECK(code_of([&] { virial_residual(empty, 0.0, Weight{}); }) == ErrorCode::TooShortTrajectory);
    ResidualOptions snap;
    snap.from_snapshots = true;
    Trajectory two{g, p, {z, z}};
    CHECK(code_of([&] { virial_residual(two, 0.0, Weight{}, snap); }) == ErrorCode::TooShortTrajectory);
}

TEST_CASE("frames reaching the seam are rejected, not wrapped") {
    const NormParams p = normalize(a_equals_c_line(0.25));
    const Grid g(256, 20 * pi);
    const auto tr = evolve(gaussian_init(g, 0.01, 2.0), g, p, SolverConfig{0.1, 40.0, true, 10});
    const auto rep = decay_report(tr, {0.9}, {});
    REQUIRE(rep.frames.size() == 1);
    CHECK(rep.frames[0].rejected_from.has_value());
    for (const auto& s : rep.frames[0].samples) CHECK(s.t < *rep.frames[0].rejected_from);
}

TEST_CASE("virial residual: linear regime and time reversal") {
    const NormParams p = normalize(from_nu_b(0.5, 0.4));
    const Grid g(512, 64 * pi);
    auto init = gaussian_init(g, 1e-4, 2.0);
    const auto tr = evolve(init, g, p, SolverConfig{0.05, 5.0, false, 10});
    const Weight w{Profile::Tanh, 0.0, 0.0, 5.0};
    ResidualOptions opt;
    opt.h = 5e-5;
    const auto res = virial_residual(tr, 0.2, w, opt);
    for (const auto& r : res) {
        const double scale = std::abs(r.Q) + std::abs(r.SQ) + std::abs(r.NQ) + std::abs(r.VH);
        CHECK(std::abs(r.residual) <= 1e-6 * scale);
        CHECK(r.VH == 0.0);
    }

    // (u, eta, t) -> (-u, eta, -t) is a symmetry: running back from the flipped end state recovers the start
    const auto big = evolve(gaussian_init(g, 0.2, 2.0), g, p, SolverConfig{0.05, 5.0, true, 10});
    auto end = big.snapshots.back();
    for (double& v : end.u) v = -v;
    end.t = 0;
    const auto back = evolve(end, g, p, SolverConfig{0.05, 5.0, true, 100}).snapshots.back();
    double err = 0, nrm = 0;
    for (int j = 0; j < g.n; ++j) {
        err = std::max({err, std::abs(back.u[j] + big.snapshots.front().u[j]), std::abs(back.eta[j] - big.snapshots.front().eta[j])});
        nrm = std::max(nrm, std::abs(big.snapshots.front().u[j]));
    }
    CHECK(err < 1e-8 * nrm);

    // reversed snapshot order flips the sign of the differenced dH/dt
    ResidualOptions snap;
    snap.from_snapshots = true;
    Trajectory rev = big;
    std::reverse(rev.snapshots.begin(), rev.snapshots.end());
    const double T = big.snapshots.back().t;
    for (auto& s : rev.snapshots) s.t = T - s.t;
    const auto fwd = virial_residual(big, 0.2, w, snap), bwd = virial_residual(rev, 0.2, w, snap);
    REQUIRE(fwd.size() == bwd.size());
    for (std::size_t i = 0; i < fwd.size(); ++i)
        CHECK(bwd[fwd.size() - 1 - i].dH_dt_fd == doctest::Approx(-fwd[i].dH_dt_fd).epsilon(1e-12));
}

TEST_CASE("running integral of the interior weighted norm grows sublinearly") {
    const NormParams p = normalize(a_equals_c_line(0.25));
    const Grid g(1024, 200 * pi);
    const auto tr = evolve(gaussian_init(g, 0.05, 3.0), g, p, SolverConfig{0.05, 120.0, true, 20});
    double I = 0, I_half = -1, t_half = 0;
    for (std::size_t i = 1; i < tr.snapshots.size(); ++i) {
        const auto& a = tr.snapshots[i - 1];
        const auto& b = tr.snapshots[i];
        if (a.t < 2) continue;
        auto f = [&](const FieldPair& s) {
            Weight w{Profile::Sech2, 0.0, 0.0, std::nullopt};
            return weighted_norm(s, g, w, s.t) / lambda_law(s.t);
        };
        I += 0.5 * (f(a) + f(b)) * (b.t - a.t);
        if (I_half < 0 && b.t >= 60) {
            I_half = I;
            t_half = b.t;
        }
    }
    const double T = tr.snapshots.back().t;
    MESSAGE("running integral at t=" << t_half << ": " << I_half << ", at t=" << T << ": " << I);
    CHECK(std::isfinite(I));
    CHECK(I / (T - 2) < I_half / (t_half - 2));
}
