#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "abcd/region_atlas.hpp"
#include "abcd/virial.hpp"

#include <algorithm>
#include <functional>
#include <random>
#include <sstream>

using namespace abcd;

static ErrorCode code_of(auto&& f) {
    try {
        f();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("no error thrown");
    return ErrorCode::ConfigError;
}

// smallest b on the a = c line where pred flips from false to true, by bisection
static double flip_point(const std::function<bool(double)>& pred, double lo, double hi) {
    REQUIRE(!pred(lo));
    REQUIRE(pred(hi));
    while (hi - lo > 1e-13) {
        const double mid = 0.5 * (lo + hi);
        (pred(mid) ? hi : lo) = mid;
    }
    return 0.5 * (lo + hi);
}

// sign changes of f on (lo, hi), refined by bisection
static std::vector<double> roots_of(const std::function<double(double)>& f, double lo, double hi, int n = 20000) {
    std::vector<double> r;
    double x0 = lo, f0 = f(lo);
    for (int i = 1; i <= n; ++i) {
        const double x1 = lo + (hi - lo) * i / n, f1 = f(x1);
        if ((f0 < 0) != (f1 < 0)) {
            double a = x0, b = x1, fa = f0;
            for (int k = 0; k < 200; ++k) {
                const double m = 0.5 * (a + b), fm = f(m);
                if ((fm < 0) == (fa < 0)) {
                    a = m;
                    fa = fm;
                } else {
                    b = m;
                }
            }
            r.push_back(0.5 * (a + b));
        }
        x0 = x1;
        f0 = f1;
    }
    return r;
}

TEST_CASE("dispersion-like examples") {
    CHECK(is_dispersion_like(validate_phys(-1.0 / 12, 0.25, -1.0 / 12, 0.25)));
    CHECK_FALSE(is_dispersion_like(validate_phys(-1.0 / 18, 2.0 / 9, -1.0 / 18, 2.0 / 9)));
    CHECK_FALSE(is_dispersion_like(validate_phys(-1.0 / 48, 3.0 / 16, -1.0 / 48, 3.0 / 16)));
}

TEST_CASE("refined dispersion-like examples") {
    CHECK(is_refined_dispersion_like(a_equals_c_line(0.2)));
    CHECK_FALSE(is_refined_dispersion_like(a_equals_c_line(3.0 / 16)));
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> U(0, 1);
    int n = 0;
    while (n < 5000) {
        const double b = 1.0 / 6 + 2 * U(rng), nu = U(rng);
        if (!in_R0(nu, b)) continue;
        const auto p = from_nu_b(nu, b);
        if (!is_dispersion_like(p)) continue;
        ++n;
        CHECK(is_refined_dispersion_like(p));
    }
}

TEST_CASE("a = c line: boundaries by bisection") {
    auto disp = [](double b) { return is_dispersion_like(a_equals_c_line(b)); };
    auto refd = [](double b) { return is_refined_dispersion_like(a_equals_c_line(b)); };
    CHECK(std::abs(flip_point(disp, 0.17, 0.4) - 2.0 / 9) < 1e-10);
    CHECK(std::abs(flip_point(refd, 0.17, 0.4) - 3.0 / 16) < 1e-10);
    for (double b = 0.17; b < 1.0; b += 0.001)
        if (disp(b)) CHECK(refd(b));
}

TEST_CASE("kappa scales") {
    const auto k = kappa_scales(0.5);
    CHECK(k.kappa0 == doctest::Approx(0.125).epsilon(1e-15));
    CHECK(k.b0 == doctest::Approx(8.0 / 9).epsilon(1e-15));
    CHECK(k.v0_plus == doctest::Approx(0.75));
    CHECK_FALSE(k.b2.has_value());
    const auto k0 = kappa_scales(1e-12);
    CHECK(k0.kappa0 == doctest::Approx(0.25));
    CHECK(k0.b0 == doctest::Approx(4.0 / 9));
    CHECK(k0.b1 == doctest::Approx(1.0 / 3));
    const auto k9 = kappa_scales(0.9);
    CHECK(k9.kappa0 == doctest::Approx(0.025));
    REQUIRE(k9.b2.has_value());
    for (int i = 1; i < 1000; ++i) {
        const auto s = kappa_scales(i / 1000.0);
        CHECK(s.kappa0 > 0);
        CHECK(s.kappa0 < 0.25);
        CHECK(s.b0 > s.b1);
        CHECK(s.b2.has_value() == (s.kappa0 < kKappaCrit));
        if (s.b2) {
            CHECK(s.b0 > *s.b2);
            CHECK(*s.b2 > s.b1);
        }
    }
    CHECK(code_of([] { kappa_scales(0.0); }) == ErrorCode::V0OutOfRange);
    CHECK(code_of([] { kappa_scales(1.0); }) == ErrorCode::V0OutOfRange);
}

TEST_CASE("thresholds: ordering over sampled (kappa0, b)") {
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> U(0, 1);
    for (int i = 0; i < 20000; ++i) {
        const double q = 1e-4 + (0.25 - 2e-4) * U(rng), b = 1.0 / 6 + 1e-6 + 4 * U(rng);
        const auto t = thresholds(q, b);
        CHECK(t.r_minus < t.r_plus);
        CHECK(t.rt_minus < t.rt_plus);
        CHECK(t.r_minus > 2.0 / 3 - 2 * b);
        CHECK(t.rt_plus < 2 * b);
        CHECK(t.s_minus.has_value() == (q < kKappaCrit));
        if (t.s_minus) {
            CHECK(t.r_minus < *t.s_minus);
            CHECK(*t.s_minus < *t.s_plus);
            CHECK(*t.s_plus < t.r_plus);
            CHECK(t.rt_minus < *t.st_minus);
            CHECK(*t.st_minus < *t.st_plus);
            CHECK(*t.st_plus < t.rt_plus);
        }
        const double b1 = 1.0 / (2 * (2 * q + 1));
        if (b > b1) CHECK(t.r_plus < t.rt_plus);
    }
    CHECK(code_of([] { thresholds(0.0, 1.0); }) == ErrorCode::KappaOutOfRange);
    CHECK(code_of([] { thresholds(0.25, 1.0); }) == ErrorCode::KappaOutOfRange);
    CHECK(code_of([] { thresholds(0.1, 1.0 / 6); }) == ErrorCode::BTooSmall);
}

TEST_CASE("thresholds are the crossings of the bar bounds") {
    // independent oracle: sign changes of the differences of the closed forms
    for (double q : {0.1, 0.05, 0.02}) {
        for (double b : {1.0, 0.4, 2.5}) {
            const auto t = thresholds(q, b);
            auto bb = [&](double nu) { return bar_bounds(q, nu, b); };
            const double nlo = 2.0 / 3 - 2 * b, eps = 1e-9;
            auto a34 = roots_of([&](double nu) { return bb(nu).A3 - bb(nu).A4; }, std::max(nlo, -5.0) + eps, 2.0 / 3);
            REQUIRE(a34.size() == 2);
            CHECK(a34[0] == doctest::Approx(t.r_minus).epsilon(1e-9));
            CHECK(a34[1] == doctest::Approx(t.r_plus).epsilon(1e-9));
            auto b34 = roots_of([&](double nu) { return bb(nu).B3 - bb(nu).B4; }, eps, 2 * b - eps);
            REQUIRE(b34.size() == 2);
            CHECK(b34[0] == doctest::Approx(t.rt_minus).epsilon(1e-9));
            CHECK(b34[1] == doctest::Approx(t.rt_plus).epsilon(1e-9));
            if (t.s_minus) {
                auto a23 = roots_of([&](double nu) { return bb(nu).A2 - bb(nu).A3; }, std::max(nlo, -5.0) + eps, 2.0 / 3);
                REQUIRE(a23.size() == 2);
                CHECK(a23[0] == doctest::Approx(*t.s_minus).epsilon(1e-9));
                CHECK(a23[1] == doctest::Approx(*t.s_plus).epsilon(1e-9));
                auto b23 = roots_of([&](double nu) { return bb(nu).B2 - bb(nu).B3; }, eps, 2 * b - eps);
                REQUIRE(b23.size() == 2);
                CHECK(b23[0] == doctest::Approx(*t.st_minus).epsilon(1e-9));
                CHECK(b23[1] == doctest::Approx(*t.st_plus).epsilon(1e-9));
            }
        }
    }
}

TEST_CASE("bar bounds: branch tables agree with brute force on R0 grids") {
    for (double q : {0.2, 0.1, kKappaCrit, 0.05, 0.01}) {
        int cells = 0;
        for (int i = 0; i < 200; ++i)
            for (int j = 0; j < 200; ++j) {
                const double nu = (i + 0.5) / 200, b = 1.0 / 6 + 3.0 * (j + 0.5) / 200;
                if (!in_R0(nu, b)) continue;
                ++cells;
                const auto r = bar_bounds(q, nu, b);
                const double mn = std::min({r.A2, r.A3, r.A4}), mx = std::max({r.B2, r.B3, r.B4});
                CHECK(std::abs(r.min_A - mn) <= 1e-12 * (1 + std::abs(mn)));
                CHECK(std::abs(r.max_B - mx) <= 1e-12 * (1 + std::abs(mx)));
            }
        CHECK(cells > 10000);
    }
    // the two named table entries
    const double q = 0.02, b = 1.0;
    const auto t = thresholds(q, b);
    REQUIRE(t.s_minus.has_value());
    CHECK(bar_bounds(q, 0.5 * (*t.s_minus + *t.s_plus), b).min_A_index == 2);
    CHECK(bar_bounds(q, t.r_minus - 0.01, b).min_A_index == 4);
}

TEST_CASE("alpha window: R_sharp implies a window whose alphas make the star coefficients nonnegative") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> U(0, 1);
    int hits = 0, draws = 0;
    while (hits < 10000) {
        ++draws;
        const double v0 = 0.01 + 0.9 * U(rng);
        const double b0 = kappa_scales(v0).b0;
        const double b = b0 + 4 * U(rng), nu = U(rng);
        if (!in_R0(nu, b) || !in_R_sharp(v0, nu, b)) continue;
        ++hits;
        const auto w = alpha_window(v0, from_nu_b(nu, b));
        REQUIRE(w.has_value());
        for (double s : {0.0, 0.5, 1.0, U(rng)}) {
            const double alpha = w->lo + s * (w->hi - w->lo);
            const auto st = star_coeffs(nu, b, alpha, v0);
            for (int i = 0; i < 4; ++i) {
                CHECK(st.A[i] >= -1e-12);
                CHECK(st.B[i] >= -1e-12);
            }
        }
    }
    CHECK(draws < 200000);
}

TEST_CASE("alpha window closes when b drops at nu = 1/3") {
    const double v0 = 0.5;
    auto open = [&](double b) { return alpha_window(v0, from_nu_b(1.0 / 3, b)).has_value(); };
    REQUIRE(open(2.0));
    double b = 2.0;
    while (b > 0.2 && open(b)) b -= 1e-3;
    CHECK_FALSE(open(b));
    CHECK(b > 1.0 / 6);
    CHECK(open(b + 1e-3));
}

TEST_CASE("R_sharp membership") {
    CHECK(in_R_sharp(0.5, 1.0 / 3, 2.0));
    const double b0 = kappa_scales(0.5).b0;
    for (double nu : {0.1, 1.0 / 3, 0.6})
        for (double b : {b0 - 0.2, b0 - 1e-6})
            if (in_R0(nu, b)) CHECK_FALSE(in_R_sharp(0.5, nu, b));
}

TEST_CASE("exterior conditions") {
    const auto p = a_equals_c_line(0.25);
    CHECK(exterior_conditions(p).ellipse);
    // sigma_min tends to 3 for large b along a ray
    const auto far = exterior_conditions(from_nu_b(1.0 / 3, 1e6));
    CHECK(far.sigma_min == doctest::Approx(3.0).epsilon(1e-5));
    const auto far2 = exterior_conditions(from_nu_b(0.7, 1e6));
    CHECK(far2.sigma_min == doctest::Approx(3.0).epsilon(1e-5));

    int ell = 0, hyp = 0;
    for (int i = 0; i < 400; ++i)
        for (int j = 0; j < 400; ++j) {
            const double nu = (i + 0.5) / 400, b = 1.0 / 6 + 2.0 * (j + 0.5) / 400;
            if (!in_R0(nu, b)) continue;
            const auto t = from_nu_b(nu, b).triple();
            const auto e = exterior_conditions(t);
            if (e.ellipse) {
                ++ell;
                for (int k = 1; k < 4; ++k) CHECK(e.sigma_terms[k] <= 1 + 1e-12);
                CHECK(e.sigma_min == doctest::Approx(1.0).epsilon(1e-12));
            }
            if (e.hyperbola) {
                ++hyp;
                CHECK(e.sigma_min == doctest::Approx(3 * std::sqrt(t.a * t.c) / t.b).epsilon(1e-12));
                // the region in (a,c) sits inside the (nu,b) printing
                CHECK(hyperbola_nu_form(nu, b));
            }
        }
    CHECK(ell > 0);
    CHECK(hyp > 0);
}

TEST_CASE("sigma on the a = c line") {
    CHECK(std::abs(sigma_ac(kBCrit) - 1.0) < 1e-10);
    CHECK(std::abs(sigma_ac(kBCrit * (1 + 1e-13)) - 1.0) < 1e-10);
    CHECK(sigma_ac(1e9) == doctest::Approx(2.0).epsilon(1e-8));
    CHECK(sigma_ac(0.25) == 1.0);
    CHECK(sigma_ac(1.0) > 1.0);
    CHECK(code_of([] { sigma_ac(1.0 / 6); }) == ErrorCode::BTooSmall);
}

TEST_CASE("obstruction set is empty on R0") {
    int cells = 0;
    for (int i = 0; i < 400; ++i)
        for (int j = 0; j < 400; ++j) {
            const double nu = (i + 0.5) / 400, b = 1.0 / 6 + 3.0 * (j + 0.5) / 400;
            if (!in_R0(nu, b)) continue;
            ++cells;
            CHECK_FALSE(obstruction_set(from_nu_b(nu, b).triple()));
        }
    CHECK(cells > 0);
}

TEST_CASE("classify on and off the a = c line") {
    CHECK(classify(a_equals_c_line(0.18)).label == ScenarioLabel::ExteriorOnly_b_le_3_16);
    CHECK(classify(a_equals_c_line(3.0 / 16)).label == ScenarioLabel::ExteriorOnly_b_le_3_16);
    CHECK(classify(a_equals_c_line(0.21)).label == ScenarioLabel::ExteriorPlusOrigin_b_le_2_9);
    CHECK(classify(a_equals_c_line(2.0 / 9)).label == ScenarioLabel::ExteriorPlusOrigin_b_le_2_9);
    const auto s = classify(a_equals_c_line(0.3));
    CHECK(s.label == ScenarioLabel::ConeBand_b_le_crit);
    REQUIRE(s.v_max.has_value());
    CHECK(*s.v_max == doctest::Approx(1 - 2.0 / (9 * 0.3)).epsilon(1e-15));
    const auto big = classify(a_equals_c_line(1.0));
    CHECK(big.label == ScenarioLabel::ConeBand_sigma_b);
    CHECK(*big.sigma == doctest::Approx(sigma_ac(1.0)));
    const auto off = classify(from_nu_b(0.5, 0.4), 0.3);
    CHECK(off.label == ScenarioLabel::NotClassified);
    CHECK(off.refined == is_refined_dispersion_like(from_nu_b(0.5, 0.4)));
    REQUIRE(off.r_sharp.has_value());
    CHECK(*off.r_sharp == in_R_sharp(0.3, 0.5, 0.4));
}

TEST_CASE("rasterize") {
    RasterSpec spec;
    CHECK(code_of([&] { rasterize(spec); }) == ErrorCode::BadRange);
    spec.predicates = {Predicate::DispersionLike, Predicate::Refined};
    spec.nx = 1;
    CHECK(code_of([&] { rasterize(spec); }) == ErrorCode::BadRange);
    spec.nx = 301;
    spec.ny = 401;
    spec.y_lo = 1.0 / 6;
    spec.y_hi = 0.5;
    const auto m = rasterize(spec);
    const auto m2 = rasterize(spec);
    CHECK(m.layers[0].value == m2.layers[0].value);
    CHECK(m.layers[1].boundary == m2.layers[1].boundary);
    CHECK(m.layers.size() == 2);
    for (const auto& l : m.layers) CHECK(l.value.size() == std::size_t(301 * 401));

    // column nu = 1/3: lowest true cell sits at the known b
    const int i = 100;
    const double db = (spec.y_hi - spec.y_lo) / (spec.ny - 1);
    auto lowest = [&](int layer) {
        for (int j = 0; j < spec.ny; ++j)
            if (m.valid[m.index(i, j)] && m.layers[layer].value[m.index(i, j)]) return m.ys[j];
        return -1.0;
    };
    CHECK(std::abs(lowest(0) - 2.0 / 9) <= db);
    CHECK(std::abs(lowest(1) - 3.0 / 16) <= db);
    // the dispersion-like region dips lowest on that column
    double global_low = 1;
    for (int ii = 0; ii < spec.nx; ++ii)
        for (int j = 0; j < spec.ny; ++j)
            if (m.valid[m.index(ii, j)] && m.layers[0].value[m.index(ii, j)]) global_low = std::min(global_low, m.ys[j]);
    CHECK(std::abs(global_low - 2.0 / 9) <= db);

    std::ostringstream csv;
    write_csv(m, csv);
    const auto text = csv.str();
    CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 301 * 401 * 2);
    CHECK(text.rfind("x,y,predicate,value,boundary\n", 0) == 0);

    RasterSpec ac;
    ac.axes = Axes::AC;
    ac.x_lo = -0.5;
    ac.x_hi = -1e-3;
    ac.y_lo = -0.5;
    ac.y_hi = -1e-3;
    ac.nx = ac.ny = 50;
    ac.fixed_b = 0.3;
    ac.predicates = {Predicate::RSharp};
    CHECK(code_of([&] { rasterize(ac); }) == ErrorCode::BadRange);
    ac.v0 = 0.2;
    CHECK_NOTHROW(rasterize(ac));
    CHECK(parse_predicate("hyperbola") == Predicate::Hyperbola);
    CHECK(code_of([] { parse_predicate("nope"); }) == ErrorCode::ConfigError);
}
