#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "diraclab/fields.hpp"

using namespace diraclab;

namespace {

RadialTable sample_table(double rmax, int n, double (*vf)(double), double (*bf)(double)) {
    RadialTable tab;
    for (int i = 0; i <= n; ++i) {
        const double r = rmax * i / n;
        tab.r.push_back(r);
        tab.v.push_back(vf(r));
        tab.B.push_back(bf(r));
    }
    return tab;
}

// Independent high-resolution trapezoid oracles for the tabulated integrals.
double trapezoid_A(double (*bf)(double), double r, int n = 2000000) {
    double sum = 0.0;
    const double h = r / n;
    for (int i = 0; i < n; ++i) {
        const double a = i * h, b = (i + 1) * h;
        sum += 0.5 * h * (bf(a) * a + bf(b) * b);
    }
    return sum / r;
}

double trapezoid_phi(double (*bf)(double), double r, int n = 4000) {
    double sum = 0.0;
    const double h = r / n;
    double prev = 0.0;  // A(0) = 0
    for (int i = 1; i <= n; ++i) {
        const double u = i * h;
        const double a = trapezoid_A(bf, u, 2000);
        sum += 0.5 * h * (prev + a);
        prev = a;
    }
    return sum;
}

double one_plus_r(double r) { return 1.0 + r; }
double v_zero(double) { return 0.0; }

} // namespace

TEST_CASE("eval_radial_A closed forms and oracle") {
    SECTION("power law") {
        CHECK(eval_radial_A(RadialFieldSpec::power_law(1, 1, 0, 1), 2.0) ==
              Catch::Approx(8.0 / 3.0).epsilon(1e-12));
        // constant field: A = B r / 2
        CHECK(eval_radial_A(RadialFieldSpec::power_law(1, 1, 0, 0), 3.0) ==
              Catch::Approx(1.5).epsilon(1e-12));
        CHECK(eval_radial_A(RadialFieldSpec::power_law(1, 1, 0, 0), 0.0) == 0.0);
    }
    SECTION("tabulated B(r) = 1 + r against the trapezoid oracle (= 7/3 at r=2)") {
        auto spec = RadialFieldSpec::tabulated(sample_table(4.0, 400, v_zero, one_plus_r));
        const double oracle = trapezoid_A(one_plus_r, 2.0);
        CHECK(oracle == Catch::Approx(7.0 / 3.0).epsilon(1e-9));
        CHECK(eval_radial_A(spec, 2.0) == Catch::Approx(oracle).epsilon(1e-8));
    }
    SECTION("domain errors") {
        CHECK_THROWS_AS(eval_radial_A(RadialFieldSpec::power_law(1, 1, 1, 1), -1.0), Error);
        auto spec = RadialFieldSpec::tabulated(sample_table(4.0, 40, v_zero, one_plus_r));
        CHECK_THROWS_AS(eval_radial_A(spec, 5.0), Error);
    }
}

TEST_CASE("eval_flux_phi closed forms and oracle") {
    CHECK(eval_flux_phi(RadialFieldSpec::power_law(1, 1, 0, 0), 2.0) ==
          Catch::Approx(1.0).epsilon(1e-12));
    CHECK(eval_flux_phi(RadialFieldSpec::power_law(1, 2, 0, 1), 3.0) ==
          Catch::Approx(6.0).epsilon(1e-12));
    SECTION("tabulated nested oracle (= 17/9 at r=2 for B = 1 + r)") {
        auto spec = RadialFieldSpec::tabulated(sample_table(4.0, 400, v_zero, one_plus_r));
        const double oracle = trapezoid_phi(one_plus_r, 2.0);
        CHECK(oracle == Catch::Approx(17.0 / 9.0).epsilon(1e-6));
        CHECK(eval_flux_phi(spec, 2.0) == Catch::Approx(oracle).epsilon(1e-6));
    }
}

TEST_CASE("phi' = A for power-law specs") {
    auto spec = RadialFieldSpec::power_law(2.0, 1.5, 1.2, 0.7);
    RadialFieldView view = make_view(spec);
    for (double r : {0.5, 1.0, 2.0, 5.0}) {
        const double h = 1e-6 * (1.0 + r);
        const double dphi = (view.phi(r + h) - view.phi(r - h)) / (2.0 * h);
        CHECK(dphi == Catch::Approx(view.A(r)).epsilon(1e-6));
    }
}

TEST_CASE("lift_to_2d rotational gauge") {
    SECTION("constant field") {
        Field2DSpec f = lift_to_2d(RadialFieldSpec::power_law(1, 1, 0, 0));
        const Vec2 a = f.A({1.0, 0.0});
        CHECK(a[0] == Catch::Approx(0.0).margin(1e-14));
        CHECK(a[1] == Catch::Approx(0.5).epsilon(1e-13));
    }
    SECTION("linear field at (0,2)") {
        Field2DSpec f = lift_to_2d(RadialFieldSpec::power_law(1, 1, 0, 1));
        const Vec2 a = f.A({0.0, 2.0});
        CHECK(a[0] == Catch::Approx(-8.0 / 3.0).epsilon(1e-12));
        CHECK(a[1] == Catch::Approx(0.0).margin(1e-14));
    }
    SECTION("potential and gradient") {
        Field2DSpec f = lift_to_2d(RadialFieldSpec::power_law(1, 1, 2, 0));
        CHECK(f.V({1.0, 1.0}) == Catch::Approx(2.0).epsilon(1e-13));
        const Vec2 g = f.gradV({1.0, 1.0});
        CHECK(g[0] == Catch::Approx(2.0).epsilon(1e-12));
        CHECK(g[1] == Catch::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("curl of the lifted gauge equals B at random points") {
    std::mt19937 rng(12345);
    std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI), radius(0.2, 6.0);
    for (const auto& spec :
         {RadialFieldSpec::power_law(1, 1, 1, 0), RadialFieldSpec::power_law(1, 2, 0.5, 1),
          RadialFieldSpec::power_law(2, 1.3, 2, 3)}) {
        Field2DSpec f = lift_to_2d(spec);
        std::vector<Vec2> pts;
        for (int i = 0; i < 100; ++i) {
            const double r = radius(rng), th = angle(rng);
            pts.push_back({r * std::cos(th), r * std::sin(th)});
        }
        CHECK(max_curl_mismatch(f, pts) < 1e-6);
    }
}

TEST_CASE("spec validation") {
    auto bad_v = RadialFieldSpec::power_law(-1, 1, 1, 1);
    CHECK_THROWS_AS(validate(bad_v), Error);
    try {
        validate(bad_v);
    } catch (const Error& e) {
        CHECK(e.code() == "E_SPEC_V0_NONPOSITIVE");
    }
    CHECK_THROWS_AS(validate(RadialFieldSpec::power_law(1, 0, 1, 1)), Error);

    RadialTable tab;
    tab.r = {0.0, 1.0, 0.5};
    tab.v = {0, 0, 0};
    tab.B = {1, 1, 1};
    CHECK_THROWS_AS(validate(RadialFieldSpec::tabulated(tab)), Error);
    tab.r = {0.0, 0.5, 1.0};
    tab.B = {1, 0, 1};
    CHECK_THROWS_AS(validate(RadialFieldSpec::tabulated(tab)), Error);
}

TEST_CASE("JSON round trip") {
    auto spec = RadialFieldSpec::power_law(1.5, 2.0, 0.6, 1.0, 0.25);
    auto back = spec_from_json(spec_to_json(spec));
    CHECK(back.V0 == spec.V0);
    CHECK(back.B0 == spec.B0);
    CHECK(back.t == spec.t);
    CHECK(back.s == spec.s);
    CHECK(back.E == spec.E);

    const auto j = nlohmann::json::parse(R"({"kind":"PowerLaw","V0":-1,"B0":1,"t":1,"s":1})");
    CHECK_THROWS_AS(spec_from_json(j), Error);
}

TEST_CASE("A(r)/V(r) asymptotics drive the (a)/(b) split arithmetically") {
    // For t = s+1 the ratio A/V tends to B0/((s+2) V0) exactly.
    const double V0 = 2.0, B0 = 3.0, s = 1.0, t = s + 1.0;
    auto view = make_view(RadialFieldSpec::power_law(V0, B0, t, s));
    const double r = 1e6;
    CHECK(view.A(r) / view.v(r) == Catch::Approx(B0 / ((s + 2.0) * V0)).epsilon(1e-12));
}
