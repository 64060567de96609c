#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "diraclab/fields.hpp"
#include "diraclab/zeromodes.hpp"

using namespace diraclab;

namespace {

RadialFieldSpec one_plus_r2_field(double R, double vscale = 0.0, double voffset = 0.0) {
    // B = 1 + r^2, v = vscale * sqrt(2B) + voffset, tabulated densely
    RadialTable tab;
    const int n = 1600;
    for (int i = 0; i <= n; ++i) {
        const double r = R * i / n;
        const double B = 1.0 + r * r;
        tab.r.push_back(r);
        tab.B.push_back(B);
        tab.v.push_back(vscale * std::sqrt(2.0 * B) + voffset);
    }
    return RadialFieldSpec::tabulated(tab);
}

} // namespace

TEST_CASE("zero mode norms against the Gaussian oracle") {
    auto view = make_view(RadialFieldSpec::power_law(1e-300, 1.0, 0.0, 0.0));
    const RadialGrid grid = build_radial_grid(20.0, 400);
    // |Omega_0|^2 = 2 pi \int r e^{-r^2/2} dr = 2 pi (Gaussian oracle)
    const ZeroMode m0 = build_zero_mode(view, 0, grid);
    CHECK(m0.log_norm2 == Catch::Approx(std::log(2.0 * M_PI)).margin(1e-10));
    // |Omega_1|^2 / |Omega_0|^2 = 2/B0 (Gamma-integral oracle)
    const ZeroMode m1 = build_zero_mode(view, 1, grid);
    CHECK(std::exp(m1.log_norm2 - m0.log_norm2) == Catch::Approx(2.0).epsilon(1e-10));
    CHECK(m0.mass_tail < 1e-6);
}

TEST_CASE("flat-phase test hook is rejected as non-normalizable") {
    auto view = make_view(RadialFieldSpec::power_law(1.0, 1.0, 1.0, 0.0));
    const RadialGrid grid = build_radial_grid(10.0, 100);
    CHECK_THROWS_AS(build_zero_mode(view, 0, grid, [](double) { return 0.0; }), Error);
    try {
        build_zero_mode(view, 0, grid, [](double) { return 0.0; });
    } catch (const Error& e) {
        CHECK(e.code() == "E_ZEROMODE_TAIL");
    }
}

TEST_CASE("max_degree reports the largest mode the radius supports") {
    auto view = make_view(RadialFieldSpec::power_law(1e-300, 1.0, 0.0, 0.0));
    const RadialGrid gridA = build_radial_grid(10.0, 100);
    const RadialGrid gridB = build_radial_grid(16.0, 100);
    const int mA = max_degree(view, gridA);
    const int mB = max_degree(view, gridB);
    CHECK(mA >= 10);
    CHECK(mB > mA);  // a larger box supports more degrees
}

TEST_CASE("annihilation residual is pure stencil error") {
    auto view = make_view(RadialFieldSpec::power_law(1e-300, 1.0, 0.0, 0.0));
    const RadialGrid grid = build_radial_grid(16.0, 100);
    const ZeroMode mode = build_zero_mode(view, 2, grid);
    const double res1 = residual_d(mode, 1e-3);
    CHECK(res1 < 1e-3);
    SECTION("second-order stencil: halving the step divides by about four") {
        const double res2 = residual_d(mode, 5e-4);
        CHECK(res1 / res2 == Catch::Approx(4.0).epsilon(0.25));
    }
    SECTION("negative control: flipped gauge ruins annihilation") {
        ZeroMode bad = mode;
        auto A = view.A;
        bad.field.A = [A](double r) { return -A(r); };
        CHECK(residual_d(bad, 1e-3) > 0.5);
    }
}

TEST_CASE("adjoint-image norm identity") {
    SECTION("constant field: |d* Omega_0|^2 = 2 B0 |Omega_0|^2") {
        for (double B0 : {1.0, 2.0}) {
            auto view = make_view(RadialFieldSpec::power_law(1e-300, B0, 0.0, 0.0));
            const RadialGrid grid = build_radial_grid(20.0, 400);
            const ZeroMode mode = build_zero_mode(view, 0, grid);
            const DstarImage img = dstar_on_zero_mode(mode);
            CHECK(img.identity_relerr < 1e-8);
            CHECK(std::exp(img.log_norm2 - mode.log_norm2) == Catch::Approx(2.0 * B0).epsilon(1e-8));
        }
    }
    SECTION("growing tabulated field B = 1 + r^2") {
        auto view = make_view(one_plus_r2_field(8.0));
        const RadialGrid grid = build_radial_grid(8.0, 200);
        for (int m : {0, 3}) {
            const ZeroMode mode = build_zero_mode(view, m, grid);
            const DstarImage img = dstar_on_zero_mode(mode);
            CHECK(img.identity_relerr < 1e-8);
        }
    }
}

TEST_CASE("commutator expectation matches 2B to 1e-6") {
    // with d Omega = 0 the commutator expectation reduces to |d* Omega|^2,
    // and the identity pins it to <Omega, 2B Omega>
    auto view = make_view(one_plus_r2_field(8.0));
    const RadialGrid grid = build_radial_grid(8.0, 200);
    const ZeroMode mode = build_zero_mode(view, 1, grid);
    const DstarImage img = dstar_on_zero_mode(mode);
    CHECK(img.identity_relerr < 1e-6);
}

TEST_CASE("bounded pair: ratio under the analytic constant, norm above the floor") {
    const RadialGrid grid = build_radial_grid(8.0, 200);
    SECTION("matched family V = sqrt(2B): mismatch term vanishes") {
        auto view = make_view(one_plus_r2_field(8.0, 1.0));
        for (int m = 0; m <= 5; ++m) {
            const ZeroModePair pair = build_zero_mode_pair(view, m, grid);
            CHECK(pair.ratio <= pair.bound * (1.0 + 1e-6));
            // |psi|^2 >= 2 B0 |Omega|^2 with B0 = inf B = 1
            CHECK(pair.log_psi2 >=
                  std::log(2.0 * view.B_lower) + pair.omega.log_norm2 - 1e-9);
        }
    }
    SECTION("offset family V = sqrt(2B) + 1 gains the mismatch term and still fits") {
        auto view = make_view(one_plus_r2_field(8.0, 1.0, 1.0));
        for (int m : {0, 2, 5}) {
            const ZeroModePair pair = build_zero_mode_pair(view, m, grid);
            CHECK(pair.ratio <= pair.bound * (1.0 + 1e-6));
        }
    }
    SECTION("degenerate clamp: constant B with V = sqrt(2 B0) gives ratio 0") {
        auto view = make_view(RadialFieldSpec::power_law(std::sqrt(2.0), 1.0, 0.0, 0.0));
        const ZeroModePair pair = build_zero_mode_pair(view, 0, grid);
        CHECK(pair.ratio < 1e-9);
    }
    SECTION("unbounded grad V / V is a precondition error") {
        auto view = make_view(RadialFieldSpec::power_law(1.0, 1.0, 1.0, 0.0));  // v(0) = 0
        CHECK_THROWS_AS(build_zero_mode_pair(view, 0, grid), Error);
    }
}
