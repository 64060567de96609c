#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <vector>

#include "diraclab/error.hpp"
#include "diraclab/fields.hpp"
#include "diraclab/quadrature.hpp"
#include "diraclab/radial_operator.hpp"

namespace diraclab {

// ---------------------------------------------------------------------------
// Kernel states of the off-diagonal factor d: Omega_m = z^m e^{-phi(r)} with
// phi the radial flux function (Laplacian of phi recovers B). Profiles are
// evaluated with an exponent shift so degrees in the hundreds stay finite;
// every published quantity is a ratio, so the shift cancels.
// ---------------------------------------------------------------------------

namespace detail {

// Peak location of f(r) = a ln r - 2 phi(r) on (0, R]: f' = a/r - 2A(r) has a
// single sign change since A is nondecreasing.
inline double log_profile_peak(const RadialFieldView& field, double a, double R) {
    if (a <= 0.0) return std::min(1e-8, R);
    auto fp = [&](double r) { return a / r - 2.0 * field.A(r); };
    double lo = 1e-12 * R, hi = R;
    if (fp(hi) >= 0.0) return hi;
    for (int it = 0; it < 200; ++it) {
        const double mid = 0.5 * (lo + hi);
        (fp(mid) > 0.0 ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

// log of \int_lo^hi exp(a ln r - 2 phi(r)) w(r) dr for w >= 0, scaled by the
// peak exponent so the quadrature never overflows.
template <class W>
double log_radial_integral(const RadialFieldView& field, double a, double lo, double hi,
                           double shift, const W& w) {
    auto integrand = [&](double r) {
        if (r <= 0.0) return 0.0;
        const double e = a * std::log(r) - 2.0 * field.phi(r) - shift;
        if (e < -745.0) return 0.0;
        return std::exp(e) * w(r);
    };
    const double val = integrate_adaptive(integrand, lo, hi, 1e-12, 1e-300);
    return shift + std::log(std::max(val, 1e-300));
}

inline double peak_shift(const RadialFieldView& field, double a, double R) {
    const double rp = log_profile_peak(field, a, R);
    return (rp > 0.0 && a > 0.0 ? a * std::log(rp) : 0.0) - 2.0 * field.phi(rp);
}

} // namespace detail

struct ZeroMode {
    int m = 0;
    double R = 0.0;
    double log_norm2 = 0.0;   // log |Omega|^2 over the disc of radius R
    double mass_tail = 0.0;   // share of |Omega|^2 beyond 0.9 R
    double scale_shift = 0.0; // profile is evaluated as exp(m ln r - phi - scale_shift)
    std::function<double(double)> phi;
    RadialFieldView field;

    double norm2() const { return std::exp(log_norm2); }

    // scaled radial profile r^m e^{-phi} e^{-scale_shift}
    double profile(double r) const {
        if (r <= 0.0) return m == 0 ? std::exp(-phi(0.0) - scale_shift) : 0.0;
        const double e = m * std::log(r) - phi(r) - scale_shift;
        return e < -745.0 ? 0.0 : std::exp(e);
    }

    // scaled planar value z^m e^{-phi}
    std::complex<double> eval(Vec2 x) const {
        const double r = std::hypot(x[0], x[1]);
        const std::complex<double> z{x[0], x[1]};
        if (m == 0) return profile(r);
        if (r <= 0.0) return 0.0;
        const std::complex<double> phase = std::pow(z / r, m);
        return profile(r) * phase;
    }
};

inline ZeroMode build_zero_mode(const RadialFieldView& field, int m, const RadialGrid& grid,
                                std::function<double(double)> phi_override = {}) {
    require(m >= 0, "E_ZEROMODE_DEGREE", "monomial degree must be >= 0");
    ZeroMode mode;
    mode.m = m;
    mode.R = grid.R;
    mode.field = field;
    mode.phi = phi_override ? std::move(phi_override) : field.phi;

    const double a = 2.0 * m + 1.0; // weight exponent including the area Jacobian
    RadialFieldView probe = field;
    auto phi_fn = mode.phi;
    probe.phi = phi_fn;
    const double shift = detail::peak_shift(probe, a, grid.R);
    mode.scale_shift = 0.5 * shift;

    const auto one = [](double) { return 1.0; };
    const double log_total =
        std::log(2.0 * M_PI) + detail::log_radial_integral(probe, a, 0.0, grid.R, shift, one);
    const double log_tail = std::log(2.0 * M_PI) + detail::log_radial_integral(
                                                       probe, a, 0.9 * grid.R, grid.R, shift, one);
    mode.log_norm2 = log_total;
    mode.mass_tail = std::exp(log_tail - log_total);
    require(mode.mass_tail < 1e-6, "E_ZEROMODE_TAIL",
            "mode mass reaches the truncation wall; increase R");
    return mode;
}

inline ZeroMode build_zero_mode(const RadialFieldSpec& spec, int m, const RadialGrid& grid) {
    return build_zero_mode(make_view(spec), m, grid);
}

// Largest degree whose truncated mode still passes the tail test at this R.
inline int max_degree(const RadialFieldView& field, const RadialGrid& grid, int cap = 4096) {
    int lo = -1, hi = 0;
    const auto fits = [&](int m) {
        try {
            build_zero_mode(field, m, grid);
            return true;
        } catch (const Error&) {
            return false;
        }
    };
    if (!fits(0)) return -1;
    lo = 0;
    hi = 1;
    while (hi <= cap && fits(hi)) {
        lo = hi;
        hi *= 2;
    }
    hi = std::min(hi, cap + 1);
    while (hi - lo > 1) {
        const int mid = lo + (hi - lo) / 2;
        (fits(mid) ? lo : hi) = mid;
    }
    return lo;
}

// ---------------------------------------------------------------------------
// Finite-difference annihilation residual |d Omega| / |Omega| on a planar
// patch. The mode is an exact kernel element, so the residual is pure
// second-order stencil error.
// ---------------------------------------------------------------------------

namespace detail {

inline PolarPatch zero_mode_patch(const ZeroMode& mode) {
    RadialFieldView probe = mode.field;
    probe.phi = mode.phi;
    const double rp = log_profile_peak(probe, 2.0 * mode.m + 1.0, mode.R);
    const double width = std::max(mode.R / 512.0, std::min(mode.R / 4.0, rp > 0 ? rp : mode.R / 16.0));
    return make_polar_patch(mode.R, width, 24, 128);
}

} // namespace detail

inline double residual_d(const ZeroMode& mode, double fd_step = 1e-3) {
    const PolarPatch patch = detail::zero_mode_patch(mode);
    const RadialFieldView& field = mode.field;
    const double h = fd_step;

    auto d_apply = [&](Vec2 x) {
        const std::complex<double> dx =
            (mode.eval({x[0] + h, x[1]}) - mode.eval({x[0] - h, x[1]})) / (2.0 * h);
        const std::complex<double> dy =
            (mode.eval({x[0], x[1] + h}) - mode.eval({x[0], x[1] - h})) / (2.0 * h);
        const double r = std::hypot(x[0], x[1]);
        // rotational gauge: A1 + i A2 = i A(r) z / r
        std::complex<double> Ac{0.0, 0.0};
        if (r > 0.0) Ac = std::complex<double>{0.0, 1.0} * field.A(r) *
                          std::complex<double>{x[0] / r, x[1] / r};
        const std::complex<double> grad = dx + std::complex<double>{0.0, 1.0} * dy;
        return std::complex<double>{0.0, -1.0} * grad - Ac * mode.eval(x);
    };

    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < patch.r.size(); ++i) {
        const double r = patch.r[i];
        double ring_num = 0.0, ring_den = 0.0;
        for (double th : patch.theta) {
            const Vec2 x{r * std::cos(th), r * std::sin(th)};
            ring_num += std::norm(d_apply(x));
            ring_den += std::norm(mode.eval(x));
        }
        num += patch.wr[i] * ring_num;
        den += patch.wr[i] * ring_den;
    }
    return std::sqrt(num / den);
}

// ---------------------------------------------------------------------------
// Closed-form adjoint image d* Omega = -2i (m - r A(r)) z^{m-1} e^{-phi} and
// the norm identity |d* Omega|^2 = |sqrt(2B) Omega|^2.
// ---------------------------------------------------------------------------

struct DstarImage {
    double log_norm2 = 0.0;       // log |d* Omega|^2
    double identity_relerr = 0.0; // | |d*Omega|^2 / |sqrt(2B) Omega|^2 - 1 |
    // scaled sampled values: factor -2i(m - rA) against the scaled profile
    std::function<std::complex<double>(double, double)> eval; // (r, theta)
};

inline DstarImage dstar_on_zero_mode(const ZeroMode& mode) {
    const RadialFieldView& field = mode.field;
    RadialFieldView probe = field;
    probe.phi = mode.phi;
    const int m = mode.m;
    const double shift = 2.0 * mode.scale_shift;

    const double log_lhs =
        std::log(8.0 * M_PI) +
        detail::log_radial_integral(probe, 2.0 * m - 1.0, 0.0, mode.R, shift, [&](double r) {
            const double q = m - r * field.A(r);
            return q * q;
        });
    const double log_rhs =
        std::log(4.0 * M_PI) +
        detail::log_radial_integral(probe, 2.0 * m + 1.0, 0.0, mode.R, shift,
                                    [&](double r) { return field.B(r); });

    DstarImage img;
    img.log_norm2 = log_lhs;
    img.identity_relerr = std::abs(std::expm1(log_lhs - log_rhs));
    const ZeroMode copy = mode;
    // scaled values -2i (m - r A) r^{m-1} e^{-phi - shift} e^{i(m-1)theta}
    img.eval = [copy](double r, double theta) -> std::complex<double> {
        const double amp = copy.m - r * copy.field.A(r);
        const std::complex<double> phase =
            std::exp(std::complex<double>{0.0, (copy.m - 1.0) * theta});
        double radial;
        if (copy.m == 0) {
            radial = r > 0.0 ? copy.profile(r) / r : 0.0; // amp ~ -rA cancels the pole
        } else {
            radial = r > 0.0 ? std::exp((copy.m - 1.0) * std::log(r) - copy.phi(r) - copy.scale_shift)
                             : (copy.m == 1 ? std::exp(-copy.phi(0.0) - copy.scale_shift) : 0.0);
        }
        return std::complex<double>{0.0, -2.0} * amp * radial * phase;
    };
    return img;
}

// ---------------------------------------------------------------------------
// Bounded pair psi = (d* Omega, -V Omega): |H psi| stays below the analytic
// constant uniformly in the degree, and |psi| >= sqrt(2 inf B) |Omega|.
// ---------------------------------------------------------------------------

struct ZeroModePair {
    ZeroMode omega;
    double log_upper2 = 0.0;  // |d* Omega|^2
    double log_lower2 = 0.0;  // |V Omega|^2
    double log_psi2 = 0.0;
    double ratio = 0.0;       // |H psi| / |psi|
    double bound = 0.0;       // sup|grad V / V| + sup|(2B - V^2)/V|
};

struct PairSups {
    double grad_over_v = 0.0;
    double mismatch_over_v = 0.0;
};

inline PairSups sample_pair_sups(const RadialFieldView& field, double R, int samples = 4096) {
    PairSups sups;
    for (int i = 0; i <= samples; ++i) {
        const double r = R * i / samples;
        const double v = field.v(r);
        require(v > 0.0, "E_VOVERV_UNBOUNDED",
                "bounded-pair check needs v > 0 on [0, R] (shifted potentials)");
        const double dv = field.dv(r);
        const double mismatch = 2.0 * field.B(r) - v * v;
        sups.grad_over_v = std::max(sups.grad_over_v, std::abs(dv) / v);
        sups.mismatch_over_v = std::max(sups.mismatch_over_v, std::abs(mismatch) / v);
    }
    require(std::isfinite(sups.grad_over_v) && std::isfinite(sups.mismatch_over_v),
            "E_VOVERV_UNBOUNDED", "analytic bound is not finite for this family");
    return sups;
}

inline ZeroModePair build_zero_mode_pair(const RadialFieldView& field, int m,
                                         const RadialGrid& grid) {
    ZeroModePair pair;
    pair.omega = build_zero_mode(field, m, grid);
    const double shift = 2.0 * pair.omega.scale_shift;
    RadialFieldView probe = field;

    const DstarImage img = dstar_on_zero_mode(pair.omega);
    pair.log_upper2 = img.log_norm2;
    pair.log_lower2 =
        std::log(2.0 * M_PI) +
        detail::log_radial_integral(probe, 2.0 * m + 1.0, 0.0, grid.R, shift, [&](double r) {
            const double v = field.v(r);
            return v * v;
        });
    const double hi = std::max(pair.log_upper2, pair.log_lower2);
    pair.log_psi2 = hi + std::log(std::exp(pair.log_upper2 - hi) + std::exp(pair.log_lower2 - hi));

    const PairSups sups = sample_pair_sups(field, grid.R);
    pair.bound = sups.grad_over_v + sups.mismatch_over_v;

    const double log_H2 =
        std::log(2.0 * M_PI) +
        detail::log_radial_integral(probe, 2.0 * m + 1.0, 0.0, grid.R, shift, [&](double r) {
            const double dv = field.dv(r);
            const double mis = 2.0 * field.B(r) - field.v(r) * field.v(r);
            return dv * dv + mis * mis;
        });
    pair.ratio = std::exp(0.5 * (log_H2 - pair.log_psi2));
    return pair;
}

} // namespace diraclab
