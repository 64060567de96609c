#pragma once

#include <cmath>
#include <complex>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "diraclab/error.hpp"
#include "diraclab/fields.hpp"
#include "diraclab/quadrature.hpp"

namespace diraclab {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Ladder algebra for the constant-field factorized pair at a center:
// states are polynomials in (z, zbar) against the centered Gaussian
// G = e^{-B |x - c|^2 / 4}. On such states
//     d  : Q -> -2i dQ/dzbar
//     d* : Q -> -2i dQ/dz + i B zbar Q
// which makes the ladder identities exact polynomial computations.
// ---------------------------------------------------------------------------

class GaussLadderState {
public:
    GaussLadderState(double B, Vec2 center, int max_deg)
        : B_(B), center_(center), deg_(max_deg),
          c_(static_cast<std::size_t>(max_deg + 1) * (max_deg + 1), Complex{0.0, 0.0}) {}

    static GaussLadderState gaussian(double B, Vec2 center, int max_deg) {
        GaussLadderState g(B, center, max_deg);
        g.coeff(0, 0) = 1.0;
        return g;
    }

    double field() const { return B_; }
    Vec2 center() const { return center_; }
    int degree_cap() const { return deg_; }

    Complex& coeff(int a, int b) { return c_[static_cast<std::size_t>(a) * (deg_ + 1) + b]; }
    Complex coeff(int a, int b) const { return c_[static_cast<std::size_t>(a) * (deg_ + 1) + b]; }

    GaussLadderState apply_dstar() const {
        GaussLadderState out(B_, center_, deg_);
        const Complex m2i{0.0, -2.0};
        const Complex iB{0.0, B_};
        for (int a = 0; a <= deg_; ++a)
            for (int b = 0; b <= deg_; ++b) {
                const Complex q = coeff(a, b);
                if (q == Complex{0.0, 0.0}) continue;
                if (a >= 1) out.coeff(a - 1, b) += m2i * static_cast<double>(a) * q;
                require(b + 1 <= deg_, "E_INTERNAL", "ladder degree cap exceeded");
                out.coeff(a, b + 1) += iB * q;
            }
        return out;
    }

    GaussLadderState apply_d() const {
        GaussLadderState out(B_, center_, deg_);
        const Complex m2i{0.0, -2.0};
        for (int a = 0; a <= deg_; ++a)
            for (int b = 1; b <= deg_; ++b) {
                const Complex q = coeff(a, b);
                if (q == Complex{0.0, 0.0}) continue;
                out.coeff(a, b - 1) += m2i * static_cast<double>(b) * q;
            }
        return out;
    }

    GaussLadderState scaled(Complex factor) const {
        GaussLadderState out = *this;
        for (Complex& q : out.c_) q *= factor;
        return out;
    }

    // value of Q(z, zbar) e^{-B |delta|^2 / 4} at x
    Complex eval(Vec2 x) const {
        const Complex z{x[0] - center_[0], x[1] - center_[1]};
        const Complex zb = std::conj(z);
        std::vector<Complex> zp(deg_ + 1), zbp(deg_ + 1);
        zp[0] = zbp[0] = 1.0;
        for (int k = 1; k <= deg_; ++k) {
            zp[k] = zp[k - 1] * z;
            zbp[k] = zbp[k - 1] * zb;
        }
        Complex sum{0.0, 0.0};
        for (int a = 0; a <= deg_; ++a)
            for (int b = 0; b <= deg_; ++b) {
                const Complex q = coeff(a, b);
                if (q != Complex{0.0, 0.0}) sum += q * zp[a] * zbp[b];
            }
        return sum * std::exp(-B_ * std::norm(z) / 4.0);
    }

private:
    double B_;
    Vec2 center_;
    int deg_;
    std::vector<Complex> c_;
};

// Two-component ladder state: upper (d*)^p G, lower -V_n (d*)^{p-1} G.
struct LadderPair {
    GaussLadderState upper;
    GaussLadderState lower;
    int p = 1;
    double Vn = 0.0;
    bool zero_mode_degenerate = false; // p = 0: upper component only

    Complex eval_upper(Vec2 x) const { return upper.eval(x); }
    Complex eval_lower(Vec2 x) const { return lower.eval(x); }
    double abs2(Vec2 x) const { return std::norm(upper.eval(x)) + std::norm(lower.eval(x)); }
};

inline LadderPair ladder_state(double B, int p, Vec2 center, double Vn) {
    require(B > 0.0, "E_SPEC_B0_NONPOSITIVE", "ladder state needs B > 0");
    require(p >= 0, "E_LADDER_INDEX", "ladder index must be >= 0");
    const int cap = p + 2;
    GaussLadderState g = GaussLadderState::gaussian(B, center, cap);
    GaussLadderState upper = g;
    for (int k = 0; k < p; ++k) upper = upper.apply_dstar();
    GaussLadderState lower_base = g;
    for (int k = 0; k + 1 < p; ++k) lower_base = lower_base.apply_dstar();
    LadderPair pair{upper, lower_base.scaled(Complex{-Vn, 0.0}), p, Vn, p == 0};
    if (p == 0) pair.lower = lower_base.scaled(Complex{0.0, 0.0});
    return pair;
}

// ---------------------------------------------------------------------------
// Smooth cutoff: 1 inside the unit disc, bump shoulder on 1 < t < 2, 0
// outside. The profile enters reported constants through |chi'|, so its
// formula is recorded in run metadata.
// ---------------------------------------------------------------------------

inline constexpr const char* kCutoffProfile = "exp(1-1/(1-(t-1)^2)) on 1<t<2";

inline double bump_cutoff(double t) {
    if (t <= 1.0) return 1.0;
    if (t >= 2.0) return 0.0;
    const double u = t - 1.0;
    return std::exp(1.0 - 1.0 / (1.0 - u * u));
}

inline double bump_cutoff_deriv(double t) {
    if (t <= 1.0 || t >= 2.0) return 0.0;
    const double u = t - 1.0;
    const double den = 1.0 - u * u;
    return bump_cutoff(t) * (-2.0 * u / (den * den));
}

// ---------------------------------------------------------------------------
// Center selection along a ray: roots of (V - E)^2 - 2 n B. For families
// where V^2 / (2B) is identically the target the equation is degenerate and
// centers are laid out geometrically instead.
// ---------------------------------------------------------------------------

enum class WeylVariant { FixedLevel, GrowingLevel };

struct QuasimodeParams {
    WeylVariant variant = WeylVariant::FixedLevel;
    int k = 1;            // fixed ladder index (FixedLevel)
    double eps = 0.5;     // FixedLevel default; GrowingLevel uses 0.2
    int count = 8;
    Vec2 ray{1.0, 0.0};
    // the energy target enters through the spec's E shift: V already carries V - E
    double scan_min = 1e-2;
    double scan_max = 1e6;
    double r0 = 10.0;     // first center radius in the degenerate case
};

struct CenterSet {
    std::vector<double> rho;  // center radii along the ray
    std::vector<int> p;       // ladder index per center
    bool degenerate = false;
    bool truncated = false;   // ran out of crossings before `count`
};

namespace detail {

inline double ray_value(const Vec2& ray, double rho, const std::function<double(Vec2)>& f) {
    const double n = std::hypot(ray[0], ray[1]);
    return f({ray[0] / n * rho, ray[1] / n * rho});
}

inline std::optional<double> first_root_after(const Field2DSpec& field, const Vec2& ray,
                                              double level2, double lo, double hi) {
    // F(rho) = (V - E')^2 - level2 * B with the shift folded into V upstream
    auto F = [&](double rho) {
        const double v = ray_value(ray, rho, field.V);
        const double b = ray_value(ray, rho, field.B);
        return v * v - level2 * b;
    };
    const int steps = 1024;
    double prev_rho = lo, prev_f = F(lo);
    for (int i = 1; i <= steps; ++i) {
        const double rho = lo * std::pow(hi / lo, static_cast<double>(i) / steps);
        const double f = F(rho);
        if (prev_f == 0.0) return prev_rho;
        if (prev_f * f < 0.0) {
            double a = prev_rho, b = rho;
            double fa = prev_f;
            for (int it = 0; it < 200; ++it) {
                const double mid = 0.5 * (a + b);
                const double fm = F(mid);
                if (fa * fm <= 0.0) b = mid;
                else {
                    a = mid;
                    fa = fm;
                }
                if ((b - a) <= 1e-12 * b) break;
            }
            return 0.5 * (a + b);
        }
        prev_rho = rho;
        prev_f = f;
    }
    return std::nullopt;
}

} // namespace detail

inline CenterSet choose_centers(const Field2DSpec& field, const QuasimodeParams& params) {
    CenterSet out;
    const auto level2 = [&](int n) { return 2.0 * static_cast<double>(n); };

    if (params.variant == WeylVariant::FixedLevel) {
        // degenerate when (V-E)^2 - 2kB vanishes identically along the ray
        double scale = 0.0, worst = 0.0;
        for (int i = 0; i <= 32; ++i) {
            const double rho =
                params.scan_min * std::pow(params.scan_max / params.scan_min, i / 32.0);
            const double v = detail::ray_value(params.ray, rho, field.V);
            const double b = detail::ray_value(params.ray, rho, field.B);
            worst = std::max(worst, std::abs(v * v - level2(params.k) * b));
            scale = std::max(scale, std::max(v * v, level2(params.k) * b));
        }
        if (worst <= 1e-9 * scale) {
            out.degenerate = true;
            for (int i = 0; i < params.count; ++i) {
                out.rho.push_back(params.r0 * std::pow(2.0, i));
                out.p.push_back(params.k);
            }
            return out;
        }
        double lo = params.scan_min;
        for (int i = 0; i < params.count; ++i) {
            const auto root = detail::first_root_after(field, params.ray, level2(params.k), lo,
                                                       params.scan_max);
            if (!root) {
                out.truncated = true;
                break;
            }
            out.rho.push_back(*root);
            out.p.push_back(params.k);
            lo = *root * (1.0 + 1e-6);
        }
        require(!out.rho.empty(), "E_NO_CROSSING",
                "no crossing of the target level found along the ray");
        return out;
    }

    double lo = params.scan_min;
    for (int n = 1; static_cast<int>(out.rho.size()) < params.count; ++n) {
        const auto root =
            detail::first_root_after(field, params.ray, level2(n), lo, params.scan_max);
        if (!root) {
            if (n == 1) fail("E_NO_CROSSING", "no Landau crossing found along the ray");
            out.truncated = true;
            break;
        }
        out.rho.push_back(*root);
        out.p.push_back(n);
        lo = *root * (1.0 + 1e-9);
    }
    return out;
}

// Cutoff radius per the two constructions.
inline double cutoff_radius(WeylVariant variant, double eps, double Bn, int p) {
    if (variant == WeylVariant::FixedLevel) return std::pow(Bn, 0.5 * (eps - 1.0));
    return std::sqrt(2.0 * std::pow(static_cast<double>(p), 1.0 + eps) / Bn);
}

// Greedy subsequence with pairwise disjoint supports:
// |x_{n+1} - x_n| > 2 (r_n + r_{n+1}).
inline std::vector<std::size_t> thin_disjoint(const std::vector<double>& rho,
                                              const std::vector<double>& r_cut) {
    std::vector<std::size_t> keep;
    for (std::size_t i = 0; i < rho.size(); ++i) {
        if (keep.empty()) {
            keep.push_back(i);
            continue;
        }
        const std::size_t last = keep.back();
        if (std::abs(rho[i] - rho[last]) > 2.0 * (r_cut[i] + r_cut[last])) keep.push_back(i);
    }
    return keep;
}

// ---------------------------------------------------------------------------
// Local gauge: Atilde_n(x) = [\int_0^1 B(x_n + s(x - x_n)) s ds] ^ (x - x_n)
// has curl B, and g_n(x) = \int (A - Atilde_n) . dl along the straight
// segment is the phase making the local constant-field pair comparable with
// the true operator.
// ---------------------------------------------------------------------------

inline Vec2 local_gauge_vector(const Field2DSpec& field, Vec2 xn, Vec2 x) {
    const double d1 = x[0] - xn[0], d2 = x[1] - xn[1];
    const double scalar = integrate_adaptive(
        [&](double s) {
            return field.B({xn[0] + s * d1, xn[1] + s * d2}) * s;
        },
        0.0, 1.0, 1e-11, 1e-16);
    return {-scalar * d2, scalar * d1};
}

inline double gauge_function(const Field2DSpec& field, Vec2 xn, Vec2 x) {
    const double d1 = x[0] - xn[0], d2 = x[1] - xn[1];
    if (d1 == 0.0 && d2 == 0.0) return 0.0;
    return integrate_adaptive(
        [&](double tau) {
            const Vec2 y{xn[0] + tau * d1, xn[1] + tau * d2};
            const Vec2 a = field.A(y);
            const Vec2 at = local_gauge_vector(field, xn, y);
            return (a[0] - at[0]) * d1 + (a[1] - at[1]) * d2;
        },
        0.0, 1.0, 1e-10, 1e-15);
}

// Straight segment integral of (A - Atilde_n) between two arbitrary points.
namespace detail {

inline double gauge_segment(const Field2DSpec& field, Vec2 xn, Vec2 a, Vec2 b) {
    const double d1 = b[0] - a[0], d2 = b[1] - a[1];
    if (d1 == 0.0 && d2 == 0.0) return 0.0;
    return integrate_adaptive(
        [&](double tau) {
            const Vec2 y{a[0] + tau * d1, a[1] + tau * d2};
            const Vec2 av = field.A(y);
            const Vec2 at = local_gauge_vector(field, xn, y);
            return (av[0] - at[0]) * d1 + (av[1] - at[1]) * d2;
        },
        0.0, 1.0, 1e-10, 1e-15);
}

inline uint64_t mix_u64(uint64_t x) {
    x ^= x >> 33;
    x *= 0xff51afd7ed558ccdull;
    x ^= x >> 33;
    x *= 0xc4ceb9fe1a85ec53ull;
    x ^= x >> 33;
    return x;
}

} // namespace detail

// Path-independence audit: straight path against an L-shaped path at 20
// deterministic points inside the patch. A mismatch means A and B do not
// belong together.
inline void validate_gauge(const Field2DSpec& field, Vec2 xn, double patch_radius) {
    for (int i = 0; i < 20; ++i) {
        const double u1 = (detail::mix_u64(2 * i + 1) >> 11) / 9007199254740992.0;
        const double u2 = (detail::mix_u64(2 * i + 2) >> 11) / 9007199254740992.0;
        const double rho = patch_radius * (0.15 + 0.85 * u1);
        const double th = 2.0 * M_PI * u2;
        const Vec2 x{xn[0] + rho * std::cos(th), xn[1] + rho * std::sin(th)};
        const double direct = gauge_function(field, xn, x);
        const Vec2 corner{x[0], xn[1]};
        const double bent = detail::gauge_segment(field, xn, xn, corner) +
                            detail::gauge_segment(field, xn, corner, x);
        require(std::abs(direct - bent) < 1e-7 * (1.0 + std::abs(direct)), "E_GAUGE_PATH",
                "gauge phase is path dependent; A and B are inconsistent");
    }
}

// ---------------------------------------------------------------------------
// The localized trial state psi_n = e^{i g_n} chi_n phihat_n and the four
// residual pieces of (D_A + V) psi_n:
//   T1 = |chi (D_local + V_n) phihat|   (closed form: (2 p B_n - V_n^2) lower ladder)
//   T2 = |(sigma . grad chi) phihat|
//   T3 = |sigma . (A_n - Atilde_n) chi phihat|
//   T4 = |(V - V_n) chi phihat|
// reported as the triangle-inequality sum over |psi| next to an independent
// finite-difference evaluation of |(D_A + V) psi| / |psi|.
// ---------------------------------------------------------------------------

struct Quasimode {
    int n = 0;
    Vec2 center{0.0, 0.0};
    double Bn = 0.0;
    double Vn = 0.0;
    int p = 1;
    double r_cut = 0.0;
    double T1 = 0.0, T2 = 0.0, T3 = 0.0, T4 = 0.0;
    double norm_psi = 0.0;
    double norm_phi_patch = 0.0;
    double ratio_sum = 0.0;
    double ratio_fd = 0.0;
    double norm_lb_margin = 0.0;
    std::string cutoff_profile = kCutoffProfile;
};

struct NormBounds {
    double phi2 = 0.0;        // quadrature over the plane (effective radius)
    double psi2 = 0.0;        // with the cutoff at r_cut
    double log_lower = 0.0;   // log(2^{p+1} pi B^{p-1} p!)
    double log_upper = 0.0;   // log(4 x lower)
    double tail = 0.0;        // (1/p!) \int_{B r^2/2}^inf s^p e^-s ds
    bool phi_within_bounds = false;
    bool psi_above_floor = false;
};

inline NormBounds norm_bounds_check(double B, double V, int p, double r_cut) {
    require(p >= 1, "E_LADDER_INDEX", "norm bounds need p >= 1");
    const LadderPair pair = ladder_state(B, p, {0.0, 0.0}, V);
    const double sigma = std::sqrt(2.0 * (p + 2.0) / B);
    const double R_big = std::max(2.0 * r_cut, 8.0 * sigma);
    PolarPatch patch = make_polar_patch(R_big, sigma / 4.0, 24, 64);

    NormBounds nb;
    nb.phi2 = patch.integrate([&](double r, double th) {
        return pair.abs2({r * std::cos(th), r * std::sin(th)});
    });
    nb.psi2 = patch.integrate([&](double r, double th) {
        const double c = bump_cutoff(r / r_cut);
        return c * c * pair.abs2({r * std::cos(th), r * std::sin(th)});
    });
    nb.log_lower = (p + 1.0) * std::log(2.0) + std::log(M_PI) + (p - 1.0) * std::log(B) +
                   std::lgamma(p + 1.0);
    nb.log_upper = nb.log_lower + 2.0 * std::log(2.0);
    nb.tail = poisson_tail(p, B * r_cut * r_cut / 2.0);
    const double log_phi2 = std::log(nb.phi2);
    nb.phi_within_bounds = (log_phi2 >= nb.log_lower - 1e-9) && (log_phi2 <= nb.log_upper + 1e-9);
    nb.psi_above_floor = nb.psi2 >= 0.25 * nb.phi2 * (1.0 - nb.tail) - 1e-12 * nb.phi2;
    return nb;
}

inline Quasimode residual_terms(const Field2DSpec& field, const QuasimodeParams& params,
                                double rho_center, int p, int index, bool with_fd = true,
                                double r_cut_override = 0.0) {
    require(p >= 1, "E_LADDER_INDEX", "residual evaluation needs ladder index p >= 1");
    Quasimode qm;
    qm.n = index;
    const double nr = std::hypot(params.ray[0], params.ray[1]);
    qm.center = {params.ray[0] / nr * rho_center, params.ray[1] / nr * rho_center};
    qm.Bn = field.B(qm.center);
    qm.Vn = field.V(qm.center);
    qm.p = p;
    qm.r_cut = r_cut_override > 0.0 ? r_cut_override
                                    : cutoff_radius(params.variant, params.eps, qm.Bn, p);
    require(qm.Bn > 0.0, "E_SPEC_B0_NONPOSITIVE", "quasimode needs B > 0 at the center");

    validate_gauge(field, qm.center, 2.0 * qm.r_cut);

    const LadderPair pair = ladder_state(qm.Bn, p, qm.center, qm.Vn);
    const LadderPair lower_only = ladder_state(qm.Bn, std::max(p - 1, 0), qm.center, 0.0);
    const double sigma = std::sqrt(2.0 * (p + 1.0) / qm.Bn);
    PolarPatch patch = make_polar_patch(2.0 * qm.r_cut, std::min(sigma, qm.r_cut) / 4.0, 24, 256);

    auto at = [&](double r, double th) -> Vec2 {
        return {qm.center[0] + r * std::cos(th), qm.center[1] + r * std::sin(th)};
    };

    const double level_defect = std::abs(2.0 * p * qm.Bn - qm.Vn * qm.Vn);
    double t1_part = 0.0, t2 = 0.0, t3 = 0.0, t4 = 0.0, psi2 = 0.0, phi2 = 0.0;
    t1_part = patch.integrate([&](double r, double th) {
        const double c = bump_cutoff(r / qm.r_cut);
        return c * c * std::norm(lower_only.eval_upper(at(r, th)));
    });
    t2 = patch.integrate([&](double r, double th) {
        const double dc = bump_cutoff_deriv(r / qm.r_cut) / qm.r_cut;
        return dc * dc * pair.abs2(at(r, th));
    });
    t3 = patch.integrate([&](double r, double th) {
        const Vec2 x = at(r, th);
        const double c = bump_cutoff(r / qm.r_cut);
        if (c == 0.0) return 0.0;
        const Vec2 an{-0.5 * qm.Bn * (x[1] - qm.center[1]),
                      0.5 * qm.Bn * (x[0] - qm.center[0])};
        const Vec2 at_vec = local_gauge_vector(field, qm.center, x);
        const double a1 = an[0] - at_vec[0], a2 = an[1] - at_vec[1];
        return (a1 * a1 + a2 * a2) * c * c * pair.abs2(x);
    });
    t4 = patch.integrate([&](double r, double th) {
        const Vec2 x = at(r, th);
        const double c = bump_cutoff(r / qm.r_cut);
        if (c == 0.0) return 0.0;
        const double dv = field.V(x) - qm.Vn;
        return dv * dv * c * c * pair.abs2(x);
    });
    psi2 = patch.integrate([&](double r, double th) {
        const double c = bump_cutoff(r / qm.r_cut);
        return c * c * pair.abs2(at(r, th));
    });
    phi2 = patch.integrate([&](double r, double th) { return pair.abs2(at(r, th)); });

    qm.T1 = level_defect * std::sqrt(t1_part);
    qm.T2 = std::sqrt(t2);
    qm.T3 = std::sqrt(t3);
    qm.T4 = std::sqrt(t4);
    qm.norm_psi = std::sqrt(psi2);
    qm.norm_phi_patch = std::sqrt(phi2);
    qm.ratio_sum = (qm.T1 + qm.T2 + qm.T3 + qm.T4) / qm.norm_psi;

    const NormBounds nb = norm_bounds_check(qm.Bn, qm.Vn, p, qm.r_cut);
    qm.norm_lb_margin = nb.psi2 / (0.25 * nb.phi2 * (1.0 - nb.tail));

    if (with_fd) {
        // psi = e^{i g} chi phihat evaluated from scratch at stencil points
        auto psi = [&](Vec2 x) -> std::array<Complex, 2> {
            const double rr = std::hypot(x[0] - qm.center[0], x[1] - qm.center[1]);
            const double c = bump_cutoff(rr / qm.r_cut);
            if (c == 0.0) return {Complex{0, 0}, Complex{0, 0}};
            const Complex phase =
                std::exp(Complex{0.0, 1.0} * gauge_function(field, qm.center, x));
            return {phase * c * pair.eval_upper(x), phase * c * pair.eval_lower(x)};
        };
        const double h = 2e-3 / std::sqrt(qm.Bn * (p + 1.0));
        auto apply_H = [&](Vec2 x) -> std::array<Complex, 2> {
            const auto xp = psi({x[0] + h, x[1]});
            const auto xm = psi({x[0] - h, x[1]});
            const auto yp = psi({x[0], x[1] + h});
            const auto ym = psi({x[0], x[1] - h});
            const auto ctr = psi(x);
            const Complex d1u = (xp[0] - xm[0]) / (2.0 * h), d2u = (yp[0] - ym[0]) / (2.0 * h);
            const Complex d1l = (xp[1] - xm[1]) / (2.0 * h), d2l = (yp[1] - ym[1]) / (2.0 * h);
            const Vec2 a = field.A(x);
            const double v = field.V(x);
            const Complex i{0.0, 1.0};
            const Complex A_minus{a[0], -a[1]};
            const Complex A_plus{a[0], a[1]};
            return {-i * (d1l - i * d2l) - A_minus * ctr[1] + v * ctr[0],
                    -i * (d1u + i * d2u) - A_plus * ctr[0] + v * ctr[1]};
        };
        const double H2 = patch.integrate([&](double r, double th) {
            const Vec2 x = at(r, th);
            const auto hv = apply_H(x);
            return std::norm(hv[0]) + std::norm(hv[1]);
        });
        qm.ratio_fd = std::sqrt(H2) / qm.norm_psi;
    }
    return qm;
}

} // namespace diraclab
