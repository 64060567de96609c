#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <functional>
#include <map>
#include <mutex>
#include <vector>

#include "diraclab/error.hpp"

namespace diraclab {

// ---------------------------------------------------------------------------
// Adaptive Simpson integration.
// Absolute floor below relative work keeps smooth integrands from recursing
// forever around zeros of f.
// ---------------------------------------------------------------------------

namespace detail {

template <class F>
double adaptive_simpson_rec(const F& f, double a, double b, double fa, double fm, double fb,
                            double whole, double tol, int depth) {
    const double m  = 0.5 * (a + b);
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double flm = f(lm);
    const double frm = f(rm);
    const double left  = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double err = left + right - whole;
    if (depth <= 0 || std::abs(err) <= 15.0 * tol) {
        return left + right + err / 15.0;
    }
    return adaptive_simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

} // namespace detail

template <class F>
double integrate_adaptive(const F& f, double a, double b, double rel_tol = 1e-10,
                          double abs_floor = 1e-14, int max_depth = 48) {
    if (a == b) return 0.0;
    const double fa = f(a);
    const double fb = f(b);
    const double m  = 0.5 * (a + b);
    const double fm = f(m);
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    // Two-stage: first pass to estimate the magnitude, second with scaled tolerance.
    const double scale = std::max(std::abs(whole), abs_floor);
    const double tol = std::max(rel_tol * scale, abs_floor);
    return detail::adaptive_simpson_rec(f, a, b, fa, fm, fb, whole, tol, max_depth);
}

// ---------------------------------------------------------------------------
// Gauss-Legendre nodes/weights on [-1,1], computed by Newton iteration on the
// Legendre recurrence and cached per order.
// ---------------------------------------------------------------------------

struct GaussRule {
    std::vector<double> x;
    std::vector<double> w;
};

inline const GaussRule& gauss_legendre(int n) {
    static std::map<int, GaussRule> cache;
    static std::mutex mtx;
    std::lock_guard<std::mutex> lock(mtx);
    auto it = cache.find(n);
    if (it != cache.end()) return it->second;

    GaussRule rule;
    rule.x.resize(n);
    rule.w.resize(n);
    const int half = (n + 1) / 2;
    for (int i = 0; i < half; ++i) {
        double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-15) break;
        }
        rule.x[i] = -x;
        rule.x[n - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        rule.w[i] = w;
        rule.w[n - 1 - i] = w;
    }
    return cache.emplace(n, std::move(rule)).first->second;
}

template <class F>
double integrate_gauss(const F& f, double a, double b, int order) {
    const GaussRule& g = gauss_legendre(order);
    const double c = 0.5 * (a + b);
    const double h = 0.5 * (b - a);
    double sum = 0.0;
    for (int i = 0; i < order; ++i) sum += g.w[i] * f(c + h * g.x[i]);
    return h * sum;
}

// ---------------------------------------------------------------------------
// Polar quadrature patch: composite Gauss-Legendre panels in radius, uniform
// trapezoid in angle (exact for the e^{ip\theta} content of ladder states).
// ---------------------------------------------------------------------------

struct PolarPatch {
    std::vector<double> r;        // radial nodes
    std::vector<double> wr;       // radial weights (include the r Jacobian)
    std::vector<double> theta;    // angular nodes
    double wtheta = 0.0;          // uniform angular weight

    std::size_t radial_count() const { return r.size(); }
    std::size_t angular_count() const { return theta.size(); }

    // Integrates g(r, theta) r dr dtheta over the patch.
    template <class G>
    double integrate(const G& g) const {
        double total = 0.0;
        for (std::size_t i = 0; i < r.size(); ++i) {
            double ring = 0.0;
            for (std::size_t k = 0; k < theta.size(); ++k) ring += g(r[i], theta[k]);
            total += wr[i] * ring;
        }
        return total * wtheta;
    }
};

// Panels grow geometrically from `scale` out to `radius`; `nodes_per_panel`
// Gauss points each. Resolves both a fine inner scale and the outer cutoff.
inline PolarPatch make_polar_patch(double radius, double scale, int nodes_per_panel = 24,
                                   int n_theta = 256) {
    require(radius > 0.0 && scale > 0.0, "E_QUAD_RESOLUTION", "patch radius/scale must be positive");
    scale = std::min(scale, radius);
    std::vector<double> edges{0.0};
    double e = scale * 0.5;
    while (e < radius) {
        edges.push_back(e);
        e *= 1.6;
    }
    edges.push_back(radius);

    PolarPatch patch;
    const GaussRule& g = gauss_legendre(nodes_per_panel);
    for (std::size_t p = 0; p + 1 < edges.size(); ++p) {
        const double a = edges[p], b = edges[p + 1];
        const double c = 0.5 * (a + b), h = 0.5 * (b - a);
        for (int i = 0; i < nodes_per_panel; ++i) {
            const double r = c + h * g.x[i];
            patch.r.push_back(r);
            patch.wr.push_back(h * g.w[i] * r);
        }
    }
    patch.theta.resize(n_theta);
    for (int k = 0; k < n_theta; ++k) patch.theta[k] = 2.0 * M_PI * k / n_theta;
    patch.wtheta = 2.0 * M_PI / n_theta;
    return patch;
}

// ---------------------------------------------------------------------------
// Regularized upper incomplete gamma tail for integer order:
//   (1/p!) \int_c^\infty s^p e^{-s} ds = e^{-c} \sum_{i<=p} c^i / i!
// Evaluated in log space so p in the hundreds stays finite.
// ---------------------------------------------------------------------------

inline double poisson_tail(int p, double c) {
    if (c <= 0.0) return 1.0;
    // log of terms c^i/i!, summed stably against the largest.
    double max_log = -std::numeric_limits<double>::infinity();
    std::vector<double> logs(static_cast<std::size_t>(p) + 1);
    double lg = 0.0; // log(c^i / i!)
    for (int i = 0; i <= p; ++i) {
        if (i > 0) lg += std::log(c) - std::log(static_cast<double>(i));
        logs[i] = lg;
        max_log = std::max(max_log, lg);
    }
    double sum = 0.0;
    for (double l : logs) sum += std::exp(l - max_log);
    const double log_tail = -c + max_log + std::log(sum);
    return std::exp(log_tail);
}

} // namespace diraclab
