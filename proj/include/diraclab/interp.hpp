#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "diraclab/error.hpp"

namespace diraclab {

// Monotone cubic (Fritsch-Carlson) interpolant. Preserves monotonicity of the
// data, so positive increasing samples never undershoot between nodes.
class PchipCurve {
public:
    PchipCurve() = default;

    PchipCurve(std::vector<double> x, std::vector<double> y)
        : x_(std::move(x)), y_(std::move(y)) {
        const std::size_t n = x_.size();
        require(n >= 2 && y_.size() == n, "E_SPEC_TABLE_SHORT",
                "tabulated curve needs at least 2 matching samples");
        for (std::size_t i = 0; i + 1 < n; ++i)
            require(x_[i + 1] > x_[i], "E_SPEC_TABLE_NONMONOTONE",
                    "tabulated mesh must be strictly increasing");
        d_.assign(n, 0.0);
        if (n == 2) {
            d_[0] = d_[1] = slope(0);
            return;
        }
        for (std::size_t i = 1; i + 1 < n; ++i) {
            const double dl = slope(i - 1), dr = slope(i);
            if (dl * dr <= 0.0) {
                d_[i] = 0.0;
            } else {
                const double hl = x_[i] - x_[i - 1], hr = x_[i + 1] - x_[i];
                const double w1 = 2.0 * hr + hl, w2 = hr + 2.0 * hl;
                d_[i] = (w1 + w2) / (w1 / dl + w2 / dr);
            }
        }
        d_[0] = endpoint_slope(x_[1] - x_[0], x_[2] - x_[1], slope(0), slope(1));
        d_[n - 1] = endpoint_slope(x_[n - 1] - x_[n - 2], x_[n - 2] - x_[n - 3],
                                   slope(n - 2), slope(n - 3));
    }

    double xmin() const { return x_.front(); }
    double xmax() const { return x_.back(); }

    double operator()(double x) const {
        const std::size_t i = cell(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t, t3 = t2 * t;
        const double h00 = 2 * t3 - 3 * t2 + 1;
        const double h10 = t3 - 2 * t2 + t;
        const double h01 = -2 * t3 + 3 * t2;
        const double h11 = t3 - t2;
        return h00 * y_[i] + h10 * h * d_[i] + h01 * y_[i + 1] + h11 * h * d_[i + 1];
    }

    double derivative(double x) const {
        const std::size_t i = cell(x);
        const double h = x_[i + 1] - x_[i];
        const double t = (x - x_[i]) / h;
        const double t2 = t * t;
        const double dh00 = (6 * t2 - 6 * t) / h;
        const double dh10 = 3 * t2 - 4 * t + 1;
        const double dh01 = (-6 * t2 + 6 * t) / h;
        const double dh11 = 3 * t2 - 2 * t;
        return dh00 * y_[i] + dh10 * d_[i] + dh01 * y_[i + 1] + dh11 * d_[i + 1];
    }

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    double slope(std::size_t i) const { return (y_[i + 1] - y_[i]) / (x_[i + 1] - x_[i]); }

    static double endpoint_slope(double h0, double h1, double s0, double s1) {
        // Shape-preserving three-point endpoint rule.
        double d = ((2.0 * h0 + h1) * s0 - h0 * s1) / (h0 + h1);
        if (d * s0 <= 0.0) d = 0.0;
        else if (s0 * s1 <= 0.0 && std::abs(d) > 3.0 * std::abs(s0)) d = 3.0 * s0;
        return d;
    }

    std::size_t cell(double x) const {
        require(x >= x_.front() - 1e-12 * (1.0 + std::abs(x_.front())) &&
                x <= x_.back() + 1e-12 * (1.0 + std::abs(x_.back())),
                "E_TABLE_RANGE", "evaluation outside the tabulated mesh");
        auto it = std::upper_bound(x_.begin(), x_.end(), x);
        std::size_t i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(it - x_.begin() - 1, 0));
        return std::min(i, x_.size() - 2);
    }

    std::vector<double> x_, y_, d_;
};

} // namespace diraclab
