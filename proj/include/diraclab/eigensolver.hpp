#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "diraclab/banded.hpp"
#include "diraclab/error.hpp"

namespace diraclab {

// ---------------------------------------------------------------------------
// Band -> tridiagonal reduction by Givens rotations with bulge chasing
// (Rutishauser/Schwarz). Eigenvalues are preserved; the similarity transform
// is not accumulated since all downstream consumers work spectrally.
// ---------------------------------------------------------------------------

namespace detail {

class BandReducer {
public:
    explicit BandReducer(const BandedSymMatrix& M)
        : n_(M.n), cap_(M.bandwidth + 1),
          bands_(static_cast<std::size_t>(cap_ + 1) * M.n, 0.0) {
        for (int b = 0; b <= M.bandwidth; ++b)
            for (int i = 0; i + b < n_; ++i) at(b, i) = M.at(b, i);
    }

    void run() {
        for (int b = cap_ - 1; b > 1; --b) {
            for (int j = 0; j + b < n_; ++j) {
                if (get(j + b, j) == 0.0) continue;
                rotate_to_zero(j + b - 1, j);
                // one transient element appears b+1 below the diagonal and is
                // chased off the bottom in steps of b
                int col = j + b - 1;
                int row = j + 2 * b;
                while (row < n_) {
                    rotate_to_zero(row - 1, col);
                    col = row - 1;
                    row += b;
                }
            }
        }
    }

    TridiagonalMatrix extract() const {
        TridiagonalMatrix T;
        T.diag.resize(n_);
        T.off.resize(n_ > 0 ? n_ - 1 : 0);
        for (int i = 0; i < n_; ++i) T.diag[i] = get(i, i);
        for (int i = 0; i + 1 < n_; ++i) T.off[i] = get(i + 1, i);
        return T;
    }

private:
    double& at(int b, int i) { return bands_[static_cast<std::size_t>(b) * n_ + i]; }
    double at(int b, int i) const { return bands_[static_cast<std::size_t>(b) * n_ + i]; }

    double get(int i, int j) const {
        if (i < j) std::swap(i, j);
        return (i - j > cap_) ? 0.0 : at(i - j, j);
    }
    void set(int i, int j, double v) {
        if (i < j) std::swap(i, j);
        at(i - j, j) = v;
    }

    // Symmetric rotation of rows/cols (p, p+1) chosen to zero the entry
    // (p+1, col) against (p, col).
    void rotate_to_zero(int p, int col) {
        const double a = get(p, col);
        const double b = get(p + 1, col);
        if (b == 0.0) return;
        const double rho = std::hypot(a, b);
        const double c = a / rho, s = b / rho;
        const int q = p + 1;
        const int lo = std::max(0, p - cap_);
        const int hi = std::min(n_ - 1, q + cap_);
        for (int k = lo; k <= hi; ++k) {
            if (k == p || k == q) continue;
            const int dp = std::abs(k - p), dq = std::abs(k - q);
            const double xp = dp <= cap_ ? get(k, p) : 0.0;
            const double xq = dq <= cap_ ? get(k, q) : 0.0;
            if (xp == 0.0 && xq == 0.0) continue;
            if (dp <= cap_) set(k, p, c * xp + s * xq);
            if (dq <= cap_) set(k, q, -s * xp + c * xq);
        }
        const double app = get(p, p), apq = get(p, q), aqq = get(q, q);
        set(p, p, c * c * app + 2.0 * c * s * apq + s * s * aqq);
        set(q, q, s * s * app - 2.0 * c * s * apq + c * c * aqq);
        set(p, q, (c * c - s * s) * apq + c * s * (aqq - app));
    }

    int n_;
    int cap_;
    std::vector<double> bands_;
};

} // namespace detail

inline TridiagonalMatrix tridiagonalize(const BandedSymMatrix& M) {
    int bw = M.bandwidth;
    while (bw > 1) {
        bool empty = true;
        for (int i = 0; i + bw < M.n && empty; ++i) empty = (M.at(bw, i) == 0.0);
        if (!empty) break;
        --bw;
    }
    if (bw <= 1) {
        TridiagonalMatrix T;
        T.diag.resize(M.n);
        T.off.assign(M.n > 0 ? M.n - 1 : 0, 0.0);
        for (int i = 0; i < M.n; ++i) T.diag[i] = M.at(0, i);
        if (M.bandwidth >= 1)
            for (int i = 0; i + 1 < M.n; ++i) T.off[i] = M.at(1, i);
        return T;
    }
    BandedSymMatrix trimmed(M.n, bw);
    for (int b = 0; b <= bw; ++b)
        for (int i = 0; i + b < M.n; ++i) trimmed.at(b, i) = M.at(b, i);
    detail::BandReducer reducer(trimmed);
    reducer.run();
    return reducer.extract();
}

// ---------------------------------------------------------------------------
// Sturm counting: the number of eigenvalues of T strictly below E equals the
// number of negative pivots of the LDL^T factorization of T - E. Tiny pivots
// are replaced by +-ulp*|T|_inf with the sign bit preserved, so the count
// never fails even when E hits a Ritz value of a leading submatrix.
// ---------------------------------------------------------------------------

inline int count_eigs_below(const TridiagonalMatrix& T, double E) {
    const int n = T.size();
    if (n == 0) return 0;
    const double tiny =
        std::numeric_limits<double>::epsilon() * std::max(T.inf_norm(), std::abs(E));
    const double floor_pivot = tiny > 0.0 ? tiny : std::numeric_limits<double>::min();
    int count = 0;
    double pivot = T.diag[0] - E;
    for (int k = 0;;) {
        if (std::abs(pivot) < floor_pivot)
            pivot = std::signbit(pivot) ? -floor_pivot : floor_pivot;
        if (pivot < 0.0) ++count;
        if (++k >= n) break;
        pivot = (T.diag[k] - E) - T.off[k - 1] * T.off[k - 1] / pivot;
    }
    return count;
}

// ---------------------------------------------------------------------------
// Window extraction by bisection on the Sturm count, eigenvectors by inverse
// iteration with reorthogonalization inside clusters.
// ---------------------------------------------------------------------------

struct SpectrumMeta {
    double radius = 0.0;
    int cells = 0;
    int sector_j = 0;
    std::string note;
};

struct SpectrumReport {
    double window_lo = 0.0;
    double window_hi = 0.0;
    int count = 0;
    std::vector<double> eigenvalues;           // sorted, each within +-tol
    std::vector<std::vector<double>> vectors;  // optional, unit norm
    std::vector<double> residuals;             // |Tx - lambda x|/|x| per pair
    SpectrumMeta meta;
};

namespace detail {

inline uint64_t splitmix64(uint64_t& state) {
    state += 0x9e3779b97f4a7c15ull;
    uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

inline std::vector<double> seeded_unit_vector(int n, uint64_t seed) {
    std::vector<double> x(n);
    uint64_t state = seed * 0x2545f4914f6cdd1dull + 1;
    double nrm = 0.0;
    for (int i = 0; i < n; ++i) {
        x[i] = (static_cast<double>(splitmix64(state) >> 11) / 9007199254740992.0) - 0.5;
        nrm += x[i] * x[i];
    }
    nrm = std::sqrt(nrm);
    for (double& xi : x) xi /= nrm;
    return x;
}

// LU factorization of T - shift with partial pivoting (three diagonals plus
// one fill diagonal), LAPACK gttrf style.
struct TridiagLU {
    std::vector<double> dl, d, du, du2;
    std::vector<char> piv;

    TridiagLU(const TridiagonalMatrix& T, double shift) {
        const int n = T.size();
        d.resize(n);
        dl.assign(n > 0 ? n - 1 : 0, 0.0);
        du.assign(n > 0 ? n - 1 : 0, 0.0);
        du2.assign(n > 1 ? n - 2 : 0, 0.0);
        piv.assign(n > 0 ? n - 1 : 0, 0);
        for (int i = 0; i < n; ++i) d[i] = T.diag[i] - shift;
        for (int i = 0; i + 1 < n; ++i) dl[i] = du[i] = T.off[i];
        const double tiny = std::numeric_limits<double>::epsilon() *
                            std::max(T.inf_norm() + std::abs(shift), 1.0);
        for (int i = 0; i + 1 < n; ++i) {
            if (std::abs(d[i]) >= std::abs(dl[i])) {
                piv[i] = 0;
                if (std::abs(d[i]) < tiny) d[i] = std::signbit(d[i]) ? -tiny : tiny;
                const double m = dl[i] / d[i];
                dl[i] = m;
                d[i + 1] -= m * du[i];
                if (i + 2 < n) du2[i] = 0.0;
            } else {
                piv[i] = 1;
                const double m = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = m;
                const double next_diag = d[i + 1];
                d[i + 1] = du[i] - m * next_diag;
                du[i] = next_diag;
                if (i + 2 < n) {
                    du2[i] = du[i + 1];
                    du[i + 1] = -m * du[i + 1];
                }
            }
        }
        if (!d.empty() && std::abs(d.back()) < tiny)
            d.back() = std::signbit(d.back()) ? -tiny : tiny;
    }

    void solve(std::vector<double>& b) const {
        const int n = static_cast<int>(d.size());
        for (int i = 0; i + 1 < n; ++i) {
            if (piv[i]) std::swap(b[i], b[i + 1]);
            b[i + 1] -= dl[i] * b[i];
        }
        for (int i = n - 1; i >= 0; --i) {
            double v = b[i];
            if (i + 1 < n) v -= du[i] * b[i + 1];
            if (i + 2 < n) v -= du2[i] * b[i + 2];
            b[i] = v / d[i];
        }
    }
};

} // namespace detail

inline double tridiag_residual(const TridiagonalMatrix& T, const std::vector<double>& x,
                               double lambda) {
    const int n = T.size();
    double num = 0.0, den = 0.0;
    for (int i = 0; i < n; ++i) {
        double v = (T.diag[i] - lambda) * x[i];
        if (i > 0) v += T.off[i - 1] * x[i - 1];
        if (i + 1 < n) v += T.off[i] * x[i + 1];
        num += v * v;
        den += x[i] * x[i];
    }
    return std::sqrt(num / den);
}

inline SpectrumReport eigs_in_window(const TridiagonalMatrix& T, double lo, double hi, double tol,
                                     bool want_vectors = false, SpectrumMeta meta = {}) {
    require(lo < hi, "E_WINDOW_INVALID", "window requires E1 < E2");
    require(tol > 0.0, "E_WINDOW_INVALID", "tolerance must be positive");
    SpectrumReport report;
    report.window_lo = lo;
    report.window_hi = hi;
    report.meta = std::move(meta);

    const int below_lo = count_eigs_below(T, lo);
    const int below_hi = count_eigs_below(T, hi);
    const int m = below_hi - below_lo;
    require(m <= 100000, "E_WINDOW_TOO_MANY",
            "window holds more than 1e5 eigenvalues; shrink the window");
    report.count = m;
    report.eigenvalues.reserve(m);

    for (int k = 1; k <= m; ++k) {
        const int target = below_lo + k;
        double a = lo, b = hi;
        while (b - a > 2.0 * tol) {
            const double mid = 0.5 * (a + b);
            if (count_eigs_below(T, mid) >= target) b = mid;
            else a = mid;
        }
        report.eigenvalues.push_back(0.5 * (a + b));
    }

    if (want_vectors && m > 0) {
        const double norm = T.inf_norm();
        std::vector<std::vector<double>> vectors;
        std::vector<double> residuals;
        std::size_t group_start = 0;
        for (int k = 0; k < m; ++k) {
            const double lambda = report.eigenvalues[k];
            // eigenvalues closer than 1e3*tol share a reorthogonalization group
            if (k > 0 && lambda - report.eigenvalues[k - 1] > 1e3 * tol)
                group_start = vectors.size();
            detail::TridiagLU lu(T, lambda);
            std::vector<double> x = detail::seeded_unit_vector(T.size(), 0x51ec5ull + k);
            for (int it = 0; it < 5; ++it) {
                lu.solve(x);
                for (std::size_t g = group_start; g < vectors.size(); ++g) {
                    double proj = 0.0;
                    for (int i = 0; i < T.size(); ++i) proj += vectors[g][i] * x[i];
                    for (int i = 0; i < T.size(); ++i) x[i] -= proj * vectors[g][i];
                }
                double nrm = 0.0;
                for (double xi : x) nrm += xi * xi;
                nrm = std::sqrt(nrm);
                if (nrm == 0.0) {
                    x = detail::seeded_unit_vector(T.size(), 0xabcdeull + 7 * k + it);
                    continue;
                }
                for (double& xi : x) xi /= nrm;
                if (tridiag_residual(T, x, lambda) <= 1e-10 * (std::abs(lambda) + norm)) break;
            }
            residuals.push_back(tridiag_residual(T, x, lambda));
            vectors.push_back(std::move(x));
        }
        report.vectors = std::move(vectors);
        report.residuals = std::move(residuals);
    }
    return report;
}

inline int count_in_window(const TridiagonalMatrix& T, double lo, double hi) {
    return count_eigs_below(T, hi) - count_eigs_below(T, lo);
}

// Smallest eigenvalue above floor_e, bracketed to +-tol; nullopt when
// (floor_e, ceil_e) holds none.
inline std::optional<double> smallest_eig_above(const TridiagonalMatrix& T, double floor_e,
                                                double ceil_e, double tol) {
    const int base = count_eigs_below(T, floor_e);
    if (count_eigs_below(T, ceil_e) - base <= 0) return std::nullopt;
    double a = floor_e, b = ceil_e;
    while (b - a > 2.0 * tol) {
        const double mid = 0.5 * (a + b);
        if (count_eigs_below(T, mid) - base >= 1) b = mid;
        else a = mid;
    }
    return 0.5 * (a + b);
}

} // namespace diraclab
