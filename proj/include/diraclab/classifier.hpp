#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <string>
#include <vector>

#include "diraclab/eigensolver.hpp"
#include "diraclab/error.hpp"
#include "diraclab/fields.hpp"
#include "diraclab/parallel.hpp"
#include "diraclab/radial_operator.hpp"

namespace diraclab {

// ---------------------------------------------------------------------------
// Spectral regime of H for the power-law family V = V0 r^t, B = B0 r^s,
// decided by exact arithmetic on (t, s, V0, B0). Equalities the table does
// not cover map to Boundary, never to a neighboring phase.
// ---------------------------------------------------------------------------

enum class Regime {
    DiscreteSpectrum,      // (c)
    EssentialAtZero,       // (d)
    DensePurePoint,        // (e)
    PurePoint,             // (a), not subclassified
    AbsolutelyContinuous,  // (b)
    Boundary,              // ties left open
};

inline const char* regime_name(Regime r) {
    switch (r) {
        case Regime::DiscreteSpectrum: return "DiscreteSpectrum";
        case Regime::EssentialAtZero: return "EssentialAtZero";
        case Regime::DensePurePoint: return "DensePurePoint";
        case Regime::PurePoint: return "PurePoint";
        case Regime::AbsolutelyContinuous: return "AbsolutelyContinuous";
        case Regime::Boundary: return "Boundary";
    }
    return "?";
}

struct RegimeLabel {
    Regime regime = Regime::Boundary;
    std::string clause;  // which case fired, e.g. "(c):t<s/2"
    int k = 0;           // Landau index for EssentialAtZero
};

inline RegimeLabel predict_regime(double V0, double B0, double t, double s) {
    require(V0 > 0.0 && B0 > 0.0, "E_SPEC_V0_NONPOSITIVE", "classifier needs V0, B0 > 0");
    require(t >= 0.0 && s >= 0.0, "E_SPEC_EXPONENT_NEGATIVE", "classifier needs t, s >= 0");

    if (t < 0.5 * s) return {Regime::DiscreteSpectrum, "(c):t<s/2", 0};
    if (t == 0.5 * s) {
        const double ratio = V0 * V0 / (2.0 * B0);
        if (ratio < 1.0) return {Regime::DiscreteSpectrum, "(c):t=s/2,V0^2<2B0", 0};
        const double k = std::round(ratio);
        if (k >= 1.0 && std::abs(ratio - k) <= 1e-12 * ratio)
            return {Regime::EssentialAtZero, "(d):t=s/2,V0^2=2kB0", static_cast<int>(k)};
        return {Regime::Boundary, "t=s/2,V0^2/(2B0) not in N", 0};
    }
    if (t < 0.5 * (s + 1.0)) return {Regime::DensePurePoint, "(e):s/2<t<(s+1)/2", 0};
    if (t == 0.5 * (s + 1.0)) return {Regime::Boundary, "t=(s+1)/2", 0};
    if (t < s + 1.0) return {Regime::PurePoint, "(a):t<s+1", 0};
    if (t == s + 1.0) {
        if (V0 < B0 / (s + 2.0)) return {Regime::PurePoint, "(a):t=s+1,V0<B0/(s+2)", 0};
        if (V0 > B0 / (s + 2.0))
            return {Regime::AbsolutelyContinuous, "(b):t=s+1,V0>B0/(s+2)", 0};
        return {Regime::Boundary, "t=s+1,V0=B0/(s+2)", 0};
    }
    return {Regime::AbsolutelyContinuous, "(b):t>s+1", 0};
}

// ---------------------------------------------------------------------------
// Sector policy for radial probes. Explicit ranges come from the CLI; Auto
// scans outward from j = 0 / j = -1 and stops a side once 32 consecutive
// sectors contribute nothing, bounded by ceil(A(R) R) + 64.
// ---------------------------------------------------------------------------

struct SectorPolicy {
    bool automatic = true;
    int lo = 0;
    int hi = 0;

    static SectorPolicy auto_scan() { return SectorPolicy{}; }
    static SectorPolicy range(int lo, int hi) { return SectorPolicy{false, lo, hi}; }
};

namespace detail {

inline long hard_sector_bound(const RadialFieldView& field, double R) {
    const double aR = field.A(R);
    const double bound = std::ceil(aR * R) + 64.0;
    return static_cast<long>(std::min(bound, 200000.0));
}

// Window count summed over sectors under the scan policy.
template <class CountFn>
long scan_sectors(const RadialFieldView& field, double R, const SectorPolicy& policy,
                  const CountFn& count_for, int threads) {
    if (!policy.automatic) {
        const std::size_t n = static_cast<std::size_t>(policy.hi - policy.lo + 1);
        std::vector<long> counts(n, 0);
        parallel_for(n, threads, [&](std::size_t i) {
            counts[i] = count_for(policy.lo + static_cast<int>(i));
        });
        return std::accumulate(counts.begin(), counts.end(), 0L);
    }
    const long bound = hard_sector_bound(field, R);
    const int stop_after = 32;
    long total = 0;
    for (int dir = 0; dir < 2; ++dir) {
        int empties = 0;
        long steps = 0;
        int j = (dir == 0) ? 0 : -1;
        // batched so the sectors inside one batch run in parallel
        const int batch = std::max(4 * threads, 16);
        while (empties < stop_after && steps <= bound) {
            std::vector<long> counts(batch, 0);
            const int j0 = j;
            parallel_for(static_cast<std::size_t>(batch), threads, [&](std::size_t i) {
                const int jj = (dir == 0) ? j0 + static_cast<int>(i) : j0 - static_cast<int>(i);
                counts[i] = count_for(jj);
            });
            for (int i = 0; i < batch && empties < stop_after && steps <= bound; ++i) {
                total += counts[i];
                empties = (counts[i] == 0) ? empties + 1 : 0;
                ++steps;
            }
            j = (dir == 0) ? j0 + batch : j0 - batch;
        }
    }
    return total;
}

} // namespace detail

// ---------------------------------------------------------------------------
// Accumulation probe: counts of eigenvalues in (-E, E) summed over sectors,
// swept over truncation radii at fixed cell density. A growing count is the
// finite-volume witness of essential spectrum inside the window; stable
// counts witness discreteness. Dense pure point spectrum itself cannot be
// certified on a truncated domain; the verdict reports the count-growth
// signature and the arithmetic label is the interpretation.
// ---------------------------------------------------------------------------

enum class AccumulationVerdict { Stable, Growing, Indeterminate };

inline const char* verdict_name(AccumulationVerdict v) {
    switch (v) {
        case AccumulationVerdict::Stable: return "Stable";
        case AccumulationVerdict::Growing: return "Growing";
        case AccumulationVerdict::Indeterminate: return "Indeterminate";
    }
    return "?";
}

struct AccumulationReport {
    double window_E = 0.0;
    std::vector<double> radii;
    std::vector<long> counts;
    double slope = 0.0;
    AccumulationVerdict verdict = AccumulationVerdict::Indeterminate;
};

inline AccumulationReport probe_accumulation(const RadialFieldSpec& spec, double window_E,
                                             std::vector<double> radii, SectorPolicy sectors,
                                             double density, int threads = 1) {
    require(radii.size() >= 3, "E_PROBE_RADII", "accumulation probe needs >= 3 radii");
    require(std::is_sorted(radii.begin(), radii.end()) &&
                std::adjacent_find(radii.begin(), radii.end()) == radii.end(),
            "E_PROBE_RADII", "radii must be strictly increasing");
    require(window_E > 0.0, "E_WINDOW_INVALID", "window half-width must be positive");
    require(density > 0.0, "E_GRID_CELLS", "cell density must be positive");

    const RadialFieldView field = make_view(spec);
    AccumulationReport report;
    report.window_E = window_E;
    report.radii = radii;

    for (double R : radii) {
        const int N = std::max(16, static_cast<int>(std::lround(density * R)));
        const RadialGrid grid = build_radial_grid(R, N);
        const auto count_for = [&](int j) -> long {
            const TridiagonalMatrix T = assemble_h_j_tridiag(field, grid, SectorIndex{j});
            return count_in_window(T, -window_E, window_E);
        };
        report.counts.push_back(detail::scan_sectors(field, R, sectors, count_for, threads));
    }

    // least-squares slope of count vs R
    const std::size_t n = radii.size();
    double mr = 0.0, mc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mr += radii[i];
        mc += static_cast<double>(report.counts[i]);
    }
    mr /= n;
    mc /= n;
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        num += (radii[i] - mr) * (report.counts[i] - mc);
        den += (radii[i] - mr) * (radii[i] - mr);
    }
    report.slope = num / den;

    const std::size_t top = n - n / 2;
    bool top_constant = true;
    for (std::size_t i = top; i < n; ++i)
        top_constant = top_constant && (report.counts[i] == report.counts[top - 1]);
    bool strictly_increasing = true;
    for (std::size_t i = 1; i < n; ++i)
        strictly_increasing = strictly_increasing && (report.counts[i] > report.counts[i - 1]);

    if (top_constant) report.verdict = AccumulationVerdict::Stable;
    else if (strictly_increasing && report.slope > 0.5) report.verdict = AccumulationVerdict::Growing;
    else report.verdict = AccumulationVerdict::Indeterminate;
    return report;
}

// ---------------------------------------------------------------------------
// Spectral-gap probe for V = 0: the largest eigenvalue-free symmetric
// interval around zero, excluding the 1e-6 neighborhood that holds the
// zero modes. The reported half-gap is compared against sqrt(2 inf B).
// ---------------------------------------------------------------------------

struct GapReport {
    std::vector<double> radii;
    std::vector<double> half_gaps;
    double lower_bound = 0.0;  // sqrt(2 inf B)
};

inline GapReport probe_gap(const RadialFieldSpec& spec, const std::vector<double>& radii,
                           SectorPolicy sectors, double density, int threads = 1) {
    const RadialFieldView field = make_view(spec);
    for (double r : {0.25, 0.5, 1.0, 2.0, 5.0}) {
        if (r > radii.back()) break;
        require(std::abs(field.v(r)) <= 1e-10, "E_GAP_REQUIRES_ZERO_V",
                "gap probe requires V identically 0");
    }
    require(!sectors.automatic, "E_PROBE_SECTORS",
            "gap probe needs an explicit sector range (every sector holds a zero mode)");

    GapReport report;
    report.radii = radii;
    report.lower_bound = std::sqrt(2.0 * field.B_lower);
    const double exclusion = 1e-6;

    for (double R : radii) {
        const int N = std::max(16, static_cast<int>(std::lround(density * R)));
        const RadialGrid grid = build_radial_grid(R, N);
        const std::size_t n = static_cast<std::size_t>(sectors.hi - sectors.lo + 1);
        std::vector<double> mins(n);
        parallel_for(n, threads, [&](std::size_t i) {
            const SectorIndex sec{sectors.lo + static_cast<int>(i)};
            const TridiagonalMatrix T = assemble_h_j_tridiag(field, grid, sec);
            const double ceiling = T.inf_norm() + 1.0;
            double best = std::numeric_limits<double>::infinity();
            if (auto lam = smallest_eig_above(T, exclusion, ceiling, 1e-6)) best = *lam;
            // mirror side: smallest |lambda| among eigenvalues below -exclusion
            const int below = count_eigs_below(T, -exclusion);
            if (below > 0) {
                double a = -ceiling, b = -exclusion;
                while (b - a > 2e-6) {
                    const double mid = 0.5 * (a + b);
                    if (count_eigs_below(T, mid) >= below) b = mid;
                    else a = mid;
                }
                best = std::min(best, -0.5 * (a + b));
            }
            mins[i] = best;
        });
        report.half_gaps.push_back(*std::min_element(mins.begin(), mins.end()));
    }
    return report;
}

} // namespace diraclab
