#pragma once

#include <cmath>
#include <vector>

#include "diraclab/banded.hpp"
#include "diraclab/eigensolver.hpp"
#include "diraclab/error.hpp"
#include "diraclab/fields.hpp"

namespace diraclab {

// ---------------------------------------------------------------------------
// Staggered half-line grid. The two spinor components live on interlaced
// node families so the first-order difference is centered (no fermion
// doubling) and no node sits on the r = 0 singularity.
// ---------------------------------------------------------------------------

struct RadialGrid {
    double R = 0.0;
    int N = 0;
    double h = 0.0;

    double upper_node(int i) const { return (i + 0.5) * h; }  // i = 0..N-1
    double lower_node(int i) const { return (i + 1.0) * h; }  // i = 0..N-2
};

inline RadialGrid build_radial_grid(double R, int N) {
    require(R > 0.0, "E_GRID_RADIUS", "truncation radius must be positive");
    require(N >= 16, "E_GRID_CELLS", "grid needs at least 16 cells");
    return RadialGrid{R, N, R / N};
}

struct SectorIndex {
    int j = 0;
    double m() const { return j + 0.5; }
};

// ---------------------------------------------------------------------------
// Sector operator on the half line:
//   [ v(r)             -d/dr + q(r) ]          q(r) = A(r) - m_j / r
//   [  d/dr + q(r)      v(r)        ]
// assembled as an exactly symmetric tridiagonal matrix in interleaved node
// ordering (dimension 2N-1). The hard wall at r = R is a Dirichlet cut on the
// node family that would sit at R; the absent node at r = 0 plays the same
// role at the origin.
//
// The component-to-grid assignment mirrors with the sign of m_j: the
// component that behaves like r^{1/2} at the origin (upper for m_j > 0,
// lower for m_j < 0) is placed on the half-offset family, which keeps the
// eigenvalue error at O(h^2); the opposite assignment degrades the
// |m_j| = 1/2 sectors to logarithmic convergence.
// ---------------------------------------------------------------------------

inline BandedSymMatrix assemble_h_j(const RadialFieldView& field, const RadialGrid& grid,
                                    SectorIndex sector) {
    const int N = grid.N;
    const double h = grid.h;
    const double m = sector.m();
    const auto q = [&](double r) { return field.A(r) - m / r; };

    BandedSymMatrix M(2 * N - 1, 1);
    for (int i = 0; i < N; ++i) M.at(0, 2 * i) = field.v(grid.upper_node(i));
    for (int i = 0; i + 1 < N; ++i) M.at(0, 2 * i + 1) = field.v(grid.lower_node(i));

    if (m > 0.0) {
        // upper component on half-offset nodes, lower on integer nodes;
        // q sampled at the integer node owning each difference row
        for (int i = 0; i + 1 < N; ++i) {
            const double qi = q(grid.lower_node(i));
            M.at(1, 2 * i) = -1.0 / h + 0.5 * qi;
            M.at(1, 2 * i + 1) = 1.0 / h + 0.5 * qi;
        }
    } else {
        // mirrored assignment; q sampled at the half-offset node owning the row
        for (int i = 1; i < N; ++i) M.at(1, 2 * i - 1) = -1.0 / h + 0.5 * q(grid.upper_node(i));
        for (int i = 0; i + 1 < N; ++i) M.at(1, 2 * i) = 1.0 / h + 0.5 * q(grid.upper_node(i));
    }
    return M;
}

inline BandedSymMatrix assemble_h_j(const RadialFieldSpec& spec, const RadialGrid& grid,
                                    SectorIndex sector) {
    return assemble_h_j(make_view(spec), grid, sector);
}

inline TridiagonalMatrix assemble_h_j_tridiag(const RadialFieldView& field, const RadialGrid& grid,
                                              SectorIndex sector) {
    return tridiagonalize(assemble_h_j(field, grid, sector));
}

// ---------------------------------------------------------------------------
// Coercivity probe: min over the discrete sector space of |h_j psi| / |v psi|,
// the square root of the smallest eigenvalue of the pencil (h_j^T h_j, v^2).
// The diagonal right-hand side reduces the pencil to an ordinary symmetric
// problem of bandwidth 2.
// ---------------------------------------------------------------------------

inline double coercivity_ratio(const RadialFieldView& field, const RadialGrid& grid,
                               SectorIndex sector) {
    const int N = grid.N;
    const int dim = 2 * N - 1;
    std::vector<double> vnode(dim);
    for (int i = 0; i < N; ++i) vnode[2 * i] = field.v(grid.upper_node(i));
    for (int i = 0; i + 1 < N; ++i) vnode[2 * i + 1] = field.v(grid.lower_node(i));
    for (double v : vnode)
        require(v > 0.0, "E_COERCIVITY_POTENTIAL",
                "coercivity probe needs v(r) >= v_min > 0 on (0, R]");

    const TridiagonalMatrix T = assemble_h_j_tridiag(field, grid, sector);

    // K = T^2 scaled by 1/v on both sides, bandwidth 2.
    BandedSymMatrix K(dim, 2);
    for (int i = 0; i < dim; ++i) {
        double kii = T.diag[i] * T.diag[i];
        if (i > 0) kii += T.off[i - 1] * T.off[i - 1];
        if (i + 1 < dim) kii += T.off[i] * T.off[i];
        K.at(0, i) = kii / (vnode[i] * vnode[i]);
        if (i + 1 < dim)
            K.at(1, i) = T.off[i] * (T.diag[i] + T.diag[i + 1]) / (vnode[i] * vnode[i + 1]);
        if (i + 2 < dim) K.at(2, i) = T.off[i] * T.off[i + 1] / (vnode[i] * vnode[i + 2]);
    }
    const TridiagonalMatrix C = tridiagonalize(K);
    double lo = 0.0, hi = C.inf_norm() + 1.0;
    // smallest eigenvalue of a PSD-scaled square; bisect the first count step
    while (hi - lo > 1e-12 * (1.0 + hi)) {
        const double mid = 0.5 * (lo + hi);
        if (count_eigs_below(C, mid) >= 1) hi = mid;
        else lo = mid;
    }
    const double lambda = std::max(0.5 * (lo + hi), 0.0);
    return std::sqrt(lambda);
}

inline double coercivity_ratio(const RadialFieldSpec& spec, const RadialGrid& grid,
                               SectorIndex sector) {
    return coercivity_ratio(make_view(spec), grid, sector);
}

} // namespace diraclab
