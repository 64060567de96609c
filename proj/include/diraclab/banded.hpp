#pragma once

#include <cassert>
#include <cmath>
#include <cstddef>
#include <vector>

#include "diraclab/error.hpp"

namespace diraclab {

// Symmetric band matrix, lower bands stored densely:
//   bands[b][i] = M(i+b, i),  b = 0..bandwidth,  i = 0..n-1-b.
// Only the lower triangle is stored, so symmetry is structural.
struct BandedSymMatrix {
    int n = 0;
    int bandwidth = 0;
    std::vector<double> bands; // (bandwidth+1) rows of length n, row-major

    BandedSymMatrix() = default;
    BandedSymMatrix(int dim, int bw) : n(dim), bandwidth(bw), bands(static_cast<std::size_t>(bw + 1) * dim, 0.0) {
        require(dim >= 1 && bw >= 0 && bw < dim, "E_INTERNAL", "bad band matrix shape");
    }

    double& at(int b, int i) { return bands[static_cast<std::size_t>(b) * n + i]; }
    double at(int b, int i) const { return bands[static_cast<std::size_t>(b) * n + i]; }

    // General accessors resolve (i, j) through symmetry; out-of-band reads are 0.
    double get(int i, int j) const {
        if (i < j) std::swap(i, j);
        const int b = i - j;
        if (b > bandwidth) return 0.0;
        return at(b, j);
    }
    void set(int i, int j, double value) {
        if (i < j) std::swap(i, j);
        const int b = i - j;
        require(b <= bandwidth, "E_INTERNAL", "write outside band");
        at(b, j) = value;
    }

    double inf_norm() const {
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = 0.0;
            for (int j = std::max(0, i - bandwidth); j <= std::min(n - 1, i + bandwidth); ++j)
                row += std::abs(get(i, j));
            best = std::max(best, row);
        }
        return best;
    }
};

struct TridiagonalMatrix {
    std::vector<double> diag;
    std::vector<double> off;

    int size() const { return static_cast<int>(diag.size()); }

    double inf_norm() const {
        const int n = size();
        double best = 0.0;
        for (int i = 0; i < n; ++i) {
            double row = std::abs(diag[i]);
            if (i > 0) row += std::abs(off[i - 1]);
            if (i + 1 < n) row += std::abs(off[i]);
            best = std::max(best, row);
        }
        return best;
    }
};

} // namespace diraclab
