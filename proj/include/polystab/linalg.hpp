#pragma once

#include <cmath>
#include <vector>

#include "polystab/errors.hpp"

namespace polystab {

using Matrix = std::vector<std::vector<double>>;

/// Solves A x = b by Gaussian elimination with partial pivoting.
/// Throws SingularSystem when no pivot above `tol` can be found.
inline std::vector<double> solve_linear(Matrix a, std::vector<double> b, double tol = 1e-12) {
    const int n = static_cast<int>(a.size());
    for (int i = 0; i < n; ++i) {
        if (static_cast<int>(a[i].size()) != n) throw SingularSystem("solve_linear: non-square matrix");
    }
    for (int col = 0; col < n; ++col) {
        int piv = col;
        for (int r = col + 1; r < n; ++r) {
            if (std::fabs(a[r][col]) > std::fabs(a[piv][col])) piv = r;
        }
        if (std::fabs(a[piv][col]) <= tol) throw SingularSystem("solve_linear: singular matrix");
        std::swap(a[piv], a[col]);
        std::swap(b[piv], b[col]);
        const double inv = 1.0 / a[col][col];
        for (int r = 0; r < n; ++r) {
            if (r == col) continue;
            const double factor = a[r][col] * inv;
            if (factor == 0.0) continue;
            for (int c = col; c < n; ++c) a[r][c] -= factor * a[col][c];
            b[r] -= factor * b[col];
        }
    }
    std::vector<double> x(n);
    for (int i = 0; i < n; ++i) x[i] = b[i] / a[i][i];
    return x;
}

}  // namespace polystab
