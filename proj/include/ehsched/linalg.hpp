#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <numeric>
#include <stdexcept>
#include <string>
#include <vector>

namespace ehsched {

// Dense row-major matrix. State spaces stay in the low thousands, so no
// sparsity machinery.
struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> data;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), data(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int r, int c) { return data[static_cast<size_t>(r) * cols + c]; }
    double operator()(int r, int c) const { return data[static_cast<size_t>(r) * cols + c]; }
};

class SingularMatrixError : public std::runtime_error {
public:
    SingularMatrixError(int column, double pivot)
        : std::runtime_error("singular linear system: pivot " + std::to_string(pivot) +
                             " at column " + std::to_string(column)),
          column(column) {}
    int column;
};

namespace detail {

// LU factorization with partial pivoting, in place; perm holds the row order.
inline void lu_factor(Matrix& m, std::vector<int>& perm, double pivot_tol = 1e-12) {
    const int n = m.rows;
    perm.resize(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (int k = 0; k < n; ++k) {
        int best = k;
        double best_mag = std::abs(m(k, k));
        for (int r = k + 1; r < n; ++r) {
            double mag = std::abs(m(r, k));
            if (mag > best_mag) {
                best = r;
                best_mag = mag;
            }
        }
        if (best_mag < pivot_tol) throw SingularMatrixError(k, best_mag);
        if (best != k) {
            for (int c = 0; c < n; ++c) std::swap(m(k, c), m(best, c));
            std::swap(perm[k], perm[best]);
        }
        const double inv = 1.0 / m(k, k);
        for (int r = k + 1; r < n; ++r) {
            const double factor = m(r, k) * inv;
            m(r, k) = factor;
            if (factor == 0.0) continue;
            for (int c = k + 1; c < n; ++c) m(r, c) -= factor * m(k, c);
        }
    }
}

inline std::vector<double> lu_solve(const Matrix& lu, const std::vector<int>& perm,
                                    const std::vector<double>& b) {
    const int n = lu.rows;
    std::vector<double> x(n);
    for (int r = 0; r < n; ++r) x[r] = b[perm[r]];
    for (int r = 1; r < n; ++r) {
        double s = x[r];
        for (int c = 0; c < r; ++c) s -= lu(r, c) * x[c];
        x[r] = s;
    }
    for (int r = n - 1; r >= 0; --r) {
        double s = x[r];
        for (int c = r + 1; c < n; ++c) s -= lu(r, c) * x[c];
        x[r] = s / lu(r, r);
    }
    return x;
}

} // namespace detail

// Left-multiply: (x A)_c = sum_r x_r A(r, c).
inline std::vector<double> row_times_matrix(const std::vector<double>& x, const Matrix& a) {
    std::vector<double> out(a.cols, 0.0);
    for (int r = 0; r < a.rows; ++r) {
        const double xr = x[r];
        if (xr == 0.0) continue;
        const double* row = &a.data[static_cast<size_t>(r) * a.cols];
        for (int c = 0; c < a.cols; ++c) out[c] += xr * row[c];
    }
    return out;
}

inline double dot(const std::vector<double>& a, const std::vector<double>& b) {
    double s = 0.0;
    for (size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
    return s;
}

// Solves the row-vector system x A = b by LU with partial pivoting on A^T,
// with one step of iterative refinement. Throws SingularMatrixError naming
// the column where elimination broke down.
inline std::vector<double> solve_row_system(const Matrix& a, const std::vector<double>& b) {
    if (a.rows != a.cols) throw std::invalid_argument("solve_row_system requires a square matrix");
    const int n = a.rows;
    if (static_cast<int>(b.size()) != n) throw std::invalid_argument("rhs length mismatch");

    Matrix at(n, n);
    for (int r = 0; r < n; ++r)
        for (int c = 0; c < n; ++c) at(c, r) = a(r, c);
    std::vector<int> perm;
    detail::lu_factor(at, perm);

    std::vector<double> x = detail::lu_solve(at, perm, b);

    // A couple of refinement passes keep residuals near machine precision on
    // the moderately conditioned systems built here.
    for (int pass = 0; pass < 2; ++pass) {
        std::vector<double> resid = row_times_matrix(x, a);
        for (int c = 0; c < n; ++c) resid[c] = b[c] - resid[c];
        std::vector<double> corr = detail::lu_solve(at, perm, resid);
        for (int r = 0; r < n; ++r) x[r] += corr[r];
    }
    return x;
}

inline double max_abs(const std::vector<double>& v) {
    double m = 0.0;
    for (double x : v) m = std::max(m, std::abs(x));
    return m;
}

} // namespace ehsched
