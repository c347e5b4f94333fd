// linalg.hpp - small dense matrices for rate-equation and least-squares work
//
// Everything here operates on systems of a handful of unknowns (level
// occupancies, fit parameters), so plain Gaussian elimination is used
// throughout.

#pragma once

#include <cmath>
#include <stdexcept>
#include <vector>

namespace photonstat {

struct Matrix {
    int rows = 0;
    int cols = 0;
    std::vector<double> a;

    Matrix() = default;
    Matrix(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c, 0.0) {}

    double& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    double operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }
};

// Solve A x = b by Gaussian elimination with partial pivoting. A is square.
inline std::vector<double> solve_linear_system(Matrix A, std::vector<double> b) {
    const int n = A.rows;
    if (A.cols != n || static_cast<int>(b.size()) != n)
        throw std::invalid_argument("solve_linear_system: dimension mismatch");

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(piv, k))) piv = i;
        if (A(piv, k) == 0.0)
            throw std::runtime_error("solve_linear_system: singular matrix");
        if (piv != k) {
            for (int j = k; j < n; ++j) std::swap(A(k, j), A(piv, j));
            std::swap(b[k], b[piv]);
        }
        for (int i = k + 1; i < n; ++i) {
            double f = A(i, k) / A(k, k);
            for (int j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            b[i] -= f * b[k];
        }
    }
    std::vector<double> x(n, 0.0);
    for (int i = n - 1; i >= 0; --i) {
        double s = b[i];
        for (int j = i + 1; j < n; ++j) s -= A(i, j) * x[j];
        x[i] = s / A(i, i);
    }
    return x;
}

// Inverse via Gauss-Jordan. Throws on a singular matrix.
inline Matrix invert_matrix(Matrix A) {
    const int n = A.rows;
    if (A.cols != n) throw std::invalid_argument("invert_matrix: not square");

    Matrix inv(n, n);
    for (int i = 0; i < n; ++i) inv(i, i) = 1.0;

    for (int k = 0; k < n; ++k) {
        int piv = k;
        for (int i = k + 1; i < n; ++i)
            if (std::fabs(A(i, k)) > std::fabs(A(piv, k))) piv = i;
        if (A(piv, k) == 0.0)
            throw std::runtime_error("invert_matrix: singular matrix");
        if (piv != k) {
            for (int j = 0; j < n; ++j) {
                std::swap(A(k, j), A(piv, j));
                std::swap(inv(k, j), inv(piv, j));
            }
        }
        double d = A(k, k);
        for (int j = 0; j < n; ++j) {
            A(k, j) /= d;
            inv(k, j) /= d;
        }
        for (int i = 0; i < n; ++i) {
            if (i == k) continue;
            double f = A(i, k);
            if (f == 0.0) continue;
            for (int j = 0; j < n; ++j) {
                A(i, j) -= f * A(k, j);
                inv(i, j) -= f * inv(k, j);
            }
        }
    }
    return inv;
}

}  // namespace photonstat
