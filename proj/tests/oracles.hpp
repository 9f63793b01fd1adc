// Test-side oracles, independent of the library's computation paths.
#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "impc/dense.hpp"
#include "impc/problem.hpp"

namespace oracles {

using impc::DenseMatrix;
using impc::DenseVector;

// Plain truncated Taylor series for e^M (no scaling, no squaring).
inline DenseMatrix expm_taylor(const DenseMatrix& m, int terms = 30) {
    DenseMatrix sum = DenseMatrix::identity(m.rows());
    DenseMatrix power = DenseMatrix::identity(m.rows());
    for (int k = 1; k <= terms; ++k) {
        power = power * m;
        power *= 1.0 / static_cast<double>(k);
        sum += power;
    }
    return sum;
}

// Dynamically consistent decision vector from an initial state and an input
// sequence. States are accumulated in the exact column order of the
// prediction-constraint rows (V-part first on row block 1, then the H-part
// ascending), so H z + V x is a bitwise zero against the library's fused
// equality residual.
inline DenseVector rollout_decision_vector(const DenseMatrix& a, const DenseMatrix& b,
                                           const DenseVector& x0,
                                           const std::vector<DenseVector>& inputs) {
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    const std::size_t horizon = inputs.size();
    DenseVector z((m + n) * horizon);
    for (std::size_t p = 0; p < horizon; ++p)
        for (std::size_t i = 0; i < m; ++i) z[p * m + i] = inputs[p][i];

    DenseVector x_prev = x0;
    for (std::size_t p = 1; p <= horizon; ++p) {
        DenseVector x_next(n);
        for (std::size_t i = 0; i < n; ++i) {
            double acc = 0.0;
            if (p == 1) {
                // row block 1 carries A in V (visited first), then B in H
                for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * x_prev[j];
                for (std::size_t j = 0; j < m; ++j) acc += b(i, j) * inputs[p - 1][j];
            } else {
                // row block p visits B (input columns) before A (state columns)
                for (std::size_t j = 0; j < m; ++j) acc += b(i, j) * inputs[p - 1][j];
                for (std::size_t j = 0; j < n; ++j) acc += a(i, j) * x_prev[j];
            }
            x_next[i] = acc;
        }
        for (std::size_t i = 0; i < n; ++i) z[horizon * m + (p - 1) * n + i] = x_next[i];
        x_prev = x_next;
    }
    return z;
}

inline DenseVector random_vector(std::mt19937& rng, std::size_t n, double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    DenseVector v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = dist(rng);
    return v;
}

inline DenseMatrix random_matrix(std::mt19937& rng, std::size_t r, std::size_t c,
                                 double scale = 1.0) {
    std::uniform_real_distribution<double> dist(-scale, scale);
    DenseMatrix m(r, c);
    for (std::size_t i = 0; i < r; ++i)
        for (std::size_t j = 0; j < c; ++j) m(i, j) = dist(rng);
    return m;
}

// Random well-conditioned matrix: diagonally dominant by construction.
inline DenseMatrix random_well_conditioned(std::mt19937& rng, std::size_t n) {
    DenseMatrix m = random_matrix(rng, n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) += static_cast<double>(n);
    return m;
}

inline DenseMatrix random_symmetric(std::mt19937& rng, std::size_t n, double scale = 1.0) {
    DenseMatrix m = random_matrix(rng, n, n, scale);
    return impc::symmetric_part(m);
}

}  // namespace oracles
