#pragma once

#include <stdexcept>

#include "impc/dense.hpp"

namespace impc {

// Continuous-time LTI plant  ẋ = A_c x + B_c u.
struct LinearPlant {
    DenseMatrix a_c;
    DenseMatrix b_c;

    LinearPlant(DenseMatrix a, DenseMatrix b) : a_c(std::move(a)), b_c(std::move(b)) {
        if (!a_c.is_square()) throw std::invalid_argument("plant: A_c must be square");
        if (b_c.rows() != a_c.rows())
            throw std::invalid_argument("plant: B_c row count must match state dimension");
        if (!a_c.all_finite() || !b_c.all_finite())
            throw std::invalid_argument("plant: non-finite entries");
    }

    std::size_t state_dim() const { return a_c.rows(); }
    std::size_t input_dim() const { return b_c.cols(); }

    DenseVector derivative(const DenseVector& x, const DenseVector& u) const {
        DenseVector dx = a_c * x;
        dx += b_c * u;
        return dx;
    }
};

// QSR dissipativity parameters of the plant supply rate.
struct QsrTriple {
    DenseMatrix q_c;  // n×n
    DenseMatrix s_c;  // n×m
    DenseMatrix r_c;  // m×m

    void validate(std::size_t n, std::size_t m) const {
        require_dim(q_c.rows() == n && q_c.cols() == n, "Q_c must be n×n");
        require_dim(s_c.rows() == n && s_c.cols() == m, "S_c must be n×m");
        require_dim(r_c.rows() == m && r_c.cols() == m, "R_c must be m×m");
    }
};

// Coordinate shift turning reference tracking into regulation:
// x̃ = x − r, ũ = u − u_r with A_c r + B_c u_r = 0.
struct TrackingShift {
    DenseVector r;
    DenseVector u_r;
};

}  // namespace impc
