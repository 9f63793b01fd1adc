#pragma once

#include <stdexcept>
#include <utility>

#include "impc/dense.hpp"
#include "impc/linalg.hpp"
#include "impc/problem.hpp"

namespace impc {

struct QpSolution {
    DenseVector z;
    DenseVector lambda;
};

/// Conventional-MPC inner solve: the equality-constrained QP
///   min zᵀFz  s.t.  Hz + Vx = 0
/// via its KKT system [2F, Hᵀ; H, 0][z; λ] = [0; −Vx]. Cold start every
/// call: the KKT matrix is assembled and factorized per solve so measured
/// latencies reflect a full per-sample solve.
inline QpSolution solve_equality_qp(const MpcProblem& prob, const DenseVector& x) {
    if (prob.inequality_dim() > 0)
        throw std::invalid_argument(
            "baseline qp: inequality constraints are not supported by the equality-QP solver");
    require_dim(x.size() == prob.n, "baseline qp: plant state");

    const std::size_t nz = prob.decision_dim();
    const std::size_t ne = prob.equality_dim();
    DenseMatrix kkt(nz + ne, nz + ne);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nz; ++j) kkt(i, j) = 2.0 * prob.F(i, j);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nz; ++j) {
            kkt(nz + i, j) = prob.H(i, j);
            kkt(j, nz + i) = prob.H(i, j);
        }

    DenseVector rhs(nz + ne);
    const DenseVector vx = prob.V * x;
    for (std::size_t i = 0; i < ne; ++i) rhs[nz + i] = -vx[i];

    DenseVector sol;
    try {
        sol = LuFactorization::compute(kkt).solve(rhs);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("baseline qp: singular KKT matrix");
    }
    return {sol.segment(0, nz), sol.segment(nz, ne)};
}

// u = E z*: first input block of the optimizer.
inline DenseVector mpc_step(const MpcProblem& prob, const DenseVector& x) {
    return solve_equality_qp(prob, x).z.segment(0, prob.m);
}

}  // namespace impc
