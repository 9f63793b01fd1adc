#pragma once

#include <cstddef>
#include <stdexcept>
#include <utility>

#include "impc/dense.hpp"
#include "impc/linalg.hpp"
#include "impc/plant.hpp"

namespace impc {

/// Condensed finite-horizon problem
///
///   minimize  zᵀ F z   subject to  G z + g0 ≤ 0,  H z + V x = 0,
///
/// with decision vector z = [u(t); u(t,1); …; u(t,N-1); x(t,1); …; x(t,N)].
/// Immutable after construction; shareable read-only.
struct MpcProblem {
    std::size_t horizon = 0;      // N
    double sample_period = 0.0;   // Δt
    std::size_t n = 0, m = 0;     // state / input dimensions
    DenseMatrix A, B;             // discretized plant
    DenseMatrix H, V;             // equality constraints H z + V x = 0
    DenseMatrix E;                // selector of the first input block
    DenseMatrix F;                // cost matrix, symmetric positive definite
    double rho = 0.0;             // strong-convexity constant, 2·λ_min(F)
    DenseMatrix G;                // inequality block, possibly 0×nz
    DenseVector g0;
    DenseMatrix HHt;              // cached H Hᵀ (state independent)
    bool has_designer_rows = false;
    // weight provenance of the diagonal cost (for config serialization)
    double input_weight = 0.0, state_weight = 0.0, terminal_weight = 0.0;

    std::size_t decision_dim() const { return (m + n) * horizon; }
    std::size_t equality_dim() const { return H.rows(); }
    std::size_t inequality_dim() const { return G.rows(); }

    double cost(const DenseVector& z) const { return z.dot(F * z); }
    DenseVector cost_gradient(const DenseVector& z) const {
        DenseVector g = F * z;
        g *= 2.0;
        return g;
    }
    // g(z) = G z + g0
    DenseVector inequality_values(const DenseVector& z) const {
        DenseVector v = G * z;
        v += g0;
        return v;
    }
};

// One-shot discretization A = e^{A_c Δt}, B = ∫₀^{Δt} e^{A_c τ}dτ · B_c via
// the exponential of the augmented matrix [[A_c, B_c],[0, 0]]·Δt.
inline std::pair<DenseMatrix, DenseMatrix> discretize(const LinearPlant& plant, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("discretize: sampling period must be positive");
    const std::size_t n = plant.state_dim();
    const std::size_t m = plant.input_dim();
    DenseMatrix aug(n + m, n + m);
    aug.set_block(0, 0, plant.a_c);
    aug.set_block(0, n, plant.b_c);
    aug *= dt;
    const DenseMatrix e = expm(aug);
    DenseMatrix a = e.block(0, 0, n, n);
    DenseMatrix b = e.block(0, n, n, m);
    if (!a.all_finite() || !b.all_finite())
        throw std::runtime_error("discretize: non-finite result");
    return {std::move(a), std::move(b)};
}

// Prediction-constraint blocks. Row block p=1 is [B 0…0 | −I 0…0] with
// V-block A; row block p≥2 puts B under u(t,p-1) and [A −I] under
// [x(t,p-1) x(t,p)]. No extra designer rows.
inline std::pair<DenseMatrix, DenseMatrix> build_prediction_constraints(const DenseMatrix& a,
                                                                        const DenseMatrix& b,
                                                                        std::size_t horizon) {
    if (horizon < 1) throw std::invalid_argument("constraints: horizon must be at least 1");
    const std::size_t n = a.rows();
    const std::size_t m = b.cols();
    require_dim(a.is_square(), "A must be square");
    require_dim(b.rows() == n, "B row count must match A");

    DenseMatrix h(n * horizon, (m + n) * horizon);
    DenseMatrix v(n * horizon, n);
    DenseMatrix minus_i = DenseMatrix::identity(n);
    minus_i *= -1.0;
    const std::size_t x_offset = m * horizon;

    for (std::size_t p = 1; p <= horizon; ++p) {
        const std::size_t row = (p - 1) * n;
        h.set_block(row, (p - 1) * m, b);
        h.set_block(row, x_offset + (p - 1) * n, minus_i);
        if (p == 1)
            v.set_block(0, 0, a);
        else
            h.set_block(row, x_offset + (p - 2) * n, a);
    }
    return {std::move(h), std::move(v)};
}

// Block-diagonal cost matching the z ordering: input block first, then the
// state blocks, with the last state block carrying the terminal weight.
inline DenseMatrix build_cost(double input_weight, double state_weight, std::size_t horizon,
                              std::size_t m, std::size_t n, double terminal_weight = -1.0) {
    if (terminal_weight < 0.0) terminal_weight = state_weight;
    if (!(input_weight > 0.0) || !(state_weight > 0.0) || !(terminal_weight > 0.0))
        throw std::invalid_argument("cost: weights must be positive");
    const std::size_t nz = (m + n) * horizon;
    DenseMatrix f(nz, nz);
    for (std::size_t i = 0; i < m * horizon; ++i) f(i, i) = input_weight;
    for (std::size_t i = m * horizon; i < nz; ++i) f(i, i) = state_weight;
    for (std::size_t i = nz - n; i < nz; ++i) f(i, i) = terminal_weight;
    return f;
}

// ρ = 2·λ_min(F); satisfies ∇f(z)ᵀz ≥ ρ zᵀz exactly for f(z) = zᵀFz.
inline double strong_convexity_rho(const DenseMatrix& f) {
    const auto [lo, hi] = sym_eig_extremes(f);
    (void)hi;
    if (!(lo > 0.0))
        throw std::runtime_error("strong convexity: cost matrix is not positive definite");
    return 2.0 * lo;
}

// E = [I 0 ⋯ 0], extracting the first m components of z.
inline DenseMatrix selector_matrix(std::size_t horizon, std::size_t m, std::size_t n) {
    if (horizon < 1 || m < 1 || n < 1)
        throw std::invalid_argument("selector: dimensions must be positive");
    DenseMatrix e(m, (m + n) * horizon);
    for (std::size_t i = 0; i < m; ++i) e(i, i) = 1.0;
    return e;
}

// Steady input u_r with B_c u_r = −A_c r (least squares, minimum-norm when
// the system is wide). Rejects references without a consistent steady input.
inline TrackingShift shift_to_regulation(const LinearPlant& plant, const DenseVector& r) {
    const std::size_t n = plant.state_dim();
    const std::size_t m = plant.input_dim();
    require_dim(r.size() == n, "reference dimension must match state");

    DenseVector target = plant.a_c * r;
    target *= -1.0;

    DenseVector u_r(m);
    try {
        if (m <= n) {
            // normal equations (B_cᵀ B_c) u = B_cᵀ target
            DenseMatrix gram = plant.b_c.transpose() * plant.b_c;
            u_r = LuFactorization::compute(gram).solve(plant.b_c.transpose_times(target));
        } else {
            // wide: minimum-norm u = B_cᵀ (B_c B_cᵀ)⁻¹ target
            DenseMatrix gram = plant.b_c * plant.b_c.transpose();
            u_r = plant.b_c.transpose_times(LuFactorization::compute(gram).solve(target));
        }
    } catch (const std::runtime_error&) {
        throw std::runtime_error("inconsistent reference: steady-input system is rank deficient");
    }

    DenseVector residual = plant.b_c * u_r;
    residual -= target;
    const double scale = 1.0 + target.inf_norm();
    if (residual.inf_norm() > 1e-9 * scale)
        throw std::runtime_error("inconsistent reference: no steady input satisfies B_c u_r = -A_c r");
    return {r, u_r};
}

inline MpcProblem make_problem(const LinearPlant& plant, std::size_t horizon, double dt,
                               double input_weight, double state_weight,
                               double terminal_weight = -1.0) {
    MpcProblem prob;
    prob.horizon = horizon;
    prob.sample_period = dt;
    prob.n = plant.state_dim();
    prob.m = plant.input_dim();
    auto [a, b] = discretize(plant, dt);
    prob.A = std::move(a);
    prob.B = std::move(b);
    auto [h, v] = build_prediction_constraints(prob.A, prob.B, horizon);
    prob.H = std::move(h);
    prob.V = std::move(v);
    prob.E = selector_matrix(horizon, prob.m, prob.n);
    prob.F = build_cost(input_weight, state_weight, horizon, prob.m, prob.n, terminal_weight);
    prob.input_weight = input_weight;
    prob.state_weight = state_weight;
    prob.terminal_weight = terminal_weight < 0.0 ? state_weight : terminal_weight;
    prob.rho = strong_convexity_rho(prob.F);
    prob.G = DenseMatrix(0, prob.decision_dim());
    prob.g0 = DenseVector(0);
    prob.HHt = prob.H * prob.H.transpose();
    return prob;
}

// Attach an affine inequality block g(z) = G z + g0 ≤ 0.
inline MpcProblem with_inequalities(MpcProblem prob, DenseMatrix g, DenseVector g0) {
    require_dim(g.cols() == prob.decision_dim(), "inequality matrix column count");
    require_dim(g0.size() == g.rows(), "inequality offset length");
    prob.G = std::move(g);
    prob.g0 = std::move(g0);
    return prob;
}

// Append designer equality rows below the prediction blocks.
inline MpcProblem append_equality_rows(MpcProblem prob, const DenseMatrix& h_extra,
                                       const DenseMatrix& v_extra) {
    require_dim(h_extra.cols() == prob.decision_dim(), "extra H rows column count");
    require_dim(v_extra.cols() == prob.n, "extra V rows column count");
    require_dim(h_extra.rows() == v_extra.rows(), "extra row counts must match");
    DenseMatrix h(prob.H.rows() + h_extra.rows(), prob.H.cols());
    DenseMatrix v(prob.V.rows() + v_extra.rows(), prob.V.cols());
    h.set_block(0, 0, prob.H);
    h.set_block(prob.H.rows(), 0, h_extra);
    v.set_block(0, 0, prob.V);
    v.set_block(prob.V.rows(), 0, v_extra);
    prob.H = std::move(h);
    prob.V = std::move(v);
    prob.HHt = prob.H * prob.H.transpose();
    prob.has_designer_rows = true;
    return prob;
}

// h(z, x) = H z + V x, one fused accumulation per row (V-part first, then
// H-part, ascending columns). The rollout identity H z + V x = 0 holds
// bitwise for dynamically consistent z against this accumulation order.
// Rows are processed four at a time; the per-row order is unchanged.
inline DenseVector equality_residual(const MpcProblem& prob, const DenseVector& z,
                                     const DenseVector& x) {
    require_dim(z.size() == prob.decision_dim(), "equality residual: z");
    require_dim(x.size() == prob.n, "equality residual: x");
    const std::size_t rows = prob.equality_dim();
    const std::size_t n = prob.n;
    const std::size_t nz = z.size();
    DenseVector out(rows);

    std::size_t i = 0;
    for (; i + 4 <= rows; i += 4) {
        const double* v0 = prob.V.row_data(i);
        const double* v1 = prob.V.row_data(i + 1);
        const double* v2 = prob.V.row_data(i + 2);
        const double* v3 = prob.V.row_data(i + 3);
        double a0 = 0.0, a1 = 0.0, a2 = 0.0, a3 = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double xj = x[j];
            a0 += v0[j] * xj;
            a1 += v1[j] * xj;
            a2 += v2[j] * xj;
            a3 += v3[j] * xj;
        }
        const double* h0 = prob.H.row_data(i);
        const double* h1 = prob.H.row_data(i + 1);
        const double* h2 = prob.H.row_data(i + 2);
        const double* h3 = prob.H.row_data(i + 3);
        for (std::size_t j = 0; j < nz; ++j) {
            const double zj = z[j];
            a0 += h0[j] * zj;
            a1 += h1[j] * zj;
            a2 += h2[j] * zj;
            a3 += h3[j] * zj;
        }
        out[i] = a0;
        out[i + 1] = a1;
        out[i + 2] = a2;
        out[i + 3] = a3;
    }
    for (; i < rows; ++i) {
        double acc = 0.0;
        const double* vrow = prob.V.row_data(i);
        for (std::size_t j = 0; j < n; ++j) acc += vrow[j] * x[j];
        const double* hrow = prob.H.row_data(i);
        for (std::size_t j = 0; j < nz; ++j) acc += hrow[j] * z[j];
        out[i] = acc;
    }
    return out;
}

}  // namespace impc
