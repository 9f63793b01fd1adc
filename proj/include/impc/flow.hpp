#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <stdexcept>

#include "impc/dense.hpp"
#include "impc/integrate.hpp"
#include "impc/linalg.hpp"
#include "impc/problem.hpp"

namespace impc {

/// Gains of the primal-dual gradient flow. K = 1+2αβ is derived, never set.
struct FlowParams {
    double alpha = 1.0;   // positive
    double beta = 0.0;    // nonnegative
    double gamma = 0.0;   // nonnegative, used by the implicit extension only

    FlowParams() = default;
    FlowParams(double a, double b, double g = 0.0) : alpha(a), beta(b), gamma(g) {
        if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
        if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
        if (gamma < 0.0) throw std::invalid_argument("gamma must be nonnegative");
    }

    double gain_k() const { return 1.0 + 2.0 * alpha * beta; }
};

/// Dynamic state of the flow controller. μ stays componentwise nonnegative;
/// the combined dual λ′ = λ + βλ̇ is a derived signal, not stored.
struct ControllerState {
    DenseVector z;
    DenseVector mu;
    DenseVector lambda;

    static ControllerState zero(const MpcProblem& prob) {
        return {DenseVector(prob.decision_dim()), DenseVector(prob.inequality_dim()),
                DenseVector(prob.equality_dim())};
    }
};

struct FlowDerivative {
    DenseVector z_dot;
    DenseVector mu_dot;
    DenseVector lambda_dot;
};

// [σ]⁺_ε: identity while ε > 0, max{0,σ} on the boundary ε = 0.
inline double pos_projection(double sigma, double eps) {
    if (eps < 0.0) throw std::invalid_argument("projection: epsilon must be nonnegative");
    return eps > 0.0 ? sigma : std::max(0.0, sigma);
}

inline DenseVector pos_projection(const DenseVector& sigma, const DenseVector& eps) {
    require_dim(sigma.size() == eps.size(), "projection operands");
    DenseVector out(sigma.size());
    for (std::size_t i = 0; i < sigma.size(); ++i) out[i] = pos_projection(sigma[i], eps[i]);
    return out;
}

namespace detail {

// d = −∇f(z) − Gᵀμ − k·Hᵀv. Shared by the explicit flow (v = λ′, k = K) and
// the implicit extension (v = λ, k = 1) so the β=γ=0 degeneration is exact.
inline DenseVector primal_descent(const MpcProblem& prob, const DenseVector& z,
                                  const DenseVector& mu, const DenseVector& v, double k) {
    DenseVector d = prob.cost_gradient(z);
    d *= -1.0;
    if (prob.inequality_dim() > 0) {
        DenseVector gm = prob.G.transpose_times(mu);
        d -= gm;
    }
    DenseVector hv = prob.H.transpose_times(v);
    for (std::size_t i = 0; i < d.size(); ++i) d[i] -= k * hv[i];
    return d;
}

inline void check_flow_inputs(const ControllerState& s, const DenseVector& x,
                              const MpcProblem& prob) {
    require_dim(s.z.size() == prob.decision_dim(), "flow state z");
    require_dim(s.mu.size() == prob.inequality_dim(), "flow state mu");
    require_dim(s.lambda.size() == prob.equality_dim(), "flow state lambda");
    require_dim(x.size() == prob.n, "flow plant state");
    for (std::size_t i = 0; i < s.mu.size(); ++i)
        if (s.mu[i] < 0.0) throw std::invalid_argument("flow: mu must be nonnegative");
}

}  // namespace detail

/// Primal-dual gradient flow. Evaluation order: the λ dynamics are explicit,
/// so λ̇ is computed first, then λ′ = λ + βλ̇ feeds the primal descent:
///
///   λ̇ = (H z + V x − αλ) / (1+αβ)
///   ż = −∇f(z) − ∇g(z)μ − K Hᵀλ′,   K = 1+2αβ
///   μ̇ = [g(z)]⁺_μ
inline FlowDerivative flow_rhs(const ControllerState& s, const DenseVector& x,
                               const MpcProblem& prob, const FlowParams& p) {
    detail::check_flow_inputs(s, x, prob);
    const double denom = 1.0 + p.alpha * p.beta;

    const DenseVector h = equality_residual(prob, s.z, x);
    DenseVector lambda_dot(h.size());
    for (std::size_t i = 0; i < h.size(); ++i)
        lambda_dot[i] = (h[i] - p.alpha * s.lambda[i]) / denom;

    DenseVector lambda_prime(s.lambda.size());
    for (std::size_t i = 0; i < s.lambda.size(); ++i)
        lambda_prime[i] = s.lambda[i] + p.beta * lambda_dot[i];

    FlowDerivative d;
    d.z_dot = detail::primal_descent(prob, s.z, s.mu, lambda_prime, p.gain_k());
    d.lambda_dot = std::move(lambda_dot);
    d.mu_dot = prob.inequality_dim() > 0
                   ? pos_projection(prob.inequality_values(s.z), s.mu)
                   : DenseVector(0);
    if (!d.z_dot.all_finite() || !d.lambda_dot.all_finite() || !d.mu_dot.all_finite())
        throw std::runtime_error("flow: non-finite derivative evaluation");
    return d;
}

// u = E z: the first input block of the decision vector.
inline DenseVector control_output(const ControllerState& s, const MpcProblem& prob) {
    require_dim(s.z.size() == prob.decision_dim(), "control output z");
    return s.z.segment(0, prob.m);
}

/// Euclidean projection onto {z : H z + V x = 0}. The factorization of HHᵀ
/// is state independent and cached per problem by this object.
class EqualityProjector {
public:
    explicit EqualityProjector(const MpcProblem& prob)
        : h_(prob.H), v_(prob.V), factor_(make_factor(prob)) {}

    DenseVector project(const DenseVector& z, const DenseVector& x) const {
        require_dim(z.size() == h_.cols(), "projection z");
        require_dim(x.size() == v_.cols(), "projection x");
        DenseVector hv = h_ * z;
        hv += v_ * x;
        const DenseVector w = factor_.solve(hv);
        DenseVector correction = h_.transpose_times(w);
        DenseVector out = z;
        out -= correction;
        return out;
    }

private:
    static LuFactorization make_factor(const MpcProblem& prob) {
        try {
            return LuFactorization::compute(prob.HHt);
        } catch (const std::runtime_error&) {
            throw std::runtime_error("projection: H is rank deficient");
        }
    }
    DenseMatrix h_, v_;
    LuFactorization factor_;
};

// Convenience one-shot projection; repeated use should hold an EqualityProjector.
inline DenseVector project_equality(const DenseVector& z, const DenseVector& x,
                                    const MpcProblem& prob) {
    return EqualityProjector(prob).project(z, x);
}

/// Implicit flow extension with lookahead parameter γ (quadratic cost, affine
/// inequalities). The defining relations
///
///   ż + βHᵀλ̇ = −2Fz − Gᵀμ − Hᵀλ
///   −γHż + (1+αβ)λ̇ = Hz + Vx − αλ
///
/// are solved exactly with one linear solve of ((1+αβ)I + γβHHᵀ)λ̇ = r₂ + γHr₁,
/// then μ̇ = [g(z+γż)]⁺_μ. Note the primal equation carries no K factor, so its
/// equilibria coincide with the explicit flow's only when K = 1.
inline FlowDerivative gamma_flow_rhs(const ControllerState& s, const DenseVector& x,
                                     const MpcProblem& prob, const FlowParams& p) {
    detail::check_flow_inputs(s, x, prob);
    const double denom = 1.0 + p.alpha * p.beta;
    if (!(denom > 0.0)) throw std::invalid_argument("gamma flow: 1 + alpha*beta must be positive");

    DenseVector r1 = detail::primal_descent(prob, s.z, s.mu, s.lambda, 1.0);
    const DenseVector h = equality_residual(prob, s.z, x);
    DenseVector r2(h.size());
    for (std::size_t i = 0; i < h.size(); ++i) r2[i] = h[i] - p.alpha * s.lambda[i];

    const std::size_t neq = prob.equality_dim();
    DenseMatrix system = prob.HHt;
    system *= p.gamma * p.beta;
    for (std::size_t i = 0; i < neq; ++i) system(i, i) += denom;

    DenseVector rhs = r2;
    if (p.gamma != 0.0) {
        DenseVector hr1 = prob.H * r1;
        for (std::size_t i = 0; i < neq; ++i) rhs[i] += p.gamma * hr1[i];
    }

    FlowDerivative d;
    try {
        d.lambda_dot = LuFactorization::compute(system).solve(rhs);
    } catch (const std::runtime_error&) {
        throw std::runtime_error("gamma flow: implicit system is singular");
    }

    DenseVector correction = prob.H.transpose_times(d.lambda_dot);
    d.z_dot = std::move(r1);
    for (std::size_t i = 0; i < d.z_dot.size(); ++i) d.z_dot[i] -= p.beta * correction[i];

    if (prob.inequality_dim() > 0) {
        DenseVector z_ahead(s.z.size());
        for (std::size_t i = 0; i < s.z.size(); ++i) z_ahead[i] = s.z[i] + p.gamma * d.z_dot[i];
        d.mu_dot = pos_projection(prob.inequality_values(z_ahead), s.mu);
    } else {
        d.mu_dot = DenseVector(0);
    }
    if (!d.z_dot.all_finite() || !d.lambda_dot.all_finite() || !d.mu_dot.all_finite())
        throw std::runtime_error("gamma flow: non-finite derivative evaluation");
    return d;
}

struct KktResiduals {
    double stationarity = 0.0;     // ‖∇f + ∇g μ + Hᵀλ‖∞
    double primal_equality = 0.0;  // ‖Hz + Vx‖∞
    double primal_inequality = 0.0;
    double dual = 0.0;             // ‖min(μ,0)‖∞
    double complementarity = 0.0;  // ‖μ ∘ g(z)‖∞

    double max_norm() const {
        return std::max({stationarity, primal_equality, primal_inequality, dual, complementarity});
    }
};

inline KktResiduals residual_kkt(const DenseVector& z, const DenseVector& mu,
                                 const DenseVector& lambda, const DenseVector& x,
                                 const MpcProblem& prob) {
    KktResiduals r;
    DenseVector stat = prob.cost_gradient(z);
    if (prob.inequality_dim() > 0) stat += prob.G.transpose_times(mu);
    stat += prob.H.transpose_times(lambda);
    r.stationarity = stat.inf_norm();
    r.primal_equality = equality_residual(prob, z, x).inf_norm();
    if (prob.inequality_dim() > 0) {
        const DenseVector g = prob.inequality_values(z);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.primal_inequality = std::max(r.primal_inequality, std::max(g[i], 0.0));
            r.dual = std::max(r.dual, std::max(-mu[i], 0.0));
            r.complementarity = std::max(r.complementarity, std::abs(mu[i] * g[i]));
        }
    }
    return r;
}

struct FlowEquilibriumResiduals {
    double stationarity = 0.0;     // ‖∇f + ∇g μ + K Hᵀλ‖∞
    double primal_inequality = 0.0;
    double dual = 0.0;
    double complementarity = 0.0;
    double damped_equality = 0.0;  // ‖Hz + Vx − αλ‖∞

    double max_norm() const {
        return std::max({stationarity, primal_inequality, dual, complementarity, damped_equality});
    }
};

// Residuals of the flow's own equilibrium relations: the damped equality
// Hz + Vx = αλ replaces the true KKT equality constraint.
inline FlowEquilibriumResiduals residual_flow_equilibrium(const ControllerState& s,
                                                          const DenseVector& x,
                                                          const MpcProblem& prob,
                                                          const FlowParams& p) {
    FlowEquilibriumResiduals r;
    DenseVector stat = prob.cost_gradient(s.z);
    if (prob.inequality_dim() > 0) stat += prob.G.transpose_times(s.mu);
    DenseVector hl = prob.H.transpose_times(s.lambda);
    const double k = p.gain_k();
    for (std::size_t i = 0; i < stat.size(); ++i) stat[i] += k * hl[i];
    r.stationarity = stat.inf_norm();

    if (prob.inequality_dim() > 0) {
        const DenseVector g = prob.inequality_values(s.z);
        for (std::size_t i = 0; i < g.size(); ++i) {
            r.primal_inequality = std::max(r.primal_inequality, std::max(g[i], 0.0));
            r.dual = std::max(r.dual, std::max(-s.mu[i], 0.0));
            r.complementarity = std::max(r.complementarity, std::abs(s.mu[i] * g[i]));
        }
    }

    DenseVector damped = equality_residual(prob, s.z, x);
    for (std::size_t i = 0; i < damped.size(); ++i) damped[i] -= p.alpha * s.lambda[i];
    r.damped_equality = damped.inf_norm();
    return r;
}

struct FrozenFlowResult {
    ControllerState state;
    std::size_t steps = 0;
    double derivative_inf_norm = 0.0;
    FlowEquilibriumResiduals residuals;
    bool converged = false;
};

// Integrate the flow with the plant state held fixed until the derivative
// norm (and optionally the equilibrium residuals) drop below tolerance.
inline FrozenFlowResult integrate_flow_frozen_x(const MpcProblem& prob, const FlowParams& p,
                                                const DenseVector& x, double h,
                                                std::size_t max_steps, double derivative_tol,
                                                double residual_tol = 0.0) {
    ControllerState s = ControllerState::zero(prob);
    const std::size_t nz = prob.decision_dim();
    const std::size_t nq = prob.inequality_dim();
    const std::size_t nl = prob.equality_dim();

    DenseVector y(nz + nq + nl);
    auto unpack = [&](const DenseVector& v) {
        ControllerState st;
        st.z = v.segment(0, nz);
        st.mu = v.segment(nz, nq);
        for (std::size_t i = 0; i < nq; ++i) st.mu[i] = std::max(0.0, st.mu[i]);
        st.lambda = v.segment(nz + nq, nl);
        return st;
    };
    auto rhs = [&](double, const DenseVector& v) {
        const FlowDerivative d = flow_rhs(unpack(v), x, prob, p);
        DenseVector out(v.size());
        out.set_segment(0, d.z_dot);
        out.set_segment(nz, d.mu_dot);
        out.set_segment(nz + nq, d.lambda_dot);
        return out;
    };

    FrozenFlowResult result;
    const std::size_t check_every = 200;
    for (std::size_t k = 0; k < max_steps; ++k) {
        if (k % check_every == 0) {
            s = unpack(y);
            const FlowDerivative d = flow_rhs(s, x, prob, p);
            const double dn = std::max({d.z_dot.inf_norm(), d.mu_dot.inf_norm(),
                                        d.lambda_dot.inf_norm()});
            result.derivative_inf_norm = dn;
            if (dn <= derivative_tol) {
                result.residuals = residual_flow_equilibrium(s, x, prob, p);
                if (residual_tol <= 0.0 ||
                    std::max(result.residuals.stationarity, result.residuals.damped_equality) <=
                        residual_tol) {
                    result.state = s;
                    result.steps = k;
                    result.converged = true;
                    return result;
                }
            }
        }
        y = rk4_step(rhs, static_cast<double>(k) * h, y, h);
        for (std::size_t i = 0; i < nq; ++i) y[nz + i] = std::max(0.0, y[nz + i]);
    }
    result.state = unpack(y);
    result.steps = max_steps;
    result.residuals = residual_flow_equilibrium(result.state, x, prob, p);
    return result;
}

}  // namespace impc
