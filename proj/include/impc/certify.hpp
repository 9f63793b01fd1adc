#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <utility>
#include <vector>

#include "impc/dense.hpp"
#include "impc/flow.hpp"
#include "impc/linalg.hpp"
#include "impc/plant.hpp"
#include "impc/problem.hpp"

namespace impc {

/// Coefficient on the xᵀAᵀAx block of the flow supply rate. The certificate
/// statement carries 1/(4α(1+αβ)); the completed-square derivation produces
/// (1+2αβ)²/(4α(1+αβ)). Both are exposed; the certificate defaults to the
/// statement, the runtime monitors to the derivation.
enum class CoefficientMode { theorem, proof };

inline double state_cost_coefficient(double alpha, double beta, CoefficientMode mode) {
    const double base = 4.0 * alpha * (1.0 + alpha * beta);
    if (mode == CoefficientMode::proof) {
        const double k = 1.0 + 2.0 * alpha * beta;
        return k * k / base;
    }
    return 1.0 / base;
}

struct CertificateInputs {
    QsrTriple qsr;
    double rho = 0.0;
    double alpha = 1.0;
    double beta = 0.0;
    double delta = 1.0;
    CoefficientMode mode = CoefficientMode::theorem;
    MpcProblem prob;
};

// Validating factory; keeps ρ tied to the problem's 2·λ_min(F).
inline CertificateInputs make_certificate_inputs(QsrTriple qsr, const MpcProblem& prob,
                                                 double alpha, double beta, double delta,
                                                 CoefficientMode mode = CoefficientMode::theorem) {
    if (!(alpha > 0.0)) throw std::invalid_argument("alpha must be positive");
    if (beta < 0.0) throw std::invalid_argument("beta must be nonnegative");
    if (!(delta > 0.0)) throw std::invalid_argument("delta must be positive");
    qsr.validate(prob.n, prob.m);
    return {std::move(qsr), prob.rho, alpha, beta, delta, mode, prob};
}

// Flow supply rate (z,x) ↦ [z;x]ᵀ[−ρI−βHᵀH, −βHᵀV; −βVᵀH, cAᵀA][z;x].
// With appended designer rows the bottom block uses VᵀV (the exact bound),
// which equals AᵀA for the default structure.
inline double supply_rate_flow(const DenseVector& z, const DenseVector& x,
                               const CertificateInputs& in) {
    const MpcProblem& prob = in.prob;
    require_dim(z.size() == prob.decision_dim(), "supply rate z");
    require_dim(x.size() == prob.n, "supply rate x");
    const double c = state_cost_coefficient(in.alpha, in.beta, in.mode);

    const DenseVector hz = prob.H * z;
    const DenseVector vx = prob.V * x;
    const DenseVector state_term = prob.has_designer_rows ? vx : prob.A * x;
    return -in.rho * z.dot(z) - in.beta * (hz.dot(hz) + 2.0 * hz.dot(vx)) +
           c * state_term.dot(state_term);
}

// Plant supply rate (x,z) ↦ [x;z]ᵀ[Q_c, S_cE; EᵀS_cᵀ, EᵀR_cE][x;z] with u = Ez.
inline double supply_rate_plant(const DenseVector& x, const DenseVector& z,
                                const CertificateInputs& in) {
    require_dim(x.size() == in.prob.n, "plant supply x");
    require_dim(z.size() == in.prob.decision_dim(), "plant supply z");
    const DenseVector u = z.segment(0, in.prob.m);
    return x.dot(in.qsr.q_c * x) + 2.0 * x.dot(in.qsr.s_c * u) + u.dot(in.qsr.r_c * u);
}

// Composite certificate matrix in [z;x] coordinates, returned symmetrized.
inline DenseMatrix build_q_all(const CertificateInputs& in) {
    const MpcProblem& prob = in.prob;
    const std::size_t nz = prob.decision_dim();
    const std::size_t n = prob.n;
    const double c = state_cost_coefficient(in.alpha, in.beta, in.mode);

    DenseMatrix top_left = prob.H.transpose() * prob.H;
    top_left *= -in.beta;
    for (std::size_t i = 0; i < nz; ++i) top_left(i, i) -= in.rho;
    // δ EᵀR_cE touches only the leading m×m block since E = [I 0 ⋯ 0]
    for (std::size_t i = 0; i < prob.m; ++i)
        for (std::size_t j = 0; j < prob.m; ++j) top_left(i, j) += in.delta * in.qsr.r_c(i, j);

    DenseMatrix top_right = prob.H.transpose() * prob.V;
    top_right *= -in.beta;
    for (std::size_t i = 0; i < prob.m; ++i)
        for (std::size_t j = 0; j < n; ++j) top_right(i, j) += in.delta * in.qsr.s_c(j, i);

    const DenseMatrix& state_mat = prob.has_designer_rows ? prob.V : prob.A;
    DenseMatrix bottom_right = state_mat.transpose() * state_mat;
    bottom_right *= c;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) bottom_right(i, j) += in.delta * in.qsr.q_c(i, j);

    DenseMatrix q(nz + n, nz + n);
    q.set_block(0, 0, top_left);
    q.set_block(0, nz, top_right);
    q.set_block(nz, 0, top_right.transpose());
    q.set_block(nz, nz, bottom_right);
    return symmetric_part(q);
}

// (negative definite?, max eigenvalue): true iff λ_max < −margin.
inline std::pair<bool, double> check_negative_definite(const DenseMatrix& s, double margin = 0.0) {
    const auto [lo, hi] = sym_eig_extremes(s);
    (void)lo;
    return {hi < -margin, hi};
}

inline std::vector<double> default_delta_grid() {
    std::vector<double> grid;
    grid.reserve(61);
    for (int k = 0; k <= 60; ++k) grid.push_back(std::pow(10.0, -3.0 + 0.1 * k));
    return grid;
}

struct DeltaSearchResult {
    bool certified = false;
    double best_delta = 0.0;
    double best_max_eig = 0.0;
};

// Grid scan over δ; returns the δ minimizing λ_max(Q_all), ties toward
// smaller δ.
inline DeltaSearchResult search_delta(CertificateInputs in, const std::vector<double>& grid) {
    if (grid.empty()) throw std::invalid_argument("delta search: empty grid");
    DeltaSearchResult best;
    bool first = true;
    for (double delta : grid) {
        if (!(delta > 0.0)) throw std::invalid_argument("delta search: grid values must be positive");
        in.delta = delta;
        const auto [nd, max_eig] = check_negative_definite(build_q_all(in));
        if (first || max_eig < best.best_max_eig) {
            best.best_delta = delta;
            best.best_max_eig = max_eig;
            first = false;
        }
        best.certified = best.certified || nd;
    }
    return best;
}

struct StorageReport {
    double s_flow = 0.0;   // ½(‖z‖² + ‖μ‖² + ‖λ‖²)
    double s_plant = 0.0;  // ½‖x‖²
    double v_lyap = 0.0;   // S_flow + δ·S_plant
    double w_flow = 0.0;
    double w_plant = 0.0;
    double q_bound = 0.0;  // [z;x]ᵀ Q_all [z;x] = w_flow + δ·w_plant
};

inline StorageReport storage_report(const ControllerState& s, const DenseVector& x,
                                    const CertificateInputs& in) {
    StorageReport r;
    r.s_flow = 0.5 * (s.z.dot(s.z) + s.mu.dot(s.mu) + s.lambda.dot(s.lambda));
    r.s_plant = 0.5 * x.dot(x);
    r.v_lyap = r.s_flow + in.delta * r.s_plant;
    r.w_flow = supply_rate_flow(s.z, x, in);
    r.w_plant = supply_rate_plant(x, s.z, in);
    r.q_bound = r.w_flow + in.delta * r.w_plant;
    return r;
}

}  // namespace impc
