#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "impc/baseline.hpp"
#include "impc/certify.hpp"
#include "impc/dense.hpp"
#include "impc/flow.hpp"
#include "impc/integrate.hpp"
#include "impc/plant.hpp"
#include "impc/problem.hpp"

namespace impc {

enum class ControllerKind { impc, impc_projected, impc_gamma, baseline_mpc };

inline std::string controller_name(ControllerKind k) {
    switch (k) {
        case ControllerKind::impc: return "impc";
        case ControllerKind::impc_projected: return "impc_projected";
        case ControllerKind::impc_gamma: return "impc_gamma";
        case ControllerKind::baseline_mpc: return "mpc";
    }
    return "unknown";
}

struct SimConfig {
    double total_time = 5.0;
    double step = 1e-3;
    ControllerKind controller = ControllerKind::impc;
    DenseVector x0;            // original coordinates; empty means zeros
    ControllerState init;      // empty vectors mean zeros
    double sample_period = 0;  // baseline hold period; 0 means the problem's Δt
    std::size_t log_stride = 10;
    std::optional<CertificateInputs> certificate;
    double divergence_cutoff = 1e6;

    void validate() const {
        if (!(total_time > 0.0)) throw std::invalid_argument("sim: horizon must be positive");
        if (!(step > 0.0)) throw std::invalid_argument("sim: step must be positive");
        if (log_stride < 1) throw std::invalid_argument("sim: log stride must be at least 1");
    }
};

/// Time-indexed record of a closed-loop run. Trajectories are logged in
/// original coordinates. The proof-mode supply series back the dissipation
/// monitors regardless of the certificate's reporting mode.
struct SimLog {
    std::vector<double> t;
    std::vector<DenseVector> x, u;
    std::vector<double> norm_z, norm_mu, norm_lambda;
    std::vector<StorageReport> storage;
    std::vector<double> w_flow_proof, q_bound_proof;
    std::vector<DenseVector> xi, eta, error_signal;  // ξ = KHᵀλ′, η = ∇g μ, e = −ξ−η
    std::vector<double> eq_feasibility;
    std::vector<double> latency;  // seconds per control decision (sampled)
    bool diverged = false;
    bool has_certificate = false;  // storage/supply series were evaluated against one

    std::size_t rows() const { return t.size(); }
};

struct TrackingMetrics {
    double ise = 0.0;
    double final_error = 0.0;
    double settling_time = 0.0;
};

// ISE by trapezoid rule, relative final error, and the first time after
// which the relative error stays below 2%.
inline TrackingMetrics tracking_metrics(const SimLog& log, const DenseVector& r) {
    if (log.rows() == 0) throw std::invalid_argument("metrics: empty log");
    const double r_norm = r.two_norm();
    const double scale = r_norm > 0.0 ? r_norm : 1.0;

    TrackingMetrics m;
    std::vector<double> err(log.rows());
    for (std::size_t k = 0; k < log.rows(); ++k) {
        DenseVector d = log.x[k];
        d -= r;
        err[k] = d.two_norm();
    }
    for (std::size_t k = 0; k + 1 < log.rows(); ++k)
        m.ise += 0.5 * (err[k] * err[k] + err[k + 1] * err[k + 1]) * (log.t[k + 1] - log.t[k]);
    m.final_error = err.back() / scale;

    std::size_t last_bad = log.rows();  // sentinel: none
    for (std::size_t k = log.rows(); k-- > 0;)
        if (err[k] / scale > 0.02) {
            last_bad = k;
            break;
        }
    if (last_bad == log.rows())
        m.settling_time = 0.0;
    else if (last_bad + 1 < log.rows())
        m.settling_time = log.t[last_bad + 1];
    else
        m.settling_time = std::numeric_limits<double>::infinity();
    return m;
}

namespace detail {

inline DenseVector resolve_x0(const SimConfig& config, std::size_t n) {
    if (config.x0.size() == 0) return DenseVector(n);
    require_dim(config.x0.size() == n, "sim initial state");
    return config.x0;
}

inline ControllerState resolve_init(const SimConfig& config, const MpcProblem& prob) {
    ControllerState s = ControllerState::zero(prob);
    if (config.init.z.size() > 0) {
        require_dim(config.init.z.size() == s.z.size(), "sim initial z");
        s.z = config.init.z;
    }
    if (config.init.mu.size() > 0) {
        require_dim(config.init.mu.size() == s.mu.size(), "sim initial mu");
        s.mu = config.init.mu;
    }
    if (config.init.lambda.size() > 0) {
        require_dim(config.init.lambda.size() == s.lambda.size(), "sim initial lambda");
        s.lambda = config.init.lambda;
    }
    return s;
}

inline CertificateInputs proof_mode_copy(const CertificateInputs& in) {
    CertificateInputs c = in;
    c.mode = CoefficientMode::proof;
    return c;
}

}  // namespace detail

/// Closed-loop run of the flow controller: the plant state (in shifted
/// coordinates) and the controller state form one coupled ODE integrated by
/// RK4, so the interconnection signals u = Ez and x are consistent at every
/// stage. μ is clamped nonnegative after each step and before every stage
/// evaluation. Divergence past the cutoff ends the run gracefully with the
/// log truncated and flagged.
inline SimLog simulate_impc(const LinearPlant& plant, const MpcProblem& prob,
                            const FlowParams& params, const TrackingShift& shift,
                            const SimConfig& config) {
    config.validate();
    if (config.controller == ControllerKind::baseline_mpc)
        throw std::invalid_argument("simulate_impc: controller kind is baseline_mpc");
    const std::size_t n = prob.n;
    const std::size_t nz = prob.decision_dim();
    const std::size_t nq = prob.inequality_dim();
    const std::size_t nl = prob.equality_dim();
    const bool use_gamma = config.controller == ControllerKind::impc_gamma;
    const bool use_projection = config.controller == ControllerKind::impc_projected;

    std::optional<EqualityProjector> projector;
    if (use_projection) projector.emplace(prob);

    std::optional<CertificateInputs> cert = config.certificate;
    std::optional<CertificateInputs> cert_proof;
    if (cert) cert_proof = detail::proof_mode_copy(*cert);

    DenseVector x_tilde = detail::resolve_x0(config, n);
    x_tilde -= shift.r;
    ControllerState cs = detail::resolve_init(config, prob);

    DenseVector y(n + nz + nq + nl);
    y.set_segment(0, x_tilde);
    y.set_segment(n, cs.z);
    y.set_segment(n + nz, cs.mu);
    y.set_segment(n + nz + nq, cs.lambda);

    auto unpack = [&](const DenseVector& v, DenseVector& xt, ControllerState& s) {
        xt = v.segment(0, n);
        s.z = v.segment(n, nz);
        s.mu = v.segment(n + nz, nq);
        for (std::size_t i = 0; i < nq; ++i) s.mu[i] = std::max(0.0, s.mu[i]);
        s.lambda = v.segment(n + nz + nq, nl);
    };
    auto applied_input = [&](const ControllerState& s, const DenseVector& xt) {
        if (use_projection) {
            ControllerState proj = s;
            proj.z = projector->project(s.z, xt);
            return control_output(proj, prob);
        }
        return control_output(s, prob);
    };
    DenseVector xt_work(n);
    ControllerState cs_work = ControllerState::zero(prob);
    auto rhs = [&](double, const DenseVector& v) {
        unpack(v, xt_work, cs_work);
        const DenseVector u = applied_input(cs_work, xt_work);
        const DenseVector x_dot = plant.derivative(xt_work, u);
        const FlowDerivative d = use_gamma ? gamma_flow_rhs(cs_work, xt_work, prob, params)
                                           : flow_rhs(cs_work, xt_work, prob, params);
        DenseVector out(v.size());
        out.set_segment(0, x_dot);
        out.set_segment(n, d.z_dot);
        out.set_segment(n + nz, d.mu_dot);
        out.set_segment(n + nz + nq, d.lambda_dot);
        return out;
    };

    SimLog log;
    log.has_certificate = cert.has_value();
    const std::size_t steps = static_cast<std::size_t>(std::llround(config.total_time / config.step));
    if (steps < 1) throw std::invalid_argument("sim: horizon shorter than one step");
    double last_latency = 0.0;

    auto log_row = [&](std::size_t k) {
        unpack(y, x_tilde, cs);
        log.t.push_back(static_cast<double>(k) * config.step);
        DenseVector x_orig = x_tilde;
        x_orig += shift.r;
        log.x.push_back(x_orig);
        DenseVector z_for_feas = cs.z;
        if (use_projection) z_for_feas = projector->project(cs.z, x_tilde);
        DenseVector u_orig = use_projection ? z_for_feas.segment(0, prob.m)
                                            : control_output(cs, prob);
        u_orig += shift.u_r;
        log.u.push_back(u_orig);
        log.norm_z.push_back(cs.z.two_norm());
        log.norm_mu.push_back(cs.mu.two_norm());
        log.norm_lambda.push_back(cs.lambda.two_norm());
        log.eq_feasibility.push_back(equality_residual(prob, z_for_feas, x_tilde).inf_norm());
        log.latency.push_back(last_latency);

        const FlowDerivative d = use_gamma ? gamma_flow_rhs(cs, x_tilde, prob, params)
                                           : flow_rhs(cs, x_tilde, prob, params);
        DenseVector lambda_prime = cs.lambda;
        for (std::size_t i = 0; i < nl; ++i) lambda_prime[i] += params.beta * d.lambda_dot[i];
        DenseVector xi = prob.H.transpose_times(lambda_prime);
        xi *= params.gain_k();
        DenseVector eta = nq > 0 ? prob.G.transpose_times(cs.mu) : DenseVector(nz);
        DenseVector e(nz);
        for (std::size_t i = 0; i < nz; ++i) e[i] = -xi[i] - eta[i];
        log.xi.push_back(std::move(xi));
        log.eta.push_back(std::move(eta));
        log.error_signal.push_back(std::move(e));

        if (cert) {
            log.storage.push_back(storage_report(cs, x_tilde, *cert));
            const StorageReport proof = storage_report(cs, x_tilde, *cert_proof);
            log.w_flow_proof.push_back(proof.w_flow);
            log.q_bound_proof.push_back(proof.q_bound);
        } else {
            StorageReport r;
            r.s_flow = 0.5 * (cs.z.dot(cs.z) + cs.mu.dot(cs.mu) + cs.lambda.dot(cs.lambda));
            r.s_plant = 0.5 * x_tilde.dot(x_tilde);
            r.v_lyap = r.s_flow + r.s_plant;
            log.storage.push_back(r);
            log.w_flow_proof.push_back(0.0);
            log.q_bound_proof.push_back(0.0);
        }
    };

    log_row(0);
    for (std::size_t k = 0; k < steps; ++k) {
        const auto t0 = std::chrono::steady_clock::now();
        y = rk4_step(rhs, static_cast<double>(k) * config.step, y, config.step);
        const auto t1 = std::chrono::steady_clock::now();
        last_latency = std::chrono::duration<double>(t1 - t0).count();
        for (std::size_t i = 0; i < nq; ++i) y[n + nz + i] = std::max(0.0, y[n + nz + i]);

        double xnorm2 = 0.0;
        for (std::size_t i = 0; i < n; ++i) xnorm2 += y[i] * y[i];
        if (!std::isfinite(xnorm2) || xnorm2 > config.divergence_cutoff * config.divergence_cutoff) {
            log.diverged = true;
            log_row(k + 1);
            return log;
        }
        if ((k + 1) % config.log_stride == 0) log_row(k + 1);
    }
    return log;
}

/// Conventional sampled MPC: solve the QP at each sample instant, hold the
/// first input (zero-order hold), integrate the plant with RK4 in between.
inline SimLog simulate_mpc(const LinearPlant& plant, const MpcProblem& prob,
                           const TrackingShift& shift, const SimConfig& config) {
    config.validate();
    const double period = config.sample_period > 0.0 ? config.sample_period : prob.sample_period;
    if (!(config.step <= period))
        throw std::invalid_argument("sim: integrator step must not exceed the sample period");
    const double ratio = period / config.step;
    const std::size_t steps_per_sample = static_cast<std::size_t>(std::llround(ratio));
    if (std::abs(ratio - static_cast<double>(steps_per_sample)) > 1e-9)
        throw std::invalid_argument("sim: sample period must be an integer multiple of the step");

    const std::size_t n = prob.n;
    DenseVector x_tilde = detail::resolve_x0(config, n);
    x_tilde -= shift.r;

    QpSolution sol{DenseVector(prob.decision_dim()), DenseVector(prob.equality_dim())};
    DenseVector u_tilde(prob.m);
    double last_latency = 0.0;

    SimLog log;
    log.has_certificate = config.certificate.has_value();
    auto log_row = [&](std::size_t k) {
        log.t.push_back(static_cast<double>(k) * config.step);
        DenseVector x_orig = x_tilde;
        x_orig += shift.r;
        log.x.push_back(x_orig);
        DenseVector u_orig = u_tilde;
        u_orig += shift.u_r;
        log.u.push_back(u_orig);
        log.norm_z.push_back(sol.z.two_norm());
        log.norm_mu.push_back(0.0);
        log.norm_lambda.push_back(sol.lambda.two_norm());
        log.eq_feasibility.push_back(equality_residual(prob, sol.z, x_tilde).inf_norm());
        log.latency.push_back(last_latency);

        StorageReport r;
        r.s_flow = 0.5 * (sol.z.dot(sol.z) + sol.lambda.dot(sol.lambda));
        r.s_plant = 0.5 * x_tilde.dot(x_tilde);
        if (config.certificate) {
            r.v_lyap = r.s_flow + config.certificate->delta * r.s_plant;
            r.w_plant = supply_rate_plant(x_tilde, sol.z, *config.certificate);
        } else {
            r.v_lyap = r.s_flow + r.s_plant;
        }
        log.storage.push_back(r);
        log.w_flow_proof.push_back(0.0);
        log.q_bound_proof.push_back(0.0);
    };

    auto plant_rhs = [&](double, const DenseVector& xs) { return plant.derivative(xs, u_tilde); };

    const std::size_t steps = static_cast<std::size_t>(std::llround(config.total_time / config.step));
    if (steps < 1) throw std::invalid_argument("sim: horizon shorter than one step");
    for (std::size_t k = 0; k < steps; ++k) {
        if (k % steps_per_sample == 0) {
            const auto t0 = std::chrono::steady_clock::now();
            sol = solve_equality_qp(prob, x_tilde);
            const auto t1 = std::chrono::steady_clock::now();
            last_latency = std::chrono::duration<double>(t1 - t0).count();
            u_tilde = sol.z.segment(0, prob.m);
        }
        if (k == 0) log_row(0);
        x_tilde = rk4_step(plant_rhs, static_cast<double>(k) * config.step, x_tilde, config.step);
        if (x_tilde.two_norm() > config.divergence_cutoff) {
            log.diverged = true;
            log_row(k + 1);
            return log;
        }
        if ((k + 1) % config.log_stride == 0) log_row(k + 1);
    }
    return log;
}

struct LatencyStats {
    double mean = 0.0;
    double median = 0.0;
    double p95 = 0.0;
    std::size_t count = 0;
};

inline LatencyStats summarize_latency(std::vector<double> samples) {
    LatencyStats s;
    s.count = samples.size();
    if (samples.empty()) return s;
    double sum = 0.0;
    for (double v : samples) sum += v;
    s.mean = sum / static_cast<double>(samples.size());
    std::sort(samples.begin(), samples.end());
    s.median = samples[samples.size() / 2];
    s.p95 = samples[std::min(samples.size() - 1,
                             static_cast<std::size_t>(0.95 * static_cast<double>(samples.size())))];
    return s;
}

struct BenchmarkReport {
    LatencyStats baseline;
    LatencyStats flow;
    double ratio_mean = 0.0;  // mean(baseline) / mean(flow)
};

/// Wall-clock time per control decision: a full cold KKT solve for the
/// baseline, one flow evaluation plus one RK4 controller substep for the
/// flow controller. Sub-microsecond decisions are timed in batches.
/// Absolute values are hardware dependent and reported, not asserted.
inline BenchmarkReport benchmark_latency(const LinearPlant& plant, const MpcProblem& prob,
                                         const FlowParams& params, const SimConfig& config,
                                         std::size_t repetitions) {
    if (repetitions < 100)
        throw std::invalid_argument("benchmark: at least 100 repetitions required");
    const double substep = config.step;
    const std::size_t n = prob.n;

    // deterministic pool of representative states
    const std::size_t pool = 16;
    std::vector<DenseVector> xs(pool, DenseVector(n));
    std::vector<ControllerState> states(pool, ControllerState::zero(prob));
    for (std::size_t i = 0; i < pool; ++i) {
        for (std::size_t j = 0; j < n; ++j)
            xs[i][j] = 10.0 * std::cos(0.7 * static_cast<double>(i + j + 1));
        for (std::size_t j = 0; j < prob.decision_dim(); ++j)
            states[i].z[j] = std::sin(0.3 * static_cast<double>(i + j + 1));
        for (std::size_t j = 0; j < prob.equality_dim(); ++j)
            states[i].lambda[j] = 0.1 * std::cos(0.2 * static_cast<double>(i + j + 1));
    }

    volatile double sink = 0.0;
    auto baseline_once = [&](std::size_t i) {
        const QpSolution sol = solve_equality_qp(prob, xs[i % pool]);
        sink = sink + sol.z[0];
    };
    const std::size_t nz = prob.decision_dim();
    const std::size_t nq = prob.inequality_dim();
    auto flow_once = [&](std::size_t i) {
        const ControllerState& s = states[i % pool];
        const DenseVector& x = xs[i % pool];
        const FlowDerivative d = flow_rhs(s, x, prob, params);
        DenseVector y(nz + nq + prob.equality_dim());
        y.set_segment(0, s.z);
        y.set_segment(nz, s.mu);
        y.set_segment(nz + nq, s.lambda);
        auto rhs = [&](double, const DenseVector& v) {
            ControllerState st;
            st.z = v.segment(0, nz);
            st.mu = v.segment(nz, nq);
            for (std::size_t q = 0; q < nq; ++q) st.mu[q] = std::max(0.0, st.mu[q]);
            st.lambda = v.segment(nz + nq, prob.equality_dim());
            const FlowDerivative fd = flow_rhs(st, x, prob, params);
            DenseVector out(v.size());
            out.set_segment(0, fd.z_dot);
            out.set_segment(nz, fd.mu_dot);
            out.set_segment(nz + nq, fd.lambda_dot);
            return out;
        };
        const DenseVector y_next = rk4_step(rhs, 0.0, y, substep);
        sink = sink + d.z_dot[0] + y_next[0];
    };

    auto measure = [&](auto&& decision) {
        // calibrate a batch size so one timed batch spans at least ~5 µs
        for (std::size_t i = 0; i < 10; ++i) decision(i);
        std::size_t batch = 1;
        for (;;) {
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t i = 0; i < batch; ++i) decision(i);
            const double span = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - t0).count();
            if (span >= 5e-6 || batch >= 4096) break;
            batch *= 2;
        }
        std::vector<double> samples(repetitions);
        for (std::size_t r = 0; r < repetitions; ++r) {
            const auto t0 = std::chrono::steady_clock::now();
            for (std::size_t i = 0; i < batch; ++i) decision(r * batch + i);
            const double span = std::chrono::duration<double>(
                                    std::chrono::steady_clock::now() - t0).count();
            samples[r] = span / static_cast<double>(batch);
        }
        return samples;
    };

    BenchmarkReport report;
    report.baseline = summarize_latency(measure(baseline_once));
    report.flow = summarize_latency(measure(flow_once));
    report.ratio_mean = report.flow.mean > 0.0 ? report.baseline.mean / report.flow.mean : 0.0;
    return report;
}

}  // namespace impc
