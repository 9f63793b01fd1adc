// Acceptance suite: one pass/fail line per criterion, exit code equals the
// number of failed criteria. Criteria run exactly as stated (tolerances and
// fixed parameters included); measured values are printed alongside each
// verdict, and known-infeasible legs carry an explanatory note with the
// measured evidence.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "impc/baseline.hpp"
#include "impc/certify.hpp"
#include "impc/flow.hpp"
#include "impc/linalg.hpp"
#include "impc/monitor.hpp"
#include "impc/presets.hpp"
#include "impc/sim.hpp"
#include "oracles.hpp"

using namespace impc;

namespace {

int failures = 0;

void report(int criterion, const std::string& name, bool pass, const std::string& detail) {
    std::printf("[%s] criterion %d: %s — %s\n", pass ? "PASS" : "FAIL", criterion, name.c_str(),
                detail.c_str());
    if (!pass) ++failures;
}

void note(const std::string& text) { std::printf("       note: %s\n", text.c_str()); }

struct Timer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

std::string fmt(const char* format, ...) {
    char buf[512];
    va_list args;
    va_start(args, format);
    std::vsnprintf(buf, sizeof(buf), format, args);
    va_end(args);
    return buf;
}

SimConfig run_config(ControllerKind kind, double T, double h, std::size_t stride) {
    SimConfig cfg;
    cfg.controller = kind;
    cfg.total_time = T;
    cfg.step = h;
    cfg.log_stride = stride;
    cfg.x0 = DenseVector{0.0, 0.0};
    return cfg;
}

// criteria 1-2: certificate verdicts at delta = 1, theorem coefficient
void criterion_certificates(const Preset& p) {
    {
        Timer timer;
        const auto cert = make_certificate_inputs(p.qsr, p.problem, 10.0, 10.0, 1.0,
                                                  CoefficientMode::theorem);
        const auto [nd, max_eig] = check_negative_definite(build_q_all(cert));
        const double elapsed = timer.seconds();
        report(1, "certificate reproduction, (alpha,beta)=(10,10)", nd && elapsed < 1.0,
               fmt("max eig Q_all = %.6g (< 0 required), %.2fs (< 1s)", max_eig, elapsed));
    }
    {
        Timer timer;
        const auto cert = make_certificate_inputs(p.qsr, p.problem, 10.0, 1000.0, 1.0,
                                                  CoefficientMode::theorem);
        const auto [nd, max_eig] = check_negative_definite(build_q_all(cert));
        const double elapsed = timer.seconds();
        report(2, "certificate negative case, (alpha,beta)=(10,1000)", !nd && max_eig >= 0.0 &&
               elapsed < 1.0,
               fmt("max eig Q_all = %.6g (>= 0 required: NOT CERTIFIED), %.2fs (< 1s)", max_eig,
                   elapsed));
    }
}

// criterion 3: convergence of the three controllers at the stated step
void criterion_convergence(const Preset& p) {
    Timer timer;
    const double tol = 0.02;
    std::string detail;
    bool pass = true;

    const SimLog mpc_log =
        simulate_mpc(p.plant, p.problem, p.shift, run_config(ControllerKind::baseline_mpc, 5.0,
                                                             1e-3, 10));
    const double e1 = tracking_metrics(mpc_log, p.shift.r).final_error;
    pass = pass && !mpc_log.diverged && e1 <= tol;
    detail += fmt("mpc final err %.3g; ", e1);

    const SimLog c2_log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 10.0), p.shift,
                                        run_config(ControllerKind::impc, 5.0, 1e-3, 10));
    const double e2 = tracking_metrics(c2_log, p.shift.r).final_error;
    pass = pass && !c2_log.diverged && e2 <= tol;
    detail += fmt("impc(10,10) final err %.3g; ", e2);

    const SimLog c3_log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 1000.0), p.shift,
                                        run_config(ControllerKind::impc, 5.0, 1e-3, 10));
    if (c3_log.diverged) {
        pass = false;
        detail += fmt("impc(10,1000) DIVERGED at t=%.4gs at the stated h=1e-3", c3_log.t.back());
    } else {
        const double e3 = tracking_metrics(c3_log, p.shift.r).final_error;
        pass = pass && e3 <= tol;
        detail += fmt("impc(10,1000) final err %.3g", e3);
    }
    const double elapsed = timer.seconds();
    pass = pass && elapsed < 30.0;
    detail += fmt("; total %.1fs (< 30s)", elapsed);
    report(3, "convergence of all three controllers at h=1e-3", pass, detail);

    if (c3_log.diverged) {
        note("(10,1000) closed loop has eigenvalues near -7.6e3/s; explicit RK4 needs h < 3.7e-4, "
             "so the stated h=1e-3 cannot integrate this case (see ledger)");
        const SimLog retry = simulate_impc(p.plant, p.problem, FlowParams(10.0, 1000.0), p.shift,
                                           run_config(ControllerKind::impc, 5.0, 2.5e-4, 40));
        note(fmt("informational rerun at h=2.5e-4: final err %.3g (converges; not asserted)",
                 tracking_metrics(retry, p.shift.r).final_error));
    }
}

// criterion 4: emulation ordering and trajectory gap (no step stated; a
// uniform stability-respecting h=2.5e-4 is used for comparability)
void criterion_emulation(const Preset& p) {
    const double h = 2.5e-4;
    const std::size_t stride = 40;  // log every 0.01 s
    const SimLog mpc_log = simulate_mpc(
        p.plant, p.problem, p.shift, run_config(ControllerKind::baseline_mpc, 5.0, h, stride));
    const SimLog c2_log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 10.0), p.shift,
                                        run_config(ControllerKind::impc, 5.0, h, stride));
    const SimLog c3_log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 1000.0), p.shift,
                                        run_config(ControllerKind::impc, 5.0, h, stride));

    const double ise2 = tracking_metrics(c2_log, p.shift.r).ise;
    const double ise3 = tracking_metrics(c3_log, p.shift.r).ise;
    const bool ordering = ise3 < ise2;

    double sup_gap = 0.0, sup_gap_tail = 0.0;
    const std::size_t rows = std::min(mpc_log.rows(), c3_log.rows());
    for (std::size_t k = 0; k < rows; ++k) {
        DenseVector d = c3_log.x[k];
        d -= mpc_log.x[k];
        const double g = d.two_norm();
        sup_gap = std::max(sup_gap, g);
        if (mpc_log.t[k] >= 0.5) sup_gap_tail = std::max(sup_gap_tail, g);
    }
    const double r_norm = p.shift.r.two_norm();
    const bool gap_ok = sup_gap <= 0.05 * r_norm;

    report(4, "emulation ordering and 5% trajectory gap", ordering && gap_ok,
           fmt("ISE(10,1000)=%.4g < ISE(10,10)=%.4g: %s; sup gap = %.4g = %.1f%% of ||r|| "
               "(<= 5%% required)",
               ise3, ise2, ordering ? "yes" : "NO", sup_gap, 100.0 * sup_gap / r_norm));
    if (!gap_ok) {
        note(fmt("gap peaks in t<0.3s (held first input of the sampled baseline vs continuous "
                 "flow ramp-in); for t >= 0.5s the sup gap is %.3g = %.2f%% of ||r|| (see ledger)",
                 sup_gap_tail, 100.0 * sup_gap_tail / r_norm));
    }
}

// criterion 5: per-decision latency ordering
void criterion_latency(const Preset& p) {
    SimConfig cfg;
    const BenchmarkReport rep =
        benchmark_latency(p.plant, p.problem, FlowParams(10.0, 10.0), cfg, 1000);
    report(5, "latency ratio baseline/iMPC >= 10 (1000 repetitions)", rep.ratio_mean >= 10.0,
           fmt("baseline mean %.1f us, flow decision mean %.2f us, ratio %.1f; absolute values "
               "are hardware-dependent (reference values elsewhere: 9.80 ms vs 0.331/0.185 ms; "
               "ordering asserted only)",
               rep.baseline.mean * 1e6, rep.flow.mean * 1e6, rep.ratio_mean));
}

// criterion 6: flow dissipation inequality along the certified trajectory
void criterion_dissipation(const Preset& p) {
    const auto cert =
        make_certificate_inputs(p.qsr, p.problem, 10.0, 10.0, 1.0, CoefficientMode::proof);
    SimConfig cfg = run_config(ControllerKind::impc, 5.0, 1e-3, 1);
    cfg.certificate = cert;
    const SimLog log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 10.0), p.shift, cfg);
    const DissipationReport rep = dissipation_monitor(log, cert);
    double worst = -1e300;
    for (std::size_t i = 0; i < rep.flow_residual.size(); ++i)
        worst = std::max(worst, rep.flow_residual[i]);
    report(6, "proof-mode flow dissipation holds at every logged sample",
           rep.flow_violations.empty(),
           fmt("%zu interior samples, %zu violations, max residual dS/dt - w = %.3g "
               "(tolerance 1e-4*(1+|w|))",
               rep.flow_residual.size(), rep.flow_violations.size(), worst));
}

// criterion 7: Lyapunov monotonicity and partial-state contraction at T=20s
void criterion_lyapunov(const Preset& p) {
    const auto cert =
        make_certificate_inputs(p.qsr, p.problem, 10.0, 10.0, 1.0, CoefficientMode::proof);
    SimConfig cfg = run_config(ControllerKind::impc, 20.0, 1e-3, 10);
    cfg.certificate = cert;
    const SimLog log = simulate_impc(p.plant, p.problem, FlowParams(10.0, 10.0), p.shift, cfg);

    const double v0 = log.storage.front().v_lyap;
    double max_step = -std::numeric_limits<double>::infinity();
    for (std::size_t k = 0; k + 1 < log.rows(); ++k)
        max_step = std::max(max_step, log.storage[k + 1].v_lyap - log.storage[k].v_lyap);
    const bool monotone = max_step <= 1e-6 * v0;

    auto partial_norm = [&](std::size_t k) {
        DenseVector x_tilde = log.x[k];
        x_tilde -= p.shift.r;
        return std::sqrt(x_tilde.dot(x_tilde) + log.norm_z[k] * log.norm_z[k] +
                         log.norm_lambda[k] * log.norm_lambda[k]);
    };
    const double ratio = partial_norm(log.rows() - 1) / partial_norm(0);
    report(7, "Lyapunov monotonicity and 1e-3 contraction at T=20s",
           monotone && ratio <= 1e-3,
           fmt("largest per-step V change %.3g (tol %.3g); ||(x,z,lambda)(20)||/||(0)|| = %.3g "
               "(<= 1e-3 required; mu excluded)",
               max_step, 1e-6 * v0, ratio));
}

// criterion 8: frozen-x stationary point against the damped saddle solve
void criterion_frozen_oracle(const Preset& p) {
    Timer timer;
    const FlowParams params(10.0, 10.0);
    DenseVector x = p.shift.r;
    x *= -1.0;

    const FrozenFlowResult res =
        integrate_flow_frozen_x(p.problem, params, x, 1e-3, 1000000, 1e-8, 1e-9);

    const std::size_t nz = p.problem.decision_dim();
    const std::size_t ne = p.problem.equality_dim();
    DenseMatrix saddle(nz + ne, nz + ne);
    for (std::size_t i = 0; i < nz; ++i)
        for (std::size_t j = 0; j < nz; ++j) saddle(i, j) = 2.0 * p.problem.F(i, j);
    for (std::size_t i = 0; i < ne; ++i)
        for (std::size_t j = 0; j < nz; ++j) {
            saddle(nz + i, j) = p.problem.H(i, j);
            saddle(j, nz + i) = params.gain_k() * p.problem.H(i, j);
        }
    for (std::size_t i = 0; i < ne; ++i) saddle(nz + i, nz + i) = -params.alpha;
    DenseVector rhs(nz + ne);
    const DenseVector vx = p.problem.V * x;
    for (std::size_t i = 0; i < ne; ++i) rhs[nz + i] = -vx[i];
    const DenseVector sol = lu_solve(saddle, rhs);

    double dz = 0.0, dl = 0.0;
    for (std::size_t i = 0; i < nz; ++i) dz = std::max(dz, std::abs(res.state.z[i] - sol[i]));
    for (std::size_t i = 0; i < ne; ++i)
        dl = std::max(dl, std::abs(res.state.lambda[i] - sol[nz + i]));

    const double elapsed = timer.seconds();
    const bool pass = res.converged && dz <= 1e-6 && dl <= 1e-6 &&
                      res.residuals.stationarity <= 1e-8 &&
                      res.residuals.damped_equality <= 1e-8 && elapsed < 60.0;
    report(8, "frozen-x stationary point matches the damped saddle solve", pass,
           fmt("converged=%d in %zu steps; |dz|=%.2g, |dlambda|=%.2g (<= 1e-6); stationarity "
               "%.2g, damped equality %.2g (<= 1e-8); %.1fs (< 60s)",
               res.converged ? 1 : 0, res.steps, dz, dl, res.residuals.stationarity,
               res.residuals.damped_equality, elapsed));
}

// criterion 9: builder and kernel oracles
void criterion_kernel_oracles(const Preset& p) {
    std::mt19937 rng(2024);
    bool pass = true;
    std::string detail;

    {  // discretize vs 30-term Taylor on the augmented matrix
        DenseMatrix aug(3, 3);
        aug.set_block(0, 0, p.plant.a_c);
        aug.set_block(0, 2, p.plant.b_c);
        aug *= 0.1;
        const DenseMatrix oracle = oracles::expm_taylor(aug, 30);
        double err = 0.0;
        for (std::size_t i = 0; i < 2; ++i) {
            for (std::size_t j = 0; j < 2; ++j)
                err = std::max(err, std::abs(p.problem.A(i, j) - oracle(i, j)));
            err = std::max(err, std::abs(p.problem.B(i, 0) - oracle(i, 2)));
        }
        pass = pass && err <= 1e-10;
        detail += fmt("discretize vs Taylor %.2g (<=1e-10); ", err);
    }
    {  // rollout exactness
        double worst = 0.0;
        for (int trial = 0; trial < 20; ++trial) {
            const DenseVector x0 = oracles::random_vector(rng, p.problem.n, 50.0);
            std::vector<DenseVector> inputs;
            for (std::size_t q = 0; q < p.problem.horizon; ++q)
                inputs.push_back(oracles::random_vector(rng, p.problem.m, 5.0));
            const DenseVector z =
                oracles::rollout_decision_vector(p.problem.A, p.problem.B, x0, inputs);
            worst = std::max(worst, equality_residual(p.problem, z, x0).inf_norm());
        }
        pass = pass && worst == 0.0;
        detail += fmt("rollout residual %.2g (= 0); ", worst);
    }
    {  // baseline optimality against feasible perturbations
        const DenseVector x = oracles::random_vector(rng, p.problem.n, 40.0);
        const QpSolution sol = solve_equality_qp(p.problem, x);
        const double f_star = p.problem.cost(sol.z);
        bool beats = true;
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<DenseVector> u_null;
            for (std::size_t q = 0; q < p.problem.horizon; ++q)
                u_null.push_back(oracles::random_vector(rng, p.problem.m, 0.5));
            const DenseVector d = oracles::rollout_decision_vector(
                p.problem.A, p.problem.B, DenseVector(p.problem.n), u_null);
            DenseVector candidate = sol.z;
            candidate += d;
            beats = beats && p.problem.cost(candidate) >= f_star - 1e-9;
        }
        pass = pass && beats;
        detail += fmt("qp beats 100 perturbations: %s; ", beats ? "yes" : "NO");
    }
    {  // projection feasibility and idempotence
        const EqualityProjector projector(p.problem);
        const DenseVector x = oracles::random_vector(rng, p.problem.n, 30.0);
        const DenseVector z = oracles::random_vector(rng, p.problem.decision_dim(), 10.0);
        const DenseVector z1 = projector.project(z, x);
        const double feas = equality_residual(p.problem, z1, x).inf_norm();
        DenseVector drift = projector.project(z1, x);
        drift -= z1;
        const double idem = drift.inf_norm() / (1.0 + z1.inf_norm());
        pass = pass && feas <= 1e-9 && idem <= 1e-12;
        detail += fmt("projection feas %.2g (<=1e-9), idempotence %.2g (<=1e-12); ", feas, idem);
    }
    {  // gamma degeneration on 1000 random points
        const FlowParams params(3.0, 0.0, 0.0);
        double worst = 0.0;
        for (int trial = 0; trial < 1000; ++trial) {
            ControllerState s = ControllerState::zero(p.problem);
            s.z = oracles::random_vector(rng, p.problem.decision_dim(), 5.0);
            s.lambda = oracles::random_vector(rng, p.problem.equality_dim(), 5.0);
            const DenseVector x = oracles::random_vector(rng, p.problem.n, 5.0);
            const FlowDerivative a = flow_rhs(s, x, p.problem, params);
            const FlowDerivative b = gamma_flow_rhs(s, x, p.problem, params);
            DenseVector dz = a.z_dot;
            dz -= b.z_dot;
            DenseVector dl = a.lambda_dot;
            dl -= b.lambda_dot;
            worst = std::max(worst, std::max(dz.inf_norm(), dl.inf_norm()));
        }
        pass = pass && worst <= 1e-12;
        detail += fmt("beta=gamma=0 degeneration max diff %.2g (<=1e-12)", worst);
    }
    report(9, "builder and kernel oracles", pass, detail);
}

}  // namespace

int main() {
    std::printf("acceptance suite: dc-motor benchmark\n");
    const Preset preset = dc_motor_preset();
    std::printf("problem: n=%zu m=%zu N=%zu dt=%.3g rho=%.3g, H %zux%zu\n\n", preset.problem.n,
                preset.problem.m, preset.problem.horizon, preset.problem.sample_period,
                preset.problem.rho, preset.problem.H.rows(), preset.problem.H.cols());

    Timer total;
    criterion_certificates(preset);
    criterion_convergence(preset);
    criterion_emulation(preset);
    criterion_latency(preset);
    criterion_dissipation(preset);
    criterion_lyapunov(preset);
    criterion_frozen_oracle(preset);
    criterion_kernel_oracles(preset);

    std::printf("\n%d of 9 criteria passed in %.1fs\n", 9 - failures, total.seconds());
    if (failures > 0)
        std::printf("failing criteria correspond to documented benchmark-definition defects; "
                    "see the accompanying analysis notes\n");
    return failures;
}
