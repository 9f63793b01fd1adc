#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "impc/baseline.hpp"
#include "impc/flow.hpp"
#include "impc/problem.hpp"
#include "oracles.hpp"

using namespace impc;

namespace {
MpcProblem dc_problem() {
    LinearPlant plant(DenseMatrix::from_rows({{-4.0, -0.03}, {0.75, -10.0}}),
                      DenseMatrix::from_rows({{2.0}, {0.0}}));
    return make_problem(plant, 30, 0.1, 1.0, 1000.0);
}
}  // namespace

TEST_CASE("qp at the origin returns the zero optimizer") {
    const MpcProblem prob = dc_problem();
    const QpSolution sol = solve_equality_qp(prob, DenseVector(prob.n));
    CHECK(sol.z.inf_norm() == 0.0);
    CHECK(sol.lambda.inf_norm() == 0.0);
}

TEST_CASE("scalar toy optimum matches an exhaustive grid search over the feasible line") {
    // n = m = 1, N = 1, A = 0.5, B = 1, F = I: minimize u² + x₁² with x₁ = 0.5x₀ + u
    MpcProblem prob;
    prob.horizon = 1;
    prob.n = 1;
    prob.m = 1;
    prob.sample_period = 1.0;
    prob.A = DenseMatrix::from_rows({{0.5}});
    prob.B = DenseMatrix::from_rows({{1.0}});
    std::tie(prob.H, prob.V) = build_prediction_constraints(prob.A, prob.B, 1);
    prob.E = selector_matrix(1, 1, 1);
    prob.F = DenseMatrix::identity(2);
    prob.rho = 2.0;
    prob.G = DenseMatrix(0, 2);
    prob.g0 = DenseVector(0);
    prob.HHt = prob.H * prob.H.transpose();

    const DenseVector x0{1.0};
    const QpSolution sol = solve_equality_qp(prob, x0);

    double best_u = 0.0, best_f = std::numeric_limits<double>::infinity();
    for (double u = -2.0; u <= 2.0; u += 1e-4) {
        const double x1 = 0.5 * x0[0] + u;
        const double f = u * u + x1 * x1;
        if (f < best_f) {
            best_f = f;
            best_u = u;
        }
    }
    CHECK(sol.z[0] == Catch::Approx(best_u).margin(1e-3));
    CHECK(sol.z[0] == Catch::Approx(-0.25).margin(1e-9));  // closed form
    CHECK(prob.cost(sol.z) <= best_f + 1e-9);
}

TEST_CASE("dc-motor solve passes the KKT residual self-check") {
    const MpcProblem prob = dc_problem();
    const DenseVector x{-200.0 / 3.0, -5.0};
    const QpSolution sol = solve_equality_qp(prob, x);
    const KktResiduals r = residual_kkt(sol.z, DenseVector(0), sol.lambda, x, prob);
    const double scale = 1.0 + sol.lambda.inf_norm();
    CHECK(r.stationarity <= 1e-9 * scale);
    CHECK(r.primal_equality <= 1e-9 * (1.0 + x.inf_norm()));
}

TEST_CASE("the solved point beats random feasible perturbations") {
    std::mt19937 rng(71);
    const MpcProblem prob = dc_problem();
    const DenseVector x = oracles::random_vector(rng, prob.n, 30.0);
    const QpSolution sol = solve_equality_qp(prob, x);
    const double f_star = prob.cost(sol.z);
    for (int trial = 0; trial < 100; ++trial) {
        std::vector<DenseVector> u_null;
        for (std::size_t p = 0; p < prob.horizon; ++p)
            u_null.push_back(oracles::random_vector(rng, prob.m, 0.5));
        const DenseVector d =
            oracles::rollout_decision_vector(prob.A, prob.B, DenseVector(prob.n), u_null);
        DenseVector candidate = sol.z;
        candidate += d;
        REQUIRE(prob.cost(candidate) >= f_star - 1e-9);
    }
}

TEST_CASE("mpc_step is the first optimizer block and positively homogeneous") {
    const MpcProblem prob = dc_problem();
    CHECK(mpc_step(prob, DenseVector(prob.n)).inf_norm() == 0.0);

    std::mt19937 rng(73);
    const DenseVector x = oracles::random_vector(rng, prob.n, 10.0);
    const DenseVector u = mpc_step(prob, x);
    const QpSolution sol = solve_equality_qp(prob, x);
    ControllerState s = ControllerState::zero(prob);
    s.z = sol.z;
    CHECK(u[0] == control_output(s, prob)[0]);

    DenseVector x2 = x;
    x2 *= 2.0;
    const DenseVector u2 = mpc_step(prob, x2);
    CHECK(u2[0] == Catch::Approx(2.0 * u[0]).margin(1e-9 * (1.0 + std::abs(u[0]))));

    const DenseVector u_shift = mpc_step(prob, DenseVector{-200.0 / 3.0, -5.0});
    CHECK(std::isfinite(u_shift[0]));
    CHECK(std::abs(u_shift[0]) < 1e3);
}

TEST_CASE("inequality-carrying problems are rejected") {
    MpcProblem prob = dc_problem();
    DenseMatrix g(1, prob.decision_dim());
    g(0, 0) = 1.0;
    prob = with_inequalities(prob, g, DenseVector{-1.0});
    CHECK_THROWS_WITH(solve_equality_qp(prob, DenseVector(prob.n)),
                      Catch::Matchers::ContainsSubstring("inequality"));
}
