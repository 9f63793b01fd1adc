#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "impc/certify.hpp"
#include "impc/flow.hpp"
#include "impc/plant.hpp"
#include "impc/problem.hpp"
#include "impc/sim.hpp"

namespace impc {

struct ExperimentCase {
    std::string name;
    ControllerKind kind = ControllerKind::impc;
    FlowParams params;
};

struct Preset {
    std::string name;
    LinearPlant plant;
    MpcProblem problem;
    TrackingShift shift;
    QsrTriple qsr;
    double delta = 1.0;
    std::vector<ExperimentCase> cases;
};

// DC-motor benchmark: state [current; angular velocity], input voltage.
// Horizon 30 at Δt = 0.1 s, cost blkdiag(I_N, 1000·I_2N), reference
// (200/3, 5), and the three study cases (sampled QP baseline, flow at
// (α,β) = (10,10) and (10,1000)) with certificate data Q_c = A_c,
// S_c = B_c/2, R_c = 0, δ = 1.
inline Preset dc_motor_preset() {
    LinearPlant plant(DenseMatrix::from_rows({{-4.0, -0.03}, {0.75, -10.0}}),
                      DenseMatrix::from_rows({{2.0}, {0.0}}));
    MpcProblem prob = make_problem(plant, 30, 0.1, 1.0, 1000.0);
    TrackingShift shift = shift_to_regulation(plant, DenseVector{200.0 / 3.0, 5.0});

    QsrTriple qsr;
    qsr.q_c = plant.a_c;
    qsr.s_c = plant.b_c;
    qsr.s_c *= 0.5;
    qsr.r_c = DenseMatrix(1, 1);

    Preset p{"dc-motor", std::move(plant), std::move(prob), std::move(shift), std::move(qsr), 1.0, {}};
    p.cases.push_back({"mpc", ControllerKind::baseline_mpc, FlowParams{}});
    p.cases.push_back({"impc_10_10", ControllerKind::impc, FlowParams(10.0, 10.0)});
    p.cases.push_back({"impc_10_1000", ControllerKind::impc, FlowParams(10.0, 1000.0)});
    return p;
}

inline Preset load_preset(const std::string& name) {
    if (name == "dc-motor") return dc_motor_preset();
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace impc
