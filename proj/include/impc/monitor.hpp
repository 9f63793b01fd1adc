#pragma once

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <vector>

#include "impc/certify.hpp"
#include "impc/sim.hpp"

namespace impc {

/// Finite-difference dissipation check over a uniformly logged run. Storage
/// derivatives come from central differences on the logged grid; supply
/// rates use the proof coefficient (what the derivation supports). Residual
/// k corresponds to interior sample k+1; a residual above 1e-4·(1+|w|) is
/// flagged.
struct DissipationReport {
    std::vector<double> flow_residual;   // ΔS_flow/h − w_flow
    std::vector<double> plant_residual;  // ΔS_plant/h − w_plant
    std::vector<double> lyap_residual;   // Δ𝒱/h − q
    std::vector<std::size_t> flow_violations;
    std::vector<std::size_t> plant_violations;
    std::vector<std::size_t> lyap_violations;
};

inline DissipationReport dissipation_monitor(const SimLog& log, const CertificateInputs& inputs,
                                             double tolerance_scale = 1e-4) {
    if (!log.has_certificate)
        throw std::invalid_argument(
            "monitor: log lacks certificate-backed storage series; rerun with certificate inputs");
    if (!(inputs.delta > 0.0)) throw std::invalid_argument("monitor: delta must be positive");
    const std::size_t rows = log.rows();
    if (rows < 3) throw std::invalid_argument("monitor: log too short for central differences");
    const double h = log.t[1] - log.t[0];
    if (!(h > 0.0)) throw std::invalid_argument("monitor: nonuniform log (nonpositive spacing)");
    for (std::size_t k = 0; k + 1 < rows; ++k)
        if (std::abs((log.t[k + 1] - log.t[k]) - h) > 1e-9 * h)
            throw std::invalid_argument("monitor: nonuniform log spacing");

    DissipationReport rep;
    rep.flow_residual.reserve(rows - 2);
    rep.plant_residual.reserve(rows - 2);
    rep.lyap_residual.reserve(rows - 2);

    for (std::size_t k = 1; k + 1 < rows; ++k) {
        const double ds_flow =
            (log.storage[k + 1].s_flow - log.storage[k - 1].s_flow) / (2.0 * h);
        const double ds_plant =
            (log.storage[k + 1].s_plant - log.storage[k - 1].s_plant) / (2.0 * h);
        const double dv = (log.storage[k + 1].v_lyap - log.storage[k - 1].v_lyap) / (2.0 * h);

        const double w_flow = log.w_flow_proof[k];
        const double w_plant = log.storage[k].w_plant;
        const double q = log.q_bound_proof[k];

        const double rf = ds_flow - w_flow;
        const double rp = ds_plant - w_plant;
        const double rv = dv - q;
        rep.flow_residual.push_back(rf);
        rep.plant_residual.push_back(rp);
        rep.lyap_residual.push_back(rv);
        if (rf > tolerance_scale * (1.0 + std::abs(w_flow))) rep.flow_violations.push_back(k);
        if (rp > tolerance_scale * (1.0 + std::abs(w_plant))) rep.plant_violations.push_back(k);
        if (rv > tolerance_scale * (1.0 + std::abs(q))) rep.lyap_violations.push_back(k);
    }
    return rep;
}

}  // namespace impc
