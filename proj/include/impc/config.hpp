#pragma once

#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "impc/certify.hpp"
#include "impc/presets.hpp"
#include "impc/sim.hpp"

namespace impc {

// Case spec grammar:
//   mpc | impc:<alpha>,<beta> | impc_gamma:<alpha>,<beta>,<gamma> | impc_proj:<alpha>,<beta>
inline ExperimentCase parse_case_spec(const std::string& spec) {
    auto parse_numbers = [&](const std::string& s, std::size_t want) {
        std::vector<double> vals;
        std::size_t pos = 0;
        while (pos <= s.size()) {
            const std::size_t comma = s.find(',', pos);
            const std::string tok = s.substr(pos, comma == std::string::npos ? std::string::npos
                                                                             : comma - pos);
            try {
                std::size_t used = 0;
                vals.push_back(std::stod(tok, &used));
                if (used != tok.size()) throw std::invalid_argument("trailing characters");
            } catch (const std::exception&) {
                throw std::invalid_argument("invalid case spec '" + spec +
                                            "': cannot parse number '" + tok + "'");
            }
            if (comma == std::string::npos) break;
            pos = comma + 1;
        }
        if (vals.size() != want)
            throw std::invalid_argument("invalid case spec '" + spec + "': expected " +
                                        std::to_string(want) + " parameters");
        return vals;
    };
    auto sanitized = [](std::string name) {
        for (char& c : name)
            if (c == ':' || c == ',' || c == '.') c = '_';
        return name;
    };

    if (spec == "mpc") return {"mpc", ControllerKind::baseline_mpc, FlowParams{}};
    const std::size_t colon = spec.find(':');
    const std::string head = spec.substr(0, colon);
    const std::string tail = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (head == "impc") {
        const auto v = parse_numbers(tail, 2);
        return {sanitized(spec), ControllerKind::impc, FlowParams(v[0], v[1])};
    }
    if (head == "impc_gamma") {
        const auto v = parse_numbers(tail, 3);
        return {sanitized(spec), ControllerKind::impc_gamma, FlowParams(v[0], v[1], v[2])};
    }
    if (head == "impc_proj") {
        const auto v = parse_numbers(tail, 2);
        return {sanitized(spec), ControllerKind::impc_projected, FlowParams(v[0], v[1])};
    }
    throw std::invalid_argument("invalid case spec '" + spec +
                                "': expected mpc | impc:a,b | impc_gamma:a,b,g | impc_proj:a,b");
}

struct ExperimentConfig {
    Preset preset;
    std::string out_dir;
    CoefficientMode mode = CoefficientMode::theorem;
    double total_time = 5.0;
    double step = 1e-3;
    std::size_t log_stride = 10;
    std::size_t repetitions = 1000;
    DenseVector x0;  // original coordinates; empty means zeros
    bool emit_plot_script = false;
};

namespace detail {

inline DenseMatrix matrix_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array() || j.empty() || !j.front().is_array())
        throw std::invalid_argument("config: " + what + " must be an array of rows");
    const std::size_t rows = j.size();
    const std::size_t cols = j.front().size();
    DenseMatrix m(rows, cols);
    for (std::size_t i = 0; i < rows; ++i) {
        if (j[i].size() != cols)
            throw std::invalid_argument("config: " + what + " has ragged rows");
        for (std::size_t k = 0; k < cols; ++k) m(i, k) = j[i][k].get<double>();
    }
    return m;
}

inline DenseVector vector_from_json(const nlohmann::json& j, const std::string& what) {
    if (!j.is_array()) throw std::invalid_argument("config: " + what + " must be an array");
    DenseVector v(j.size());
    for (std::size_t i = 0; i < j.size(); ++i) v[i] = j[i].get<double>();
    return v;
}

}  // namespace detail

// Build a full experiment definition from a JSON document. Exactly one of
// "preset" or "plant"+"problem" must be present; CLI flags may override the
// scalar fields afterwards.
inline ExperimentConfig config_from_json(const nlohmann::json& j) {
    const bool has_preset = j.contains("preset");
    const bool has_inline = j.contains("plant") || j.contains("problem");
    if (has_preset == has_inline)
        throw std::invalid_argument(
            "config: exactly one of 'preset' or inline 'plant'/'problem' must be given");

    ExperimentConfig cfg{load_preset("dc-motor"), "", CoefficientMode::theorem};
    if (has_preset) {
        cfg.preset = load_preset(j.at("preset").get<std::string>());
    } else {
        if (!j.contains("plant") || !j.contains("problem"))
            throw std::invalid_argument("config: inline mode needs both 'plant' and 'problem'");
        const auto& jp = j.at("plant");
        LinearPlant plant(detail::matrix_from_json(jp.at("A_c"), "plant.A_c"),
                          detail::matrix_from_json(jp.at("B_c"), "plant.B_c"));
        const auto& jo = j.at("problem");
        MpcProblem prob = make_problem(
            plant, jo.at("horizon").get<std::size_t>(), jo.at("dt").get<double>(),
            jo.at("input_weight").get<double>(), jo.at("state_weight").get<double>(),
            jo.value("terminal_weight", -1.0));
        DenseVector r(plant.state_dim());
        if (jp.contains("reference")) r = detail::vector_from_json(jp.at("reference"), "reference");
        TrackingShift shift = shift_to_regulation(plant, r);

        QsrTriple qsr;
        qsr.q_c = plant.a_c;
        qsr.s_c = plant.b_c;
        qsr.s_c *= 0.5;
        qsr.r_c = DenseMatrix(plant.input_dim(), plant.input_dim());
        if (j.contains("certificate")) {
            const auto& jc = j.at("certificate");
            if (jc.contains("Q_c")) qsr.q_c = detail::matrix_from_json(jc.at("Q_c"), "Q_c");
            if (jc.contains("S_c")) qsr.s_c = detail::matrix_from_json(jc.at("S_c"), "S_c");
            if (jc.contains("R_c")) qsr.r_c = detail::matrix_from_json(jc.at("R_c"), "R_c");
        }
        qsr.validate(plant.state_dim(), plant.input_dim());
        cfg.preset = Preset{j.value("name", std::string("inline")), std::move(plant),
                            std::move(prob), std::move(shift), std::move(qsr), 1.0, {}};
    }

    if (j.contains("certificate") && j.at("certificate").contains("delta"))
        cfg.preset.delta = j.at("certificate").at("delta").get<double>();
    if (j.contains("cases")) {
        cfg.preset.cases.clear();
        for (const auto& c : j.at("cases"))
            cfg.preset.cases.push_back(parse_case_spec(c.get<std::string>()));
    }
    if (j.contains("sim")) {
        const auto& js = j.at("sim");
        cfg.total_time = js.value("T", cfg.total_time);
        cfg.step = js.value("h", cfg.step);
        cfg.log_stride = js.value("log_stride", cfg.log_stride);
        if (js.contains("x0")) cfg.x0 = detail::vector_from_json(js.at("x0"), "x0");
    }
    if (j.contains("coefficient_mode")) {
        const std::string mode = j.at("coefficient_mode").get<std::string>();
        if (mode == "theorem") cfg.mode = CoefficientMode::theorem;
        else if (mode == "proof") cfg.mode = CoefficientMode::proof;
        else throw std::invalid_argument("config: coefficient_mode must be 'theorem' or 'proof'");
    }
    cfg.out_dir = j.value("out", cfg.out_dir);
    cfg.repetitions = j.value("repetitions", cfg.repetitions);
    return cfg;
}

inline std::string case_to_spec(const ExperimentCase& c) {
    auto num = [](double v) {
        char buf[40];
        std::snprintf(buf, sizeof(buf), "%.17g", v);
        return std::string(buf);
    };
    switch (c.kind) {
        case ControllerKind::baseline_mpc: return "mpc";
        case ControllerKind::impc: return "impc:" + num(c.params.alpha) + "," + num(c.params.beta);
        case ControllerKind::impc_projected:
            return "impc_proj:" + num(c.params.alpha) + "," + num(c.params.beta);
        case ControllerKind::impc_gamma:
            return "impc_gamma:" + num(c.params.alpha) + "," + num(c.params.beta) + "," +
                   num(c.params.gamma);
    }
    throw std::logic_error("case_to_spec: unknown controller kind");
}

// Inline-style JSON document equivalent to the configuration; feeding it
// back through config_from_json rebuilds the same problem.
inline nlohmann::json config_to_json(const ExperimentConfig& cfg) {
    const Preset& p = cfg.preset;
    nlohmann::json j;
    j["name"] = p.name;
    auto mat = [](const DenseMatrix& m) {
        nlohmann::json rows = nlohmann::json::array();
        for (std::size_t i = 0; i < m.rows(); ++i) {
            nlohmann::json row = nlohmann::json::array();
            for (std::size_t k = 0; k < m.cols(); ++k) row.push_back(m(i, k));
            rows.push_back(std::move(row));
        }
        return rows;
    };
    auto vec = [](const DenseVector& v) {
        nlohmann::json out = nlohmann::json::array();
        for (std::size_t i = 0; i < v.size(); ++i) out.push_back(v[i]);
        return out;
    };
    j["plant"] = {{"A_c", mat(p.plant.a_c)},
                  {"B_c", mat(p.plant.b_c)},
                  {"reference", vec(p.shift.r)}};
    j["problem"] = {{"horizon", p.problem.horizon},
                    {"dt", p.problem.sample_period},
                    {"input_weight", p.problem.input_weight},
                    {"state_weight", p.problem.state_weight},
                    {"terminal_weight", p.problem.terminal_weight}};
    j["certificate"] = {{"Q_c", mat(p.qsr.q_c)},
                        {"S_c", mat(p.qsr.s_c)},
                        {"R_c", mat(p.qsr.r_c)},
                        {"delta", p.delta}};
    nlohmann::json cases = nlohmann::json::array();
    for (const auto& c : p.cases) cases.push_back(case_to_spec(c));
    j["cases"] = std::move(cases);
    j["sim"] = {{"T", cfg.total_time}, {"h", cfg.step}, {"log_stride", cfg.log_stride}};
    if (cfg.x0.size() > 0) j["sim"]["x0"] = vec(cfg.x0);
    j["coefficient_mode"] = cfg.mode == CoefficientMode::proof ? "proof" : "theorem";
    if (!cfg.out_dir.empty()) j["out"] = cfg.out_dir;
    j["repetitions"] = cfg.repetitions;
    return j;
}

inline ExperimentConfig config_from_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("config: cannot open " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw std::invalid_argument("config: invalid JSON in " + path + ": " + e.what());
    }
    return config_from_json(j);
}

}  // namespace impc
