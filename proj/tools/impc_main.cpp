// impc — instant-MPC workbench.
//
//   impc simulate [--preset NAME | --config FILE] [--case SPEC]... [--out DIR]
//                 [--coeff theorem|proof] [--h STEP] [--T HORIZON] [--plot] ...
//   impc certify  [--preset NAME | --config FILE] [--case SPEC]... [--delta D]
//   impc bench    [--preset NAME | --config FILE] [--reps N]
//
// Case specs: mpc | impc:<alpha>,<beta> | impc_gamma:<alpha>,<beta>,<gamma>
//             | impc_proj:<alpha>,<beta>
// Exit codes: 0 success, 1 runtime failure, 2 usage/config error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <future>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "impc/config.hpp"
#include "impc/csv.hpp"
#include "impc/monitor.hpp"
#include "impc/presets.hpp"

namespace {

struct CliOptions {
    std::string preset_name;
    std::string config_file;
    std::vector<std::string> case_specs;
    std::string out_dir = ".";
    std::string coeff = "";
    std::string controller_override;
    double step = -1.0;
    double horizon = -1.0;
    long log_stride = -1;
    double delta = -1.0;
    long repetitions = -1;
    bool plot = false;
};

impc::ExperimentConfig resolve_config(const CliOptions& opt) {
    if (!opt.preset_name.empty() && !opt.config_file.empty())
        throw std::invalid_argument("give either --preset or --config, not both");
    impc::ExperimentConfig cfg =
        opt.config_file.empty()
            ? impc::ExperimentConfig{impc::load_preset(opt.preset_name.empty() ? "dc-motor"
                                                                               : opt.preset_name),
                                     "."}
            : impc::config_from_file(opt.config_file);

    if (!opt.case_specs.empty()) {
        cfg.preset.cases.clear();
        for (const auto& spec : opt.case_specs)
            cfg.preset.cases.push_back(impc::parse_case_spec(spec));
    }
    if (!opt.controller_override.empty()) {
        impc::ControllerKind kind;
        if (opt.controller_override == "impc") kind = impc::ControllerKind::impc;
        else if (opt.controller_override == "impc_projected") kind = impc::ControllerKind::impc_projected;
        else if (opt.controller_override == "impc_gamma") kind = impc::ControllerKind::impc_gamma;
        else if (opt.controller_override == "baseline_mpc") kind = impc::ControllerKind::baseline_mpc;
        else throw std::invalid_argument("unknown controller override: " + opt.controller_override);
        for (auto& c : cfg.preset.cases)
            if (c.kind != impc::ControllerKind::baseline_mpc) c.kind = kind;
    }
    if (!opt.coeff.empty()) {
        if (opt.coeff == "theorem") cfg.mode = impc::CoefficientMode::theorem;
        else if (opt.coeff == "proof") cfg.mode = impc::CoefficientMode::proof;
        else throw std::invalid_argument("--coeff must be 'theorem' or 'proof'");
    }
    if (opt.step > 0.0) cfg.step = opt.step;
    if (opt.horizon > 0.0) cfg.total_time = opt.horizon;
    if (opt.log_stride > 0) cfg.log_stride = static_cast<std::size_t>(opt.log_stride);
    if (opt.delta > 0.0) cfg.preset.delta = opt.delta;
    if (opt.repetitions > 0) cfg.repetitions = static_cast<std::size_t>(opt.repetitions);
    if (!opt.out_dir.empty()) cfg.out_dir = opt.out_dir;
    cfg.emit_plot_script = opt.plot;
    return cfg;
}

std::size_t worker_cap() {
    if (const char* env = std::getenv("IMPC_THREADS")) {
        const long v = std::atol(env);
        if (v >= 1) return static_cast<std::size_t>(v);
    }
    const unsigned hc = std::thread::hardware_concurrency();
    return hc > 0 ? hc : 1;
}

std::string machine_note() {
    std::ifstream cpuinfo("/proc/cpuinfo");
    std::string line;
    while (std::getline(cpuinfo, line)) {
        if (line.rfind("model name", 0) == 0) {
            const auto colon = line.find(':');
            return colon == std::string::npos ? line : line.substr(colon + 2);
        }
    }
    return "unknown cpu";
}

struct CaseResult {
    impc::ExperimentCase def;
    impc::SimLog log;
    impc::TrackingMetrics metrics;
    std::string csv_path;
};

CaseResult run_case(const impc::ExperimentConfig& cfg, const impc::ExperimentCase& c) {
    const impc::Preset& preset = cfg.preset;
    impc::SimConfig sim;
    sim.total_time = cfg.total_time;
    sim.step = cfg.step;
    sim.log_stride = cfg.log_stride;
    sim.controller = c.kind;
    sim.x0 = cfg.x0;
    if (c.kind != impc::ControllerKind::baseline_mpc) {
        sim.certificate = impc::make_certificate_inputs(preset.qsr, preset.problem, c.params.alpha,
                                                        c.params.beta, preset.delta, cfg.mode);
    }

    CaseResult result{c, {}, {}, ""};
    result.log = c.kind == impc::ControllerKind::baseline_mpc
                     ? impc::simulate_mpc(preset.plant, preset.problem, preset.shift, sim)
                     : impc::simulate_impc(preset.plant, preset.problem, c.params, preset.shift, sim);
    result.metrics = impc::tracking_metrics(result.log, preset.shift.r);
    return result;
}

void write_plot_script(const std::string& dir, const std::vector<CaseResult>& results,
                       std::size_t n, std::size_t m) {
    std::ofstream gp(dir + "/plot.gp", std::ios::binary);
    gp << "# gnuplot script for the emitted trajectory CSVs\n"
       << "set datafile separator ','\n"
       << "set key outside\n"
       << "set xlabel 't [s]'\n";
    for (std::size_t i = 0; i < n; ++i) {
        gp << "set title 'state x" << i + 1 << "'\nplot \\\n";
        for (std::size_t k = 0; k < results.size(); ++k) {
            gp << "  '" << std::filesystem::path(results[k].csv_path).filename().string()
               << "' using 1:" << i + 2 << " with lines title '" << results[k].def.name << "'"
               << (k + 1 < results.size() ? ", \\\n" : "\n");
        }
        gp << "pause -1\n";
    }
    for (std::size_t i = 0; i < m; ++i) {
        gp << "set title 'input u" << i + 1 << "'\nplot \\\n";
        for (std::size_t k = 0; k < results.size(); ++k) {
            gp << "  '" << std::filesystem::path(results[k].csv_path).filename().string()
               << "' using 1:" << n + i + 2 << " with lines title '" << results[k].def.name << "'"
               << (k + 1 < results.size() ? ", \\\n" : "\n");
        }
        gp << "pause -1\n";
    }
}

int cmd_simulate(const CliOptions& opt) {
    impc::ExperimentConfig cfg = resolve_config(opt);
    const impc::Preset& preset = cfg.preset;
    if (preset.cases.empty()) throw std::invalid_argument("no cases requested");

    if (!std::filesystem::is_directory(cfg.out_dir))
        throw std::invalid_argument("output directory does not exist: " + cfg.out_dir);

    const std::size_t cap = worker_cap();
    std::vector<CaseResult> results(preset.cases.size());
    for (std::size_t base = 0; base < preset.cases.size(); base += cap) {
        std::vector<std::future<CaseResult>> futs;
        for (std::size_t i = base; i < std::min(base + cap, preset.cases.size()); ++i)
            futs.push_back(std::async(std::launch::async, run_case, std::cref(cfg),
                                      std::cref(preset.cases[i])));
        for (std::size_t i = 0; i < futs.size(); ++i) results[base + i] = futs[i].get();
    }

    const std::size_t n = preset.problem.n;
    const std::size_t m = preset.problem.m;
    for (auto& res : results) {
        res.csv_path = cfg.out_dir + "/" + res.def.name + ".csv";
        impc::write_csv(res.csv_path, res.log, n, m);
        impc::validate_csv(res.csv_path, n, m);
    }

    std::ofstream summary(cfg.out_dir + "/summary.txt", std::ios::binary);
    summary << "impc simulation summary (" << preset.name << ")\n"
            << "configuration chosen by this tool (not prescribed by the benchmark): "
            << "x0 = origin, T = " << cfg.total_time << " s, h = " << cfg.step
            << " s, log stride = " << cfg.log_stride << "\n"
            << "reference r = (";
    for (std::size_t i = 0; i < n; ++i)
        summary << preset.shift.r[i] << (i + 1 < n ? ", " : ")\n\n");

    for (const auto& res : results) {
        summary << "case " << res.def.name << " [" << impc::controller_name(res.def.kind) << "]";
        if (res.def.kind != impc::ControllerKind::baseline_mpc) {
            summary << " alpha=" << res.def.params.alpha << " beta=" << res.def.params.beta;
            if (res.def.kind == impc::ControllerKind::impc_gamma)
                summary << " gamma=" << res.def.params.gamma;
        }
        summary << "\n  csv: " << res.csv_path << "\n";
        if (res.log.diverged) {
            summary << "  DIVERGED (state exceeded cutoff); metrics refer to the truncated log\n";
        }
        summary << "  ISE = " << res.metrics.ise << ", final error = " << res.metrics.final_error
                << ", settling time (2%) = " << res.metrics.settling_time << " s\n";
        double max_feas = 0.0;
        for (double v : res.log.eq_feasibility) max_feas = std::max(max_feas, v);
        summary << "  max equality-constraint residual = " << max_feas << "\n";
        const auto lat = impc::summarize_latency(res.log.latency);
        summary << "  per-decision latency (in-run): mean " << lat.mean * 1e6 << " us, median "
                << lat.median * 1e6 << " us, p95 " << lat.p95 * 1e6 << " us\n";

        if (res.def.kind != impc::ControllerKind::baseline_mpc) {
            for (const auto mode : {impc::CoefficientMode::theorem, impc::CoefficientMode::proof}) {
                auto cert = impc::make_certificate_inputs(preset.qsr, preset.problem,
                                                          res.def.params.alpha, res.def.params.beta,
                                                          preset.delta, mode);
                const auto [nd, max_eig] = impc::check_negative_definite(impc::build_q_all(cert));
                summary << "  certificate ("
                        << (mode == impc::CoefficientMode::theorem ? "theorem" : "proof")
                        << " coefficient, delta=" << preset.delta << "): max eig = " << max_eig
                        << " -> " << (nd ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
            }
            if (res.def.kind != impc::ControllerKind::impc)
                summary << "  note: certificate statement covers the unprojected explicit flow\n";
        }
        summary << "\n";
    }
    if (cfg.emit_plot_script) write_plot_script(cfg.out_dir, results, n, m);

    std::cout << "wrote " << results.size() << " case file(s) and summary to " << cfg.out_dir
              << "\n";
    return 0;
}

int cmd_certify(const CliOptions& opt) {
    impc::ExperimentConfig cfg = resolve_config(opt);
    const impc::Preset& preset = cfg.preset;
    std::cout << "stability certificate report (" << preset.name << "), delta = " << preset.delta
              << ", rho = " << preset.problem.rho << "\n";
    bool any = false;
    for (const auto& c : preset.cases) {
        if (c.kind == impc::ControllerKind::baseline_mpc) continue;
        any = true;
        std::cout << "case " << c.name << " (alpha=" << c.params.alpha
                  << ", beta=" << c.params.beta << ")\n";
        bool certified_at_delta = false;
        for (const auto mode : {impc::CoefficientMode::theorem, impc::CoefficientMode::proof}) {
            const auto cert = impc::make_certificate_inputs(preset.qsr, preset.problem,
                                                            c.params.alpha, c.params.beta,
                                                            preset.delta, mode);
            const auto [nd, max_eig] = impc::check_negative_definite(impc::build_q_all(cert));
            const bool is_theorem = mode == impc::CoefficientMode::theorem;
            std::cout << "  Q_all max eigenvalue (" << (is_theorem ? "theorem" : "proof")
                      << " coefficient) = " << max_eig << "\n";
            if (is_theorem && nd) certified_at_delta = true;
        }
        const auto cert = impc::make_certificate_inputs(preset.qsr, preset.problem, c.params.alpha,
                                                        c.params.beta, preset.delta, cfg.mode);
        const auto search = impc::search_delta(cert, impc::default_delta_grid());
        std::cout << "  delta search ("
                  << (cfg.mode == impc::CoefficientMode::theorem ? "theorem" : "proof")
                  << " coefficient, grid 1e-3..1e3): best delta = " << search.best_delta
                  << ", max eig = " << search.best_max_eig << ", certifiable = "
                  << (search.certified ? "yes" : "no") << "\n";
        std::cout << "  verdict at delta=" << preset.delta << " (theorem coefficient): "
                  << (certified_at_delta ? "CERTIFIED" : "NOT CERTIFIED") << "\n";
    }
    if (!any) throw std::invalid_argument("certify: no flow cases requested");
    return 0;
}

int cmd_bench(const CliOptions& opt) {
    impc::ExperimentConfig cfg = resolve_config(opt);
    const impc::Preset& preset = cfg.preset;
    impc::SimConfig sim;
    std::cout << "latency benchmark (" << preset.name << "), " << cfg.repetitions
              << " repetitions per controller, single worker\n"
              << "machine: " << machine_note() << "\n";
    for (const auto& c : preset.cases) {
        if (c.kind == impc::ControllerKind::baseline_mpc) continue;
        const auto rep =
            impc::benchmark_latency(preset.plant, preset.problem, c.params, sim, cfg.repetitions);
        std::cout << "controller " << c.name << ":\n"
                  << "  baseline qp solve: mean " << rep.baseline.mean * 1e6 << " us, median "
                  << rep.baseline.median * 1e6 << " us, p95 " << rep.baseline.p95 * 1e6 << " us\n"
                  << "  flow decision:     mean " << rep.flow.mean * 1e6 << " us, median "
                  << rep.flow.median * 1e6 << " us, p95 " << rep.flow.p95 * 1e6 << " us\n"
                  << "  baseline/flow mean ratio = " << rep.ratio_mean << "\n";
    }
    std::cout << "reference values reported for this benchmark family (Core i7-6500U, MATLAB "
                 "quadprog baseline): mpc 9.80 ms, flow(10,10) 0.331 ms, flow(10,1000) 0.185 ms "
                 "[reported elsewhere; hardware- and solver-dependent, not reproduced here]\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"instant-MPC workbench: primal-dual flow controller, sampled-MPC baseline, "
                 "stability certificates, closed-loop simulation"};
    app.require_subcommand(1);
    app.set_help_flag("--help", "print help");  // frees -h/--h for the step option
    CliOptions opt;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--preset", opt.preset_name, "named preset (dc-motor)");
        sub->add_option("--config", opt.config_file, "JSON config file");
        sub->add_option("--case", opt.case_specs,
                        "case spec: mpc | impc:a,b | impc_gamma:a,b,g | impc_proj:a,b");
        sub->add_option("--coeff", opt.coeff, "supply-rate coefficient mode: theorem | proof");
    };
    CLI::App* sim = app.add_subcommand("simulate", "run closed-loop cases, emit CSVs + summary");
    sim->set_help_flag("--help", "print help");
    add_common(sim);
    sim->add_option("--out", opt.out_dir, "output directory (must exist)");
    sim->add_option("--h", opt.step, "integrator step [s]");
    sim->add_option("--T", opt.horizon, "simulation horizon [s]");
    sim->add_option("--log-stride", opt.log_stride, "log every k-th step");
    sim->add_option("--controller", opt.controller_override,
                    "force controller variant for flow cases");
    sim->add_flag("--plot", opt.plot, "emit gnuplot script");

    CLI::App* cert = app.add_subcommand("certify", "evaluate the stability certificate");
    add_common(cert);
    cert->add_option("--delta", opt.delta, "certificate delta (default from preset)");

    CLI::App* bench = app.add_subcommand("bench", "per-decision latency comparison");
    add_common(bench);
    bench->add_option("--reps", opt.repetitions, "repetitions per controller (>= 100)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);
        app.exit(e);
        return 2;
    }

    try {
        if (sim->parsed()) return cmd_simulate(opt);
        if (cert->parsed()) return cmd_certify(opt);
        if (bench->parsed()) return cmd_bench(opt);
        return 2;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
