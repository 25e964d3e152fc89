// SPDX-License-Identifier: Apache-2.0
//
// permgamp: permittivity estimation from path-loss data
// Copyright (C) 2026 The permgamp authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

// Command-line harness: generate | estimate | sweep | oracle.
//
// Logs go to stderr; data goes to stdout or the --out path.

#include "permgamp/errors.hpp"
#include "permgamp/experiment.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>

namespace {

using namespace permgamp;

constexpr int kExitInput = 2;
constexpr int kExitSolver = 3;

void emit(const std::string& text, const std::string& out) {
    if (out.empty() || out == "-") {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) {
        throw std::filesystem::filesystem_error("cannot write file", out,
                                                std::make_error_code(std::errc::permission_denied));
    }
    f << text;
}

struct DataOptions {
    std::string scenario;
    std::string dataset;
    std::optional<double> sigma;
    std::uint64_t seed = 1;
    std::string dataset_out;
};

void add_data_options(CLI::App* cmd, DataOptions& o) {
    cmd->add_option("--scenario", o.scenario, "Scenario JSON file")->required();
    cmd->add_option("--dataset", o.dataset, "Dataset JSON file");
    cmd->add_option("--sigma", o.sigma, "Synthesize measurements with this noise std (dB)");
    cmd->add_option("--seed", o.seed, "Noise seed for --sigma");
    cmd->add_option("--dataset-out", o.dataset_out, "Write the synthesized dataset here");
}

void add_solver_options(CLI::App* cmd, SolverOverrides& s) {
    cmd->add_option("--k-iter", s.k_iter, "Number of re-linearizations");
    cmd->add_option("--k-gamp", s.k_gamp, "GAMP steps per linearization");
    cmd->add_option("--delta-tr", s.delta_tr, "Trust-region width (permittivity units)");
    cmd->add_option("--tau-w", s.tau_w, "Output noise variance (dB^2); default: dataset noise_var");
    cmd->add_option("--damping", s.damping, "Damping of the output step in (0, 1]");
    cmd->add_option("--early-stop", s.early_stop_tol, "Stop inner loop when max |dx| falls below");
}

struct Loaded {
    Scenario scenario;
    Dataset dataset;
};

Loaded load_inputs(const DataOptions& o) {
    Loaded in;
    in.scenario = load_scenario(o.scenario);
    if (!o.dataset.empty()) {
        in.dataset = load_dataset(o.dataset);
    } else if (o.sigma) {
        in.dataset = synthesize_dataset(in.scenario, *o.sigma, o.seed);
        if (!o.dataset_out.empty()) {
            save_dataset(in.dataset, o.dataset_out);
        }
    } else {
        throw ValidationError("either --dataset or --sigma is required");
    }
    validate(in.dataset, in.scenario);
    return in;
}

// Prepared scenario plus the measurements of the kept links.
struct Problem {
    PreparedScenario prep;
    std::vector<double> y;
    double noise_var = 0.0;
};

Problem make_problem(const Loaded& in) {
    Problem p;
    p.prep = prepare(in.scenario);
    if (p.prep.dropped > 0) {
        std::cerr << "dropped " << p.prep.dropped << " unusable link(s)\n";
    }
    const auto y_all = normalize_measurements(in.scenario, in.dataset);
    for (auto n : p.prep.kept_links) {
        p.y.push_back(y_all[n]);
    }
    p.noise_var = in.dataset.noise_var;
    return p;
}

nlohmann::ordered_json oracle_json(const Problem& p, double step, std::span<const double> eps_hat) {
    const auto grid = oracle::grid_map(p.prep.scenario, p.prep.cache, p.y, std::sqrt(p.noise_var), {step});
    nlohmann::ordered_json j;
    j["eps_map"] = grid.eps;
    j["log_posterior"] = grid.log_posterior;
    j["grid_step"] = step;
    j["grid_nodes"] = grid.nodes;
    if (!eps_hat.empty()) {
        double diff = 0.0;
        for (std::size_t m = 0; m < eps_hat.size(); ++m) {
            diff = std::max(diff, std::abs(eps_hat[m] - grid.eps[m]));
        }
        j["max_abs_diff"] = diff;
        j["within_one_cell"] = diff <= step;
    }
    return j;
}

} // namespace

int main(int argc, char** argv) {
    configure_workers_from_env();

    CLI::App app{"Permittivity estimation from path-loss data with trust-region GAMP"};
    app.require_subcommand(1);

    // generate
    auto* gen = app.add_subcommand("generate", "Write a canyon or free-space template scenario");
    CanyonSpec canyon;
    std::string template_name = "canyon";
    std::string gen_out;
    gen->add_option("--template", template_name, "canyon | free-space")
        ->check(CLI::IsMember({"canyon", "free-space"}));
    gen->add_option("--materials,-M", canyon.num_materials, "Number of materials");
    gen->add_option("--links,-N", canyon.num_links, "Number of links");
    gen->add_option("--length", canyon.length_m, "Canyon length (m)");
    gen->add_option("--width", canyon.width_m, "Canyon width (m)");
    gen->add_option("--wavelength", canyon.wavelength_m, "Carrier wavelength (m)");
    gen->add_option("--max-reflections", canyon.max_reflections, "Maximum bounces per ray");
    gen->add_option("--prior-lo", canyon.prior_lo, "Lower prior bound for every material");
    gen->add_option("--prior-hi", canyon.prior_hi, "Upper prior bound for every material");
    gen->add_option("--true-eps", canyon.true_eps, "Ground-truth permittivity per material")->delimiter(',');
    gen->add_option("--seed", canyon.seed, "Placement seed");
    gen->add_option("--out", gen_out, "Output file (default stdout)");

    // estimate
    auto* est = app.add_subcommand("estimate", "Run the estimator and print a JSON report");
    DataOptions est_data;
    SolverOverrides est_solver;
    bool est_oracle = false;
    double grid_step = 0.05;
    bool no_timing = false;
    std::string est_out;
    std::string rays_csv;
    add_data_options(est, est_data);
    add_solver_options(est, est_solver);
    est->add_flag("--oracle", est_oracle, "Append a grid-search MAP comparison");
    est->add_option("--grid-step", grid_step, "Oracle grid step");
    est->add_flag("--no-timing", no_timing, "Write wall_ms as 0 for reproducible output");
    est->add_option("--rays-csv", rays_csv, "Dump the traced rays as CSV");
    est->add_option("--out", est_out, "Report file (default stdout)");

    // sweep
    auto* sweep = app.add_subcommand("sweep", "Noise sweep: synthesize and solve per (sigma, seed)");
    std::string sweep_config;
    std::string sweep_scenario;
    std::vector<double> sweep_sigmas;
    std::optional<int> sweep_num_seeds;
    std::uint64_t sweep_base_seed = 1;
    std::vector<std::uint64_t> sweep_seed_list;
    std::string sweep_out;
    bool sweep_no_timing = false;
    SolverOverrides sweep_solver;
    sweep->add_option("--config", sweep_config, "Experiment config JSON");
    sweep->add_option("--scenario", sweep_scenario, "Scenario JSON file");
    sweep->add_option("--sigmas", sweep_sigmas, "Noise std values (dB)")->delimiter(',');
    sweep->add_option("--seeds", sweep_num_seeds, "Number of seeds per sigma");
    sweep->add_option("--base-seed", sweep_base_seed, "First seed when --seeds is used");
    sweep->add_option("--seed-list", sweep_seed_list, "Explicit seeds")->delimiter(',');
    sweep->add_option("--out", sweep_out, "Output directory for sweep.csv and summary.csv");
    sweep->add_flag("--no-timing", sweep_no_timing, "Write wall_ms as 0 for reproducible output");
    add_solver_options(sweep, sweep_solver);

    // oracle
    auto* orc = app.add_subcommand("oracle", "Grid-search MAP estimate");
    DataOptions orc_data;
    std::string orc_out;
    add_data_options(orc, orc_data);
    orc->add_option("--grid-step", grid_step, "Grid step");
    orc->add_option("--out", orc_out, "Output file (default stdout)");

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            canyon.free_space = template_name == "free-space";
            emit(scenario_to_json_text(make_canyon(canyon)), gen_out);
        } else if (*est) {
            const Loaded in = load_inputs(est_data);
            const Problem p = make_problem(in);
            if (!rays_csv.empty()) {
                std::ofstream f(rays_csv);
                write_ray_table(f, p.prep.cache);
            }
            const GampConfig cfg = apply_overrides(p.prep.scenario, p.noise_var, est_solver);
            EstimateReport rep;
            try {
                rep = solve(p.prep.scenario, p.prep.cache, p.y, cfg);
            } catch (const SolverError& e) {
                std::cerr << "solver aborted: " << e.what() << '\n';
                return kExitSolver;
            }
            auto j = nlohmann::ordered_json::parse(report_to_json_text(rep, !no_timing));
            j["links_used"] = p.prep.kept_links.size();
            j["links_dropped"] = p.prep.dropped;
            if (est_oracle) {
                j["oracle"] = oracle_json(p, grid_step, rep.eps_hat);
            }
            for (const auto& w : rep.warnings) {
                std::cerr << "warning: " << w << '\n';
            }
            emit(j.dump(2) + "\n", est_out);
        } else if (*sweep) {
            ExperimentConfig cfg;
            if (!sweep_config.empty()) {
                cfg = load_experiment_config(sweep_config);
            }
            if (!sweep_scenario.empty()) {
                cfg.scenario = sweep_scenario;
            }
            if (!sweep_sigmas.empty()) {
                cfg.sigmas = sweep_sigmas;
            }
            if (!sweep_seed_list.empty()) {
                cfg.seeds = sweep_seed_list;
            } else if (sweep_num_seeds) {
                if (*sweep_num_seeds < 0) {
                    throw ValidationError("--seeds: must be >= 0");
                }
                cfg.seeds.clear();
                for (int k = 0; k < *sweep_num_seeds; ++k) {
                    cfg.seeds.push_back(sweep_base_seed + static_cast<std::uint64_t>(k));
                }
            }
            if (!sweep_out.empty()) {
                cfg.out_dir = sweep_out;
            }
            if (sweep_no_timing) {
                cfg.with_timing = false;
            }
            if (sweep_solver.k_iter) cfg.solver.k_iter = sweep_solver.k_iter;
            if (sweep_solver.k_gamp) cfg.solver.k_gamp = sweep_solver.k_gamp;
            if (sweep_solver.delta_tr) cfg.solver.delta_tr = sweep_solver.delta_tr;
            if (sweep_solver.tau_w) cfg.solver.tau_w = sweep_solver.tau_w;
            if (sweep_solver.damping) cfg.solver.damping = sweep_solver.damping;
            if (sweep_solver.early_stop_tol) cfg.solver.early_stop_tol = sweep_solver.early_stop_tol;
            if (cfg.scenario.empty()) {
                throw ValidationError("--scenario or --config is required");
            }
            validate(cfg);

            const Scenario scenario = load_scenario(cfg.scenario);
            const auto rows = run_sweep(scenario, cfg);
            std::filesystem::create_directories(cfg.out_dir);
            std::ofstream sweep_csv(cfg.out_dir / "sweep.csv", std::ios::binary);
            write_sweep_csv(sweep_csv, rows, cfg.with_timing);
            std::ofstream summary_csv(cfg.out_dir / "summary.csv", std::ios::binary);
            write_summary_csv(summary_csv, summarize(rows));
            std::size_t failed = 0;
            for (const auto& r : rows) {
                failed += r.status != "ok";
            }
            std::cerr << "wrote " << rows.size() << " rows to " << (cfg.out_dir / "sweep.csv").string()
                      << (failed ? " (" + std::to_string(failed) + " failed)" : "") << '\n';
        } else if (*orc) {
            const Loaded in = load_inputs(orc_data);
            const Problem p = make_problem(in);
            emit(oracle_json(p, grid_step, {}).dump(2) + "\n", orc_out);
        }
    } catch (const SolverError& e) {
        std::cerr << "solver aborted: " << e.what() << '\n';
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitInput;
    }
    return 0;
}
