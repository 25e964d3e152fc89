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

#include "permgamp/experiment.hpp"

#include "permgamp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>

namespace permgamp {

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

} // namespace

PreparedScenario prepare(const Scenario& scenario, std::span<const double> probe_eps) {
    std::vector<double> probe(probe_eps.begin(), probe_eps.end());
    if (probe.empty()) {
        for (const auto& mat : scenario.materials) {
            probe.push_back(0.5 * (mat.prior_lo + mat.prior_hi));
        }
    }
    RayCache all = trace_all(scenario);

    PreparedScenario out;
    for (std::size_t n = 0; n < all.size(); ++n) {
        bool usable = !all[n].empty();
        if (usable) {
            try {
                link_gain_db(all[n], probe, scenario.wavelength_m, scenario.polarization, n);
            } catch (const UnusableLinkError&) {
                usable = false;
            }
        }
        if (usable) {
            out.kept_links.push_back(n);
            out.cache.push_back(std::move(all[n]));
        } else {
            ++out.dropped;
        }
    }
    if (out.kept_links.empty()) {
        throw ValidationError("links: no usable link in the scenario");
    }
    out.scenario = select_links(scenario, out.kept_links);
    return out;
}

GampConfig apply_overrides(const Scenario& scenario, double noise_var,
                           const SolverOverrides& o) {
    GampConfig cfg;
    cfg.tau_w = o.tau_w.value_or(noise_var);
    if (o.k_iter) {
        cfg.k_iter = *o.k_iter;
    }
    if (o.k_gamp) {
        cfg.k_gamp = *o.k_gamp;
    }
    if (o.delta_tr) {
        cfg.delta_tr = {*o.delta_tr};
    }
    if (o.damping) {
        cfg.damping = *o.damping;
    }
    if (o.early_stop_tol) {
        cfg.early_stop_tol = *o.early_stop_tol;
    }
    return resolve_config(scenario, cfg);
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw std::filesystem::filesystem_error("cannot open file", path,
                                                std::make_error_code(std::errc::no_such_file_or_directory));
    }
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(e.what());
    }
    ExperimentConfig cfg;
    try {
        std::filesystem::path scen = j.at("scenario").get<std::string>();
        cfg.scenario = scen.is_relative() ? path.parent_path() / scen : scen;
        cfg.sigmas = j.at("sigmas").get<std::vector<double>>();
        if (j.contains("seeds")) {
            cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
        } else {
            const auto count = j.value("num_seeds", 0);
            const auto base = j.value("base_seed", std::uint64_t{1});
            for (int k = 0; k < count; ++k) {
                cfg.seeds.push_back(base + static_cast<std::uint64_t>(k));
            }
        }
        if (j.contains("out_dir")) {
            cfg.out_dir = j.at("out_dir").get<std::string>();
        }
        cfg.with_timing = j.value("timing", true);
        if (j.contains("solver")) {
            const auto& s = j.at("solver");
            if (s.contains("k_iter")) cfg.solver.k_iter = s.at("k_iter").get<int>();
            if (s.contains("k_gamp")) cfg.solver.k_gamp = s.at("k_gamp").get<int>();
            if (s.contains("delta_tr")) cfg.solver.delta_tr = s.at("delta_tr").get<double>();
            if (s.contains("tau_w")) cfg.solver.tau_w = s.at("tau_w").get<double>();
            if (s.contains("damping")) cfg.solver.damping = s.at("damping").get<double>();
            if (s.contains("early_stop_tol")) cfg.solver.early_stop_tol = s.at("early_stop_tol").get<double>();
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(std::string("experiment config: ") + e.what());
    }
    return cfg;
}

void validate(const ExperimentConfig& config) {
    if (config.sigmas.empty()) {
        throw ValidationError("sigmas: at least one value required");
    }
    if (config.seeds.empty()) {
        throw ValidationError("seeds: at least one seed required");
    }
    for (double s : config.sigmas) {
        if (!(s >= 0.0)) {
            throw ValidationError("sigmas: values must be >= 0");
        }
    }
}

std::vector<SweepRow> run_sweep(const Scenario& scenario, const ExperimentConfig& config) {
    validate(config);
    const auto truth = scenario.true_eps();
    const PreparedScenario prep = prepare(scenario);
    const std::size_t n_mat = scenario.materials.size();
    const std::size_t n_seeds = config.seeds.size();
    const std::size_t jobs = config.sigmas.size() * n_seeds;

    std::vector<SweepRow> rows(jobs * n_mat);
    const auto n_jobs = static_cast<long>(jobs);
#pragma omp parallel for schedule(dynamic, 1)
    for (long job = 0; job < n_jobs; ++job) {
        const auto ju = static_cast<std::size_t>(job);
        const double sigma = config.sigmas[ju / n_seeds];
        const std::uint64_t seed = config.seeds[ju % n_seeds];
        const auto start = std::chrono::steady_clock::now();

        std::vector<double> estimate(n_mat, std::nan(""));
        int iterations = 0;
        std::string status = "ok";
        try {
            const Dataset data = synthesize_dataset(prep.scenario, sigma, seed);
            const auto y = normalize_measurements(prep.scenario, data);
            const GampConfig cfg = apply_overrides(prep.scenario, data.noise_var, config.solver);
            const EstimateReport rep = solve(prep.scenario, prep.cache, y, cfg);
            estimate = rep.eps_hat;
            iterations = rep.iterations_run;
        } catch (const std::exception& e) {
            status = std::string("error: ") + e.what();
            std::replace(status.begin(), status.end(), ',', ';');
            std::replace(status.begin(), status.end(), '\n', ' ');
        }
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        for (std::size_t m = 0; m < n_mat; ++m) {
            SweepRow& row = rows[ju * n_mat + m];
            row.sigma_z = sigma;
            row.seed = seed;
            row.material = static_cast<int>(m) + 1;
            row.eps_true = truth[m];
            row.eps_hat = estimate[m];
            row.abs_err = std::abs(estimate[m] - truth[m]);
            row.iterations = iterations;
            row.wall_ms = config.with_timing ? ms : 0.0;
            row.status = status;
        }
    }
    return rows;
}

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows) {
    // Keyed by first appearance of each (sigma, material) to keep sweep order.
    std::vector<SweepSummaryRow> out;
    std::vector<std::vector<double>> errors;
    for (const auto& row : rows) {
        auto it = std::find_if(out.begin(), out.end(), [&](const SweepSummaryRow& s) {
            return s.sigma_z == row.sigma_z && s.material == row.material;
        });
        if (it == out.end()) {
            out.push_back({row.sigma_z, row.material, 0, 0.0, 0.0});
            errors.emplace_back();
            it = out.end() - 1;
        }
        if (row.status == "ok") {
            errors[static_cast<std::size_t>(it - out.begin())].push_back(row.abs_err);
        }
    }
    for (std::size_t k = 0; k < out.size(); ++k) {
        const auto& e = errors[k];
        out[k].runs = e.size();
        if (e.empty()) {
            out[k].mean_abs_err = std::nan("");
            out[k].std_abs_err = std::nan("");
            continue;
        }
        double mean = 0.0;
        for (double v : e) {
            mean += v;
        }
        mean /= static_cast<double>(e.size());
        double ss = 0.0;
        for (double v : e) {
            ss += (v - mean) * (v - mean);
        }
        out[k].mean_abs_err = mean;
        out[k].std_abs_err = e.size() > 1 ? std::sqrt(ss / static_cast<double>(e.size() - 1)) : 0.0;
    }
    return out;
}

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool with_timing) {
    os << "sigma_z,seed,material,eps_true,eps_hat,abs_err,iterations,wall_ms,status\n";
    for (const auto& r : rows) {
        os << num(r.sigma_z) << ',' << r.seed << ',' << r.material << ',' << num(r.eps_true) << ','
           << num(r.eps_hat) << ',' << num(r.abs_err) << ',' << r.iterations << ','
           << num(with_timing ? r.wall_ms : 0.0) << ',' << r.status << '\n';
    }
}

void write_summary_csv(std::ostream& os, const std::vector<SweepSummaryRow>& rows) {
    os << "sigma_z,material,runs,mean_abs_err,std_abs_err\n";
    for (const auto& r : rows) {
        os << num(r.sigma_z) << ',' << r.material << ',' << r.runs << ',' << num(r.mean_abs_err) << ','
           << num(r.std_abs_err) << '\n';
    }
}

} // namespace permgamp
