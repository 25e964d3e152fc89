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

#pragma once

#include "permgamp/gamp.hpp"
#include "permgamp/oracle.hpp"
#include "permgamp/raytracer.hpp"
#include "permgamp/scenario.hpp"

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace permgamp {

/// A scenario with its unusable links removed and rays cached.
struct PreparedScenario {
    Scenario scenario;
    RayCache cache;
    std::vector<std::size_t> kept_links; // indices into the original link list
    std::size_t dropped = 0;
};

/// Trace every link, drop the ones with no ray or whose gain is below the
/// floor at `probe_eps` (prior midpoints when empty).
PreparedScenario prepare(const Scenario& scenario, std::span<const double> probe_eps = {});

/// Solver overrides; unset fields keep the defaults of default_config.
struct SolverOverrides {
    std::optional<int> k_iter;
    std::optional<int> k_gamp;
    std::optional<double> delta_tr;
    std::optional<double> tau_w;
    std::optional<double> damping;
    std::optional<double> early_stop_tol;
};

GampConfig apply_overrides(const Scenario& scenario, double noise_var,
                           const SolverOverrides& overrides);

struct ExperimentConfig {
    std::filesystem::path scenario;
    std::vector<double> sigmas;
    std::vector<std::uint64_t> seeds;
    SolverOverrides solver;
    std::filesystem::path out_dir = ".";
    bool with_timing = true;
};

/// Reads {scenario, sigmas, seeds | num_seeds + base_seed, solver{...}, out_dir}.
/// A relative scenario path resolves against the config file's directory.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Throws ValidationError for an empty sigma or seed list or a negative sigma.
void validate(const ExperimentConfig& config);

struct SweepRow {
    double sigma_z = 0.0;
    std::uint64_t seed = 0;
    int material = 1;
    double eps_true = 0.0;
    double eps_hat = 0.0;
    double abs_err = 0.0;
    int iterations = 0;
    double wall_ms = 0.0;
    std::string status = "ok";
};

struct SweepSummaryRow {
    double sigma_z = 0.0;
    int material = 1;
    std::size_t runs = 0; // successful runs
    double mean_abs_err = 0.0;
    double std_abs_err = 0.0;
};

/// One synthesize + solve per (sigma, seed) on a worker pool. Rows are ordered
/// by (sigma, seed, material) whatever the completion order; a failed run
/// yields rows with a non-"ok" status and the sweep continues.
std::vector<SweepRow> run_sweep(const Scenario& scenario, const ExperimentConfig& config);

std::vector<SweepSummaryRow> summarize(const std::vector<SweepRow>& rows);

void write_sweep_csv(std::ostream& os, const std::vector<SweepRow>& rows, bool with_timing);
void write_summary_csv(std::ostream& os, const std::vector<SweepSummaryRow>& rows);

} // namespace permgamp
