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

#include "permgamp/forward_model.hpp"
#include "permgamp/scenario.hpp"
#include "permgamp/trunc_gauss.hpp"

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace permgamp {

/// Noise variance floor applied to tau_w, dB^2.
inline constexpr double kTauWFloor = 1e-6;

struct GampConfig {
    int k_iter = 20;                // re-linearizations
    int k_gamp = 10;                // GAMP steps per linearization
    std::vector<double> delta_tr;   // full trust-region width per material; one entry broadcasts
    double tau_w = 0.0;             // output-channel noise variance, floored at kTauWFloor
    std::vector<double> x0;         // initial estimate; empty means prior midpoints
    double damping = 1.0;           // 1 = undamped
    double early_stop_tol = 0.0;    // 0 = always run k_gamp inner steps
    double variance_floor = 1e-12;
};

/// Defaults: x0 at prior midpoints, delta_tr = min_m (b_m - a_m) / 5 broadcast, tau_w given.
GampConfig default_config(const Scenario& scenario, double tau_w);

/// Fill empty x0 / delta_tr from `scenario` and check every range. Throws ValidationError.
GampConfig resolve_config(const Scenario& scenario, GampConfig config);

struct GampState {
    std::vector<double> x_hat; // M
    std::vector<double> tau_x; // M
    std::vector<double> s_hat; // N
    std::vector<double> tau_s; // N
    std::vector<double> p_hat; // N
    std::vector<double> tau_p; // N
    std::vector<double> z_hat; // N, diagnostic only
    std::vector<double> c_hat; // M
    std::vector<double> tau_c; // M
    std::vector<Interval> trust;
    std::vector<Interval> priors;
    std::vector<double> prior_var;
    long k = 0;
};

std::vector<Interval> prior_intervals(const Scenario& scenario);

/// Trust region around `center`: [max(a, c - d/2), min(b, c + d/2)].
std::vector<Interval> trust_region(std::span<const Interval> priors,
                                   std::span<const double> center,
                                   std::span<const double> delta_tr);

/// x_hat = x0, tau_x = prior variance (b-a)^2/12, s_hat = 0, trust centered at x0.
GampState init_state(const Scenario& scenario, const GampConfig& config);

/// Output (measurement) half-step. Throws SolverError naming the link on a
/// non-finite intermediate.
void output_step(GampState& state, const Linearization& lin, std::span<const double> y,
                 double tau_w, double damping = 1.0);

/// Input (parameter) half-step: posterior moments of each x_m under the
/// uniform prior restricted to priors[m] intersected with the trust region.
/// Appends to `warnings` when a parameter is not observed by any link.
void input_step(GampState& state, const Linearization& lin, double variance_floor,
                std::vector<std::string>* warnings = nullptr);

struct EstimateReport {
    std::vector<double> eps_hat;
    std::vector<std::vector<double>> trajectory; // x_hat(0), x_hat(1), ...
    double residual_db = 0.0;                    // RMS of y - g(eps_hat)
    double initial_residual_db = 0.0;            // RMS of y - g(x0)
    int iterations_run = 0;
    std::vector<std::string> warnings;
    GampConfig config;
    double wall_ms = 0.0;
};

/// Called after every input step with the state and the linearization in force.
using IterationObserver = std::function<void(const GampState&, const Linearization&)>;

/// Multi-step GAMP with a trust region over successive linearizations.
/// `y` are normalized measurements; every link must be usable.
EstimateReport solve(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                     const GampConfig& config, const IterationObserver& observer = {});

/// JSON text of the report. `with_timing = false` writes wall_ms as 0 so that
/// repeated runs produce identical bytes.
std::string report_to_json_text(const EstimateReport& report, bool with_timing = true);

} // namespace permgamp
