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

#include "permgamp/gamp.hpp"

#include "permgamp/errors.hpp"

#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace permgamp {

namespace {

bool all_finite(std::span<const double> v) {
    return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

double rms_residual(std::span<const double> y, std::span<const double> g) {
    double acc = 0.0;
    for (std::size_t n = 0; n < y.size(); ++n) {
        const double r = y[n] - g[n];
        acc += r * r;
    }
    return y.empty() ? 0.0 : std::sqrt(acc / static_cast<double>(y.size()));
}

void add_warning(std::vector<std::string>* warnings, std::string msg) {
    if (warnings && std::find(warnings->begin(), warnings->end(), msg) == warnings->end()) {
        warnings->push_back(std::move(msg));
    }
}

} // namespace

std::vector<Interval> prior_intervals(const Scenario& scenario) {
    std::vector<Interval> priors;
    priors.reserve(scenario.materials.size());
    for (const auto& mat : scenario.materials) {
        priors.push_back({mat.prior_lo, mat.prior_hi});
    }
    return priors;
}

GampConfig default_config(const Scenario& scenario, double tau_w) {
    GampConfig cfg;
    cfg.tau_w = tau_w;
    return resolve_config(scenario, cfg);
}

GampConfig resolve_config(const Scenario& scenario, GampConfig cfg) {
    const auto priors = prior_intervals(scenario);
    const std::size_t n_mat = priors.size();
    if (cfg.x0.empty()) {
        for (const auto& p : priors) {
            cfg.x0.push_back(0.5 * (p.lo + p.hi));
        }
    }
    if (cfg.delta_tr.empty()) {
        double narrowest = priors.front().width();
        for (const auto& p : priors) {
            narrowest = std::min(narrowest, p.width());
        }
        cfg.delta_tr.push_back(narrowest / 5.0);
    }
    if (cfg.delta_tr.size() == 1 && n_mat > 1) {
        cfg.delta_tr.assign(n_mat, cfg.delta_tr.front());
    }

    if (cfg.k_iter < 1) {
        throw ValidationError("k_iter: must be >= 1");
    }
    if (cfg.k_gamp < 1) {
        throw ValidationError("k_gamp: must be >= 1");
    }
    if (cfg.delta_tr.size() != n_mat) {
        throw ValidationError("delta_tr: expected 1 or " + std::to_string(n_mat) + " values");
    }
    for (double d : cfg.delta_tr) {
        if (!(d > 0.0) || !std::isfinite(d)) {
            throw ValidationError("delta_tr: must be positive");
        }
    }
    if (!(cfg.tau_w >= 0.0) || !std::isfinite(cfg.tau_w)) {
        throw ValidationError("tau_w: must be >= 0");
    }
    if (!(cfg.damping > 0.0 && cfg.damping <= 1.0)) {
        throw ValidationError("damping: must be in (0, 1]");
    }
    if (!(cfg.early_stop_tol >= 0.0)) {
        throw ValidationError("early_stop_tol: must be >= 0");
    }
    if (!(cfg.variance_floor > 0.0)) {
        throw ValidationError("variance_floor: must be positive");
    }
    if (cfg.x0.size() != n_mat) {
        throw ValidationError("x0: expected " + std::to_string(n_mat) + " values");
    }
    for (std::size_t m = 0; m < n_mat; ++m) {
        if (!priors[m].contains(cfg.x0[m])) {
            throw ValidationError("x0[" + std::to_string(m) + "]: outside the prior interval");
        }
    }
    return cfg;
}

std::vector<Interval> trust_region(std::span<const Interval> priors, std::span<const double> center,
                                   std::span<const double> delta_tr) {
    std::vector<Interval> trust(priors.size());
    for (std::size_t m = 0; m < priors.size(); ++m) {
        const double c = clamp_to_interval(center[m], priors[m]);
        const double half = 0.5 * delta_tr[m];
        trust[m] = {std::max(priors[m].lo, c - half), std::min(priors[m].hi, c + half)};
    }
    return trust;
}

GampState init_state(const Scenario& scenario, const GampConfig& config) {
    const auto cfg = resolve_config(scenario, config);
    const std::size_t n_links = scenario.links.size();
    const std::size_t n_mat = scenario.materials.size();

    GampState st;
    st.priors = prior_intervals(scenario);
    st.x_hat = cfg.x0;
    st.prior_var.resize(n_mat);
    for (std::size_t m = 0; m < n_mat; ++m) {
        const double w = st.priors[m].width();
        st.prior_var[m] = w * w / 12.0;
    }
    st.tau_x = st.prior_var;
    st.s_hat.assign(n_links, 0.0);
    st.tau_s.assign(n_links, 0.0);
    st.p_hat.assign(n_links, 0.0);
    st.tau_p.assign(n_links, 0.0);
    st.z_hat.assign(n_links, 0.0);
    st.c_hat = st.x_hat;
    st.tau_c = st.tau_x;
    st.trust = trust_region(st.priors, st.x_hat, cfg.delta_tr);
    return st;
}

void output_step(GampState& st, const Linearization& lin, std::span<const double> y, double tau_w,
                 double damping) {
    const Matrix& a = lin.a_matrix;
    if (a.rows() != y.size() || a.rows() != st.s_hat.size() || a.cols() != st.x_hat.size()) {
        throw std::invalid_argument("output_step: dimension mismatch");
    }
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        double tau_p = 0.0;
        double z = 0.0;
        for (std::size_t m = 0; m < row.size(); ++m) {
            tau_p += row[m] * row[m] * st.tau_x[m];
            z += row[m] * st.x_hat[m];
        }
        const double p = z - tau_p * st.s_hat[i];
        const double s_new = (y[i] - lin.mu[i] - p) / (tau_w + tau_p);
        const double tau_s = 1.0 / (tau_p + tau_w);
        if (!std::isfinite(p) || !std::isfinite(s_new) || !std::isfinite(tau_s)) {
            throw SolverError("output step: non-finite value at link " + std::to_string(i));
        }
        st.tau_p[i] = tau_p;
        st.z_hat[i] = z;
        st.p_hat[i] = p;
        st.s_hat[i] = damping * s_new + (1.0 - damping) * st.s_hat[i];
        st.tau_s[i] = tau_s;
    }
}

void input_step(GampState& st, const Linearization& lin, double variance_floor,
                std::vector<std::string>* warnings) {
    const Matrix& a = lin.a_matrix;
    const std::size_t n_mat = a.cols();
    std::vector<double> precision(n_mat, 0.0);
    std::vector<double> correlation(n_mat, 0.0);
    for (std::size_t i = 0; i < a.rows(); ++i) {
        const auto row = a.row(i);
        for (std::size_t m = 0; m < n_mat; ++m) {
            precision[m] += row[m] * row[m] * st.tau_s[i];
            correlation[m] += row[m] * st.s_hat[i];
        }
    }
    for (std::size_t m = 0; m < n_mat; ++m) {
        if (!(precision[m] > 0.0)) {
            add_warning(warnings, "material " + std::to_string(m + 1) +
                                      " is not observed by any link; estimate held");
            st.tau_x[m] = st.prior_var[m];
            continue;
        }
        st.tau_c[m] = 1.0 / precision[m];
        st.c_hat[m] = st.x_hat[m] + st.tau_c[m] * correlation[m];
        if (!std::isfinite(st.tau_c[m]) || !std::isfinite(st.c_hat[m])) {
            throw SolverError("input step: non-finite value for material " + std::to_string(m + 1));
        }
        const Interval support = intersect(st.priors[m], st.trust[m]);
        const Moments mom = truncated_moments(st.c_hat[m], st.tau_c[m], support);
        st.x_hat[m] = mom.mean;
        st.tau_x[m] = std::max(mom.variance, variance_floor);
    }
}

EstimateReport solve(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                     const GampConfig& config, const IterationObserver& observer) {
    const auto start = std::chrono::steady_clock::now();
    const GampConfig cfg = resolve_config(scenario, config);
    if (y.size() != cache.size() || cache.size() != scenario.links.size()) {
        throw std::invalid_argument("solve: measurements, ray cache and links differ in length");
    }
    const double tau_w = std::max(cfg.tau_w, kTauWFloor);

    EstimateReport report;
    report.config = cfg;
    GampState st = init_state(scenario, cfg);
    report.trajectory.push_back(st.x_hat);

    const auto linearize = [&](std::span<const double> at) {
        try {
            return jacobian(scenario, cache, at, JacobianMethod::analytic);
        } catch (const std::exception& e) {
            throw SolverError(std::string("forward model failed at expansion point: ") + e.what());
        }
    };

    for (int k1 = 0; k1 < cfg.k_iter; ++k1) {
        const Linearization lin = linearize(st.x_hat);
        if (k1 == 0) {
            report.initial_residual_db = rms_residual(y, lin.gain_db);
        }
        st.trust = trust_region(st.priors, st.x_hat, cfg.delta_tr);
        for (int k2 = 0; k2 < cfg.k_gamp; ++k2) {
            const std::vector<double> previous = st.x_hat;
            output_step(st, lin, y, tau_w, cfg.damping);
            input_step(st, lin, cfg.variance_floor, &report.warnings);
            ++st.k;
            if (!all_finite(st.x_hat) || !all_finite(st.tau_x)) {
                throw SolverError("non-finite state at iteration " + std::to_string(st.k));
            }
            report.trajectory.push_back(st.x_hat);
            if (observer) {
                observer(st, lin);
            }
            if (cfg.early_stop_tol > 0.0) {
                double change = 0.0;
                for (std::size_t m = 0; m < previous.size(); ++m) {
                    change = std::max(change, std::abs(st.x_hat[m] - previous[m]));
                }
                if (change < cfg.early_stop_tol) {
                    break;
                }
            }
        }
    }

    report.eps_hat = st.x_hat;
    report.iterations_run = static_cast<int>(st.k);
    try {
        report.residual_db = rms_residual(y, forward(scenario, cache, st.x_hat));
    } catch (const std::exception& e) {
        throw SolverError(std::string("forward model failed at the final estimate: ") + e.what());
    }
    if (cfg.tau_w == 0.0 && report.residual_db > report.initial_residual_db) {
        add_warning(&report.warnings, "final residual exceeds the residual at the initial estimate");
    }
    report.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
    return report;
}

std::string report_to_json_text(const EstimateReport& report, bool with_timing) {
    nlohmann::ordered_json j;
    j["eps_hat"] = report.eps_hat;
    j["residual_db"] = report.residual_db;
    j["initial_residual_db"] = report.initial_residual_db;
    j["iterations_run"] = report.iterations_run;
    j["warnings"] = report.warnings;
    j["trajectory"] = report.trajectory;
    const auto& c = report.config;
    j["config"] = {{"k_iter", c.k_iter},
                   {"k_gamp", c.k_gamp},
                   {"delta_tr", c.delta_tr},
                   {"tau_w", c.tau_w},
                   {"x0", c.x0},
                   {"damping", c.damping},
                   {"early_stop_tol", c.early_stop_tol},
                   {"variance_floor", c.variance_floor}};
    j["wall_ms"] = with_timing ? report.wall_ms : 0.0;
    return j.dump(2) + "\n";
}

} // namespace permgamp
