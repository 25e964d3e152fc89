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

#include "permgamp/errors.hpp"
#include "permgamp/gamp.hpp"
#include "permgamp/oracle.hpp"
#include "permgamp/rng.hpp"
#include "test_support.hpp"

#include <doctest.h>
#include <nlohmann/json.hpp>

#include <cmath>
#include <limits>

using namespace permgamp;
using permgamp::testing::canyon_fixture;

namespace {

Scenario abstract_problem(std::size_t links, std::vector<Interval> priors) {
    Scenario s;
    for (std::size_t m = 0; m < priors.size(); ++m) {
        s.materials.push_back({static_cast<int>(m + 1), priors[m].lo, priors[m].hi, std::nullopt});
    }
    for (std::size_t n = 0; n < links; ++n) {
        s.links.push_back({{0.0, 0.0}, {1.0, 0.0}, 0.0, 0.0, 0.0});
    }
    return s;
}

Linearization make_lin(Matrix a, std::vector<double> mu) {
    Linearization lin;
    lin.a_matrix = std::move(a);
    lin.mu = std::move(mu);
    return lin;
}

Scenario noiseless_canyon(int materials, int links, std::uint64_t seed, std::vector<double>& y) {
    CanyonSpec spec;
    spec.num_materials = materials;
    spec.num_links = links;
    spec.seed = seed;
    auto s = make_canyon(spec);
    y = normalize_measurements(s, synthesize_dataset(s, 0.0, 1));
    return s;
}

} // namespace

TEST_CASE("config defaults and validation") {
    const auto s = canyon_fixture();
    const auto cfg = resolve_config(s, default_config(s, 0.25));
    CHECK(cfg.x0 == std::vector<double>{7.0, 7.0});
    REQUIRE(cfg.delta_tr.size() == 2);
    CHECK(cfg.delta_tr[0] == doctest::Approx(12.0 / 5.0));
    CHECK(cfg.tau_w == 0.25);

    GampConfig bad = cfg;
    bad.k_iter = 0;
    CHECK_THROWS_AS(resolve_config(s, bad), ValidationError);
    bad = cfg;
    bad.delta_tr = {-1.0};
    CHECK_THROWS_AS(resolve_config(s, bad), ValidationError);
    bad = cfg;
    bad.x0 = {0.5, 7.0};
    CHECK_THROWS_AS(resolve_config(s, bad), ValidationError);
    bad = cfg;
    bad.damping = 1.5;
    CHECK_THROWS_AS(resolve_config(s, bad), ValidationError);
    bad = cfg;
    bad.tau_w = -1.0;
    CHECK_THROWS_AS(resolve_config(s, bad), ValidationError);
}

TEST_CASE("init_state: uniform prior variance and centred trust region") {
    const auto s = abstract_problem(3, {{1.0, 13.0}});
    GampConfig cfg;
    cfg.delta_tr = {2.0};
    const auto st = init_state(s, cfg);
    CHECK(st.x_hat == std::vector<double>{7.0});
    CHECK(st.tau_x[0] == doctest::Approx(12.0));
    CHECK(st.s_hat == std::vector<double>(3, 0.0));
    CHECK(st.trust[0] == Interval{6.0, 8.0});
}

TEST_CASE("trust region clips to the prior") {
    const std::vector<Interval> priors = {{1.0, 13.0}, {1.0, 13.0}};
    const auto tr = trust_region(priors, std::vector<double>{1.5, 12.0}, std::vector<double>{2.0, 4.0});
    CHECK(tr[0] == Interval{1.0, 2.5});
    CHECK(tr[1] == Interval{10.0, 13.0});
}

TEST_CASE("output_step: one-by-one worked example") {
    const auto s = abstract_problem(1, {{0.0, 2.0}});
    GampConfig cfg;
    cfg.delta_tr = {1.0};
    cfg.x0 = {0.0};
    auto st = init_state(s, cfg);
    st.tau_x = {1.0};
    const auto lin = make_lin(Matrix(1, 1, 1.0), {0.0});
    const double y[] = {1.0};
    output_step(st, lin, y, 1.0);
    CHECK(st.tau_p[0] == 1.0);
    CHECK(st.p_hat[0] == 0.0);
    CHECK(st.s_hat[0] == 0.5);
    CHECK(st.tau_s[0] == 0.5);
}

TEST_CASE("output_step: zero matrix leaves p at zero") {
    const auto s = abstract_problem(2, {{1.0, 13.0}});
    auto st = init_state(s, GampConfig{});
    const auto lin = make_lin(Matrix(2, 1, 0.0), {3.0, -1.0});
    const double y[] = {5.0, 2.0};
    output_step(st, lin, y, 0.5);
    CHECK(st.tau_p == std::vector<double>{0.0, 0.0});
    CHECK(st.p_hat == std::vector<double>{0.0, 0.0});
    CHECK(st.s_hat[0] == doctest::Approx(4.0));
    CHECK(st.s_hat[1] == doctest::Approx(6.0));
    CHECK(st.tau_s[0] == doctest::Approx(2.0));
}

TEST_CASE("output and input steps match a plain re-implementation") {
    Xoshiro256 rng(42);
    const std::size_t n = 5;
    const std::size_t m = 2;
    const auto s = abstract_problem(n, {{1.0, 13.0}, {2.0, 9.0}});
    GampConfig cfg;
    cfg.delta_tr = {3.0};
    cfg.x0 = {5.0, 4.0};
    auto st = init_state(s, cfg);
    Matrix a(n, m);
    std::vector<double> mu(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < m; ++j) {
            a(i, j) = rng.uniform(-2.0, 2.0);
        }
        mu[i] = rng.uniform(-60.0, -50.0);
        y[i] = mu[i] + rng.uniform(-5.0, 5.0);
        st.s_hat[i] = rng.uniform(-0.5, 0.5);
    }
    const double tau_w = 0.3;
    const double damp = 0.7;

    // Reference in the original notation.
    double xh[2] = {st.x_hat[0], st.x_hat[1]};
    double tx[2] = {st.tau_x[0], st.tau_x[1]};
    double sh[5];
    double ts[5];
    double ph[5];
    for (std::size_t i = 0; i < n; ++i) {
        const double tp = a(i, 0) * a(i, 0) * tx[0] + a(i, 1) * a(i, 1) * tx[1];
        ph[i] = a(i, 0) * xh[0] + a(i, 1) * xh[1] - tp * st.s_hat[i];
        const double snew = (y[i] - mu[i] - ph[i]) / (tau_w + tp);
        sh[i] = damp * snew + (1 - damp) * st.s_hat[i];
        ts[i] = 1.0 / (tp + tau_w);
    }
    double ch[2];
    double tc[2];
    for (std::size_t j = 0; j < m; ++j) {
        double prec = 0.0;
        double corr = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            prec += a(i, j) * a(i, j) * ts[i];
            corr += a(i, j) * sh[i];
        }
        tc[j] = 1.0 / prec;
        ch[j] = xh[j] + tc[j] * corr;
    }

    const auto lin = make_lin(a, mu);
    output_step(st, lin, y, tau_w, damp);
    for (std::size_t i = 0; i < n; ++i) {
        CHECK(st.p_hat[i] == doctest::Approx(ph[i]).epsilon(1e-13));
        CHECK(st.s_hat[i] == doctest::Approx(sh[i]).epsilon(1e-13));
        CHECK(st.tau_s[i] == doctest::Approx(ts[i]).epsilon(1e-13));
    }
    input_step(st, lin, 1e-12);
    for (std::size_t j = 0; j < m; ++j) {
        CHECK(st.c_hat[j] == doctest::Approx(ch[j]).epsilon(1e-13));
        CHECK(st.tau_c[j] == doctest::Approx(tc[j]).epsilon(1e-13));
        const auto q = oracle::quadrature_moments(ch[j], tc[j], intersect(st.priors[j], st.trust[j]));
        CHECK(st.x_hat[j] == doctest::Approx(q.mean).epsilon(1e-9));
        CHECK(st.tau_x[j] == doctest::Approx(q.variance).epsilon(1e-8));
    }
}

TEST_CASE("input_step: unobserved material is held with a warning") {
    const auto s = abstract_problem(3, {{1.0, 13.0}, {1.0, 13.0}});
    GampConfig cfg;
    cfg.x0 = {4.0, 9.0};
    auto st = init_state(s, cfg);
    Matrix a(3, 2, 0.0);
    a(0, 0) = 1.0;
    a(1, 0) = -0.5;
    a(2, 0) = 2.0;
    const auto lin = make_lin(a, {0.0, 0.0, 0.0});
    const double y[] = {4.5, -2.0, 8.1};
    st.tau_x[1] = 0.1;
    output_step(st, lin, y, 1.0);
    std::vector<std::string> warnings;
    input_step(st, lin, 1e-12, &warnings);
    input_step(st, lin, 1e-12, &warnings);
    CHECK(st.x_hat[1] == 9.0);
    CHECK(st.tau_x[1] == doctest::Approx(12.0));
    REQUIRE(warnings.size() == 1);
    CHECK(warnings[0].find("material 2") != std::string::npos);
}

TEST_CASE("input_step: wide support reduces to the Gaussian pseudo-prior") {
    const auto s = abstract_problem(2, {{-1e6, 1e6}});
    GampConfig cfg;
    cfg.delta_tr = {1e6};
    cfg.x0 = {0.0};
    auto st = init_state(s, cfg);
    Matrix a(2, 1);
    a(0, 0) = 1.0;
    a(1, 0) = 2.0;
    st.tau_x = {0.5};
    const auto lin = make_lin(a, {0.0, 0.0});
    const double y[] = {1.0, 3.0};
    output_step(st, lin, y, 0.1);
    input_step(st, lin, 1e-12);
    CHECK(st.x_hat[0] == doctest::Approx(st.c_hat[0]).epsilon(1e-12));
    CHECK(st.tau_x[0] == doctest::Approx(st.tau_c[0]).epsilon(1e-12));
}

TEST_CASE("fixed point of a linear model is the least-squares solution") {
    Xoshiro256 rng(7);
    const std::size_t n = 50;
    const auto s = abstract_problem(n, {{-1e4, 1e4}, {-1e4, 1e4}});
    GampConfig cfg;
    cfg.delta_tr = {2e4};
    cfg.x0 = {0.0, 0.0};
    auto st = init_state(s, cfg);
    Matrix a(n, 2);
    std::vector<double> mu(n);
    std::vector<double> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        a(i, 0) = rng.normal();
        a(i, 1) = rng.normal();
        mu[i] = rng.uniform(-1.0, 1.0);
        y[i] = mu[i] + 2.0 * a(i, 0) - 3.0 * a(i, 1) + rng.normal();
    }
    // Normal equations for A x = y - mu.
    double g00 = 0, g01 = 0, g11 = 0, b0 = 0, b1 = 0;
    for (std::size_t i = 0; i < n; ++i) {
        g00 += a(i, 0) * a(i, 0);
        g01 += a(i, 0) * a(i, 1);
        g11 += a(i, 1) * a(i, 1);
        b0 += a(i, 0) * (y[i] - mu[i]);
        b1 += a(i, 1) * (y[i] - mu[i]);
    }
    const double det = g00 * g11 - g01 * g01;
    const double ls0 = (g11 * b0 - g01 * b1) / det;
    const double ls1 = (g00 * b1 - g01 * b0) / det;

    const auto lin = make_lin(a, mu);
    for (int it = 0; it < 200; ++it) {
        output_step(st, lin, y, 1.0);
        input_step(st, lin, 1e-12);
    }
    CHECK(st.x_hat[0] == doctest::Approx(ls0).epsilon(1e-6));
    CHECK(st.x_hat[1] == doctest::Approx(ls1).epsilon(1e-6));
}

TEST_CASE("output_step: non-finite input raises SolverError") {
    const auto s = abstract_problem(1, {{1.0, 13.0}});
    auto st = init_state(s, GampConfig{});
    const auto lin = make_lin(Matrix(1, 1, 1.0), {0.0});
    const double y[] = {std::numeric_limits<double>::quiet_NaN()};
    CHECK_THROWS_AS(output_step(st, lin, y, 1.0), SolverError);
}

TEST_CASE("solve: single material recovers the truth from clean data") {
    CanyonSpec spec;
    spec.num_materials = 1;
    spec.num_links = 40;
    spec.true_eps = {6.0};
    const auto s = make_canyon(spec);
    const auto cache = trace_all(s);
    const auto y = normalize_measurements(s, synthesize_dataset(s, 0.0, 1));
    GampConfig cfg;
    cfg.k_iter = 20;
    cfg.k_gamp = 5;
    cfg.delta_tr = {2.0};
    const auto rep = solve(s, cache, y, cfg);
    CHECK(std::abs(rep.eps_hat[0] - 6.0) <= 0.05);
    CHECK(rep.iterations_run == 100);
    CHECK(rep.trajectory.size() == 101);
    CHECK(rep.residual_db < rep.initial_residual_db);
}

TEST_CASE("solve: the truth is a fixed point for clean data") {
    std::vector<double> y;
    const auto s = noiseless_canyon(2, 60, 3, y);
    const auto cache = trace_all(s);
    GampConfig cfg;
    cfg.x0 = s.true_eps();
    cfg.delta_tr = {1.0};
    const auto rep = solve(s, cache, y, cfg);
    for (std::size_t m = 0; m < 2; ++m) {
        CHECK(rep.eps_hat[m] == doctest::Approx(cfg.x0[m]).epsilon(1e-6));
    }
    CHECK(rep.residual_db < 1e-6);
}

TEST_CASE("solve: iterates stay inside prior and trust region") {
    const auto s = canyon_fixture();
    const auto cache = trace_all(s);
    const auto y = normalize_measurements(s, synthesize_dataset(s, 1.0, 9));
    auto cfg = default_config(s, 1.0);
    cfg = resolve_config(s, cfg);
    long calls = 0;
    bool ok = true;
    const auto rep = solve(s, cache, y, cfg, [&](const GampState& st, const Linearization& lin) {
        ++calls;
        for (std::size_t m = 0; m < st.x_hat.size(); ++m) {
            ok = ok && st.trust[m].contains(st.x_hat[m]) && st.priors[m].contains(st.x_hat[m]);
            ok = ok && std::abs(st.x_hat[m] - lin.expansion_point[m]) <= cfg.delta_tr[m] / 2 + 1e-12;
            ok = ok && st.tau_x[m] > 0.0 && std::isfinite(st.tau_x[m]);
        }
    });
    CHECK(ok);
    CHECK(calls == cfg.k_iter * cfg.k_gamp);
    CHECK(rep.iterations_run == calls);
}

TEST_CASE("solve: early stop ends inner loops") {
    const auto s = canyon_fixture();
    const auto cache = trace_all(s);
    const auto y = normalize_measurements(s, synthesize_dataset(s, 0.5, 2));
    auto cfg = resolve_config(s, default_config(s, 0.25));
    cfg.early_stop_tol = 1e-3;
    const auto rep = solve(s, cache, y, cfg);
    CHECK(rep.iterations_run < cfg.k_iter * cfg.k_gamp);
}

TEST_CASE("solve: repeat runs give identical reports") {
    const auto s = canyon_fixture();
    const auto cache = trace_all(s);
    const auto y = normalize_measurements(s, synthesize_dataset(s, 0.5, 4));
    const auto cfg = default_config(s, 0.25);
    const auto a = report_to_json_text(solve(s, cache, y, cfg), false);
    const auto b = report_to_json_text(solve(s, cache, y, cfg), false);
    CHECK(a == b);

    const auto j = nlohmann::json::parse(a);
    CHECK(j["eps_hat"].size() == 2);
    CHECK(j["wall_ms"] == 0.0);
    CHECK(j["config"]["k_iter"] == 20);
    CHECK(j["trajectory"].size() == j["iterations_run"].get<std::size_t>() + 1);
}
