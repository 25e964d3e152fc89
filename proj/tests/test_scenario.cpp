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
#include "permgamp/forward_model.hpp"
#include "permgamp/scenario.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <filesystem>

using namespace permgamp;
using permgamp::testing::canyon_fixture;

namespace {

const char* kMinimal = R"({
  "wavelength_m": 0.3,
  "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 10}],
  "surfaces": [],
  "links": [{"tx": [0, 0], "rx": [5, 0], "p_dbm": 0, "g_tx_db": 0, "g_rx_db": 0}]
})";

} // namespace

TEST_CASE("load: minimal scenario") {
    const auto s = scenario_from_json_text(kMinimal);
    CHECK(s.num_materials() == 1);
    CHECK(s.num_links() == 1);
    CHECK(s.surfaces.empty());
    CHECK(s.max_reflections == 2);
    CHECK(s.polarization == Polarization::TE);
    CHECK_FALSE(s.materials[0].true_eps.has_value());
}

TEST_CASE("load: validation errors name the field") {
    const auto expect_error = [](const std::string& text, const std::string& field) {
        try {
            scenario_from_json_text(text);
            FAIL("expected ValidationError");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find(field) != std::string::npos);
        }
    };
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 5, "prior_hi": 3}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "prior_hi");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 0.5, "prior_hi": 3}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "prior_lo");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3, "true_eps": 4}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "true_eps");
    expect_error(R"({"wavelength_m": -1,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "wavelength_m");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "surfaces": [{"a": [0, 1], "b": [5, 1], "material": 2}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "surfaces[0].material");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "surfaces": [{"a": [1, 1], "b": [1, 1], "material": 1}],
        "links": [{"tx": [0, 0], "rx": [5, 0]}]})",
                 "surfaces[0]");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "links": [{"tx": [2, 2], "rx": [2, 2]}]})",
                 "links[0]");
    expect_error(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "links": []})",
                 "links");
}

TEST_CASE("load: malformed input is a parse error") {
    CHECK_THROWS_AS(scenario_from_json_text("{not json"), ParseError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"materials": []})"), ParseError);
    CHECK_THROWS_AS(scenario_from_json_text(R"({"wavelength_m": 0.3,
        "materials": [{"index": 1, "prior_lo": 1, "prior_hi": 3}],
        "links": [{"tx": [0], "rx": [5, 0]}]})"),
                    ParseError);
}

TEST_CASE("bundled canyon fixture") {
    const auto s = canyon_fixture();
    CHECK(s.num_materials() == 2);
    CHECK(s.num_links() == 100);
    CHECK(s.surfaces.size() == 2);
    // The fixture is the default canyon template.
    CHECK(s == make_canyon(CanyonSpec{}));
}

TEST_CASE("save/load round trip preserves every field") {
    auto s = canyon_fixture();
    s.polarization = Polarization::TM;
    s.materials[1].true_eps.reset();
    s.links[3].p_dbm = 12.345678901234567;
    const auto path = std::filesystem::temp_directory_path() / "permgamp_roundtrip.json";
    save_scenario(s, path);
    CHECK(load_scenario(path) == s);
    std::filesystem::remove(path);

    Dataset d{{-80.123456789012345, -91.5}, 0.25, 17};
    CHECK(dataset_from_json_text(dataset_to_json_text(d)) == d);
    Dataset no_seed{{1.0}, 0.0, std::nullopt};
    CHECK(dataset_from_json_text(dataset_to_json_text(no_seed)) == no_seed);
}

TEST_CASE("load: missing file throws") {
    CHECK_THROWS_AS(load_scenario("/nonexistent/scenario.json"), std::filesystem::filesystem_error);
}

TEST_CASE("synthesize: zero noise reproduces the forward model") {
    const auto s = canyon_fixture();
    const auto d = synthesize_dataset(s, 0.0, 3);
    const auto cache = trace_all(s);
    const auto g = forward(s, cache, s.true_eps(), Exec::serial);
    const auto y = normalize_measurements(s, d);
    CHECK(d.noise_var == 0.0);
    for (std::size_t n = 0; n < y.size(); ++n) {
        // Bit-exact: the known terms are integers and the gains sit in [-128, -32] dB.
        CHECK(y[n] == g[n]);
    }
}

TEST_CASE("synthesize: deterministic under a fixed seed") {
    const auto s = canyon_fixture();
    CHECK(synthesize_dataset(s, 1.5, 42) == synthesize_dataset(s, 1.5, 42));
    CHECK_FALSE(synthesize_dataset(s, 1.5, 42) == synthesize_dataset(s, 1.5, 43));
}

TEST_CASE("synthesize: noise variance matches sigma^2") {
    CanyonSpec spec;
    spec.num_links = 10000;
    const auto s = make_canyon(spec);
    const auto clean = synthesize_dataset(s, 0.0, 5);
    const auto noisy = synthesize_dataset(s, 1.0, 5);
    double mean = 0.0;
    for (std::size_t n = 0; n < clean.measured_db.size(); ++n) {
        mean += noisy.measured_db[n] - clean.measured_db[n];
    }
    mean /= 10000.0;
    double var = 0.0;
    for (std::size_t n = 0; n < clean.measured_db.size(); ++n) {
        const double d = noisy.measured_db[n] - clean.measured_db[n] - mean;
        var += d * d;
    }
    var /= 9999.0;
    CHECK(std::abs(var - 1.0) <= 0.05);
}

TEST_CASE("synthesize: requires ground truth") {
    auto s = canyon_fixture();
    s.materials[0].true_eps.reset();
    CHECK_THROWS_AS(synthesize_dataset(s, 0.5, 1), ValidationError);
}

TEST_CASE("normalize measurements") {
    auto s = scenario_from_json_text(kMinimal);
    Dataset d{{-50.0}, 0.0, std::nullopt};
    CHECK(normalize_measurements(s, d) == std::vector{-50.0});

    s.links[0].p_dbm = 30.0;
    s.links[0].g_tx_db = 3.0;
    s.links[0].g_rx_db = 3.0;
    CHECK(normalize_measurements(s, d) == std::vector{-86.0});

    Dataset wrong{{-50.0, -60.0}, 0.0, std::nullopt};
    CHECK_THROWS_AS(normalize_measurements(s, wrong), ValidationError);

    const auto canyon = canyon_fixture();
    const auto data = synthesize_dataset(canyon, 2.0, 8);
    const auto y = normalize_measurements(canyon, data);
    for (std::size_t n = 0; n < y.size(); ++n) {
        const auto& l = canyon.links[n];
        CHECK(y[n] == data.measured_db[n] - l.p_dbm - l.g_tx_db - l.g_rx_db);
    }
}

TEST_CASE("canyon template knobs") {
    CanyonSpec spec;
    spec.num_materials = 5;
    spec.num_links = 1;
    const auto s = make_canyon(spec);
    CHECK(s.num_materials() == 5);
    CHECK(s.num_links() == 1);
    CHECK(s.surfaces.size() == 6);
    for (const auto& surf : s.surfaces) {
        CHECK(surf.material >= 1);
        CHECK(surf.material <= 5);
    }

    spec.num_materials = 0;
    CHECK_THROWS_AS(make_canyon(spec), ValidationError);

    CanyonSpec open;
    open.free_space = true;
    CHECK(make_canyon(open).surfaces.empty());
}
