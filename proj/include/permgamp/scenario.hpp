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

#include "permgamp/geometry.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace permgamp {

enum class Polarization { TE, TM };

/// One environment material with a uniform prior on its relative permittivity.
struct Material {
    int index = 1; // 1-based, matches Surface::material
    double prior_lo = 1.0;
    double prior_hi = 2.0;
    std::optional<double> true_eps;

    friend bool operator==(const Material&, const Material&) = default;
};

struct Surface {
    Vec2 a;
    Vec2 b;
    int material = 1;

    friend bool operator==(const Surface&, const Surface&) = default;
};

struct Link {
    Vec2 tx;
    Vec2 rx;
    double p_dbm = 0.0;
    double g_tx_db = 0.0;
    double g_rx_db = 0.0;

    friend bool operator==(const Link&, const Link&) = default;
};

struct Scenario {
    std::vector<Surface> surfaces;
    std::vector<Material> materials;
    std::vector<Link> links;
    double wavelength_m = 0.1;
    int max_reflections = 2;
    Polarization polarization = Polarization::TE;

    std::size_t num_materials() const { return materials.size(); }
    std::size_t num_links() const { return links.size(); }

    /// Zero-based position of the material with the given 1-based index.
    std::size_t material_slot(int index) const;

    /// Ground-truth permittivities in material order. Throws ValidationError if any is unset.
    std::vector<double> true_eps() const;

    friend bool operator==(const Scenario&, const Scenario&) = default;
};

struct Dataset {
    std::vector<double> measured_db;
    double noise_var = 0.0;
    std::optional<std::uint64_t> seed;

    friend bool operator==(const Dataset&, const Dataset&) = default;
};

/// Throws ValidationError naming the offending field.
void validate(const Scenario& scenario);
void validate(const Dataset& dataset, const Scenario& scenario);

Scenario scenario_from_json_text(const std::string& text);
std::string scenario_to_json_text(const Scenario& scenario);
Scenario load_scenario(const std::filesystem::path& path);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

Dataset dataset_from_json_text(const std::string& text);
std::string dataset_to_json_text(const Dataset& dataset);
Dataset load_dataset(const std::filesystem::path& path);
void save_dataset(const Dataset& dataset, const std::filesystem::path& path);

/// Noisy measurements R = P + G_tx + G_rx + link gain(true eps) + z, z ~ N(0, sigma_z^2).
///
/// Rays are traced internally. Throws ValidationError if a material lacks
/// true_eps and UnusableLinkError if a link has no usable ray.
Dataset synthesize_dataset(const Scenario& scenario, double sigma_z, std::uint64_t seed);

/// y_n = R_n - P_n - G_tx,n - G_rx,n.
std::vector<double> normalize_measurements(const Scenario& scenario, const Dataset& dataset);

/// Copy of `scenario` keeping only the listed links, in the given order.
Scenario select_links(const Scenario& scenario, std::span<const std::size_t> keep);

/// Knobs for the built-in scenario templates.
struct CanyonSpec {
    int num_materials = 2;
    int num_links = 100;
    double length_m = 200.0;
    double width_m = 20.0;
    double wavelength_m = 0.1;
    int max_reflections = 2;
    double prior_lo = 1.0;
    double prior_hi = 13.0;
    std::vector<double> true_eps; // empty: built-in defaults
    bool free_space = false;      // no walls; materials are defined but unobserved
    std::uint64_t seed = 1;
};

/// Street canyon: two parallel walls along x, each split into segments that
/// cycle through the materials, with random TX/RX placements inside the canyon.
Scenario make_canyon(const CanyonSpec& spec);

} // namespace permgamp
