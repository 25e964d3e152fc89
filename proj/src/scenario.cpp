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

#include "permgamp/scenario.hpp"

#include "permgamp/errors.hpp"
#include "permgamp/forward_model.hpp"
#include "permgamp/raytracer.hpp"
#include "permgamp/rng.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace permgamp {

using nlohmann::json;

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::filesystem::filesystem_error("cannot open file", path,
                                                std::make_error_code(std::errc::no_such_file_or_directory));
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw std::filesystem::filesystem_error("cannot write file", path,
                                                std::make_error_code(std::errc::permission_denied));
    }
    out << text;
}

json parse_json(const std::string& text) {
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(e.what());
    }
}

Vec2 point_from_json(const json& j, const std::string& field) {
    if (!j.is_array() || j.size() != 2 || !j[0].is_number() || !j[1].is_number()) {
        throw ParseError(field + ": expected [x, y]");
    }
    return {j[0].get<double>(), j[1].get<double>()};
}

nlohmann::ordered_json point_to_json(Vec2 p) { return nlohmann::ordered_json::array({p.x, p.y}); }

template <class T>
T required(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object() || !obj.contains(key)) {
        throw ParseError(where + ": missing field '" + key + "'");
    }
    try {
        return obj.at(key).get<T>();
    } catch (const json::exception&) {
        throw ParseError(where + "." + key + ": wrong type");
    }
}

template <class T>
T optional_or(const json& obj, const char* key, T fallback, const std::string& where) {
    if (!obj.contains(key)) {
        return fallback;
    }
    return required<T>(obj, key, where);
}

const json& required_array(const json& obj, const char* key) {
    if (!obj.contains(key) || !obj.at(key).is_array()) {
        throw ParseError(std::string("missing array '") + key + "'");
    }
    return obj.at(key);
}

} // namespace

std::size_t Scenario::material_slot(int index) const {
    for (std::size_t m = 0; m < materials.size(); ++m) {
        if (materials[m].index == index) {
            return m;
        }
    }
    throw ValidationError("unknown material index " + std::to_string(index));
}

std::vector<double> Scenario::true_eps() const {
    std::vector<double> eps;
    eps.reserve(materials.size());
    for (const auto& mat : materials) {
        if (!mat.true_eps) {
            throw ValidationError("materials[" + std::to_string(mat.index) + "].true_eps: not set");
        }
        eps.push_back(*mat.true_eps);
    }
    return eps;
}

void validate(const Scenario& s) {
    if (!(s.wavelength_m > 0.0) || !std::isfinite(s.wavelength_m)) {
        throw ValidationError("wavelength_m: must be positive");
    }
    if (s.max_reflections < 0) {
        throw ValidationError("max_reflections: must be >= 0");
    }
    if (s.materials.empty()) {
        throw ValidationError("materials: at least one material required");
    }
    if (s.links.empty()) {
        throw ValidationError("links: at least one link required");
    }
    // Materials are stored in slot order: materials[m].index == m + 1.
    for (std::size_t m = 0; m < s.materials.size(); ++m) {
        const auto& mat = s.materials[m];
        const std::string where = "materials[" + std::to_string(m) + "]";
        if (mat.index != static_cast<int>(m) + 1) {
            throw ValidationError(where + ".index: expected " + std::to_string(m + 1));
        }
        if (!(mat.prior_lo >= 1.0)) {
            throw ValidationError(where + ".prior_lo: must be >= 1");
        }
        if (!(mat.prior_lo < mat.prior_hi) || !std::isfinite(mat.prior_hi)) {
            throw ValidationError(where + ".prior_hi: must exceed prior_lo");
        }
        if (mat.true_eps && !(*mat.true_eps >= mat.prior_lo && *mat.true_eps <= mat.prior_hi)) {
            throw ValidationError(where + ".true_eps: outside [prior_lo, prior_hi]");
        }
    }
    for (std::size_t i = 0; i < s.surfaces.size(); ++i) {
        const auto& surf = s.surfaces[i];
        const std::string where = "surfaces[" + std::to_string(i) + "]";
        if (surf.a == surf.b) {
            throw ValidationError(where + ": endpoints coincide");
        }
        if (surf.material < 1 || surf.material > static_cast<int>(s.materials.size())) {
            throw ValidationError(where + ".material: unknown index " + std::to_string(surf.material));
        }
    }
    for (std::size_t n = 0; n < s.links.size(); ++n) {
        if (s.links[n].tx == s.links[n].rx) {
            throw ValidationError("links[" + std::to_string(n) + "]: tx and rx coincide");
        }
    }
}

void validate(const Dataset& d, const Scenario& s) {
    if (!(d.noise_var >= 0.0)) {
        throw ValidationError("noise_var: must be >= 0");
    }
    if (d.measured_db.size() != s.links.size()) {
        throw ValidationError("measured_db: length " + std::to_string(d.measured_db.size()) +
                              " does not match " + std::to_string(s.links.size()) + " links");
    }
    for (std::size_t n = 0; n < d.measured_db.size(); ++n) {
        if (!std::isfinite(d.measured_db[n])) {
            throw ValidationError("measured_db[" + std::to_string(n) + "]: not finite");
        }
    }
}

Scenario scenario_from_json_text(const std::string& text) {
    const json j = parse_json(text);
    if (!j.is_object()) {
        throw ParseError("scenario: expected a JSON object");
    }
    Scenario s;
    s.wavelength_m = required<double>(j, "wavelength_m", "scenario");
    s.max_reflections = optional_or<int>(j, "max_reflections", 2, "scenario");
    const auto pol = optional_or<std::string>(j, "polarization", "TE", "scenario");
    if (pol == "TE") {
        s.polarization = Polarization::TE;
    } else if (pol == "TM") {
        s.polarization = Polarization::TM;
    } else {
        throw ValidationError("polarization: expected TE or TM");
    }

    for (const auto& jm : required_array(j, "materials")) {
        Material mat;
        mat.index = required<int>(jm, "index", "material");
        mat.prior_lo = required<double>(jm, "prior_lo", "material");
        mat.prior_hi = required<double>(jm, "prior_hi", "material");
        if (jm.contains("true_eps") && !jm.at("true_eps").is_null()) {
            mat.true_eps = required<double>(jm, "true_eps", "material");
        }
        s.materials.push_back(mat);
    }
    std::sort(s.materials.begin(), s.materials.end(),
              [](const Material& a, const Material& b) { return a.index < b.index; });

    if (j.contains("surfaces")) {
        for (const auto& js : required_array(j, "surfaces")) {
            Surface surf;
            surf.a = point_from_json(js.value("a", json()), "surface.a");
            surf.b = point_from_json(js.value("b", json()), "surface.b");
            surf.material = required<int>(js, "material", "surface");
            s.surfaces.push_back(surf);
        }
    }
    for (const auto& jl : required_array(j, "links")) {
        Link link;
        link.tx = point_from_json(jl.value("tx", json()), "link.tx");
        link.rx = point_from_json(jl.value("rx", json()), "link.rx");
        link.p_dbm = optional_or<double>(jl, "p_dbm", 0.0, "link");
        link.g_tx_db = optional_or<double>(jl, "g_tx_db", 0.0, "link");
        link.g_rx_db = optional_or<double>(jl, "g_rx_db", 0.0, "link");
        s.links.push_back(link);
    }
    validate(s);
    return s;
}

std::string scenario_to_json_text(const Scenario& s) {
    nlohmann::ordered_json j;
    j["wavelength_m"] = s.wavelength_m;
    j["max_reflections"] = s.max_reflections;
    j["polarization"] = s.polarization == Polarization::TE ? "TE" : "TM";
    j["materials"] = nlohmann::ordered_json::array();
    for (const auto& mat : s.materials) {
        nlohmann::ordered_json jm = {{"index", mat.index}, {"prior_lo", mat.prior_lo}, {"prior_hi", mat.prior_hi}};
        if (mat.true_eps) {
            jm["true_eps"] = *mat.true_eps;
        }
        j["materials"].push_back(jm);
    }
    j["surfaces"] = nlohmann::ordered_json::array();
    for (const auto& surf : s.surfaces) {
        j["surfaces"].push_back(
            {{"a", point_to_json(surf.a)}, {"b", point_to_json(surf.b)}, {"material", surf.material}});
    }
    j["links"] = nlohmann::ordered_json::array();
    for (const auto& link : s.links) {
        j["links"].push_back({{"tx", point_to_json(link.tx)},
                              {"rx", point_to_json(link.rx)},
                              {"p_dbm", link.p_dbm},
                              {"g_tx_db", link.g_tx_db},
                              {"g_rx_db", link.g_rx_db}});
    }
    return j.dump(2) + "\n";
}

Scenario load_scenario(const std::filesystem::path& path) {
    return scenario_from_json_text(read_file(path));
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path) {
    write_file(path, scenario_to_json_text(scenario));
}

Dataset dataset_from_json_text(const std::string& text) {
    const json j = parse_json(text);
    if (!j.is_object()) {
        throw ParseError("dataset: expected a JSON object");
    }
    Dataset d;
    d.noise_var = required<double>(j, "noise_var", "dataset");
    if (j.contains("seed") && !j.at("seed").is_null()) {
        d.seed = required<std::uint64_t>(j, "seed", "dataset");
    }
    d.measured_db = required<std::vector<double>>(j, "measured_db", "dataset");
    if (!(d.noise_var >= 0.0)) {
        throw ValidationError("noise_var: must be >= 0");
    }
    return d;
}

std::string dataset_to_json_text(const Dataset& d) {
    nlohmann::ordered_json j;
    j["noise_var"] = d.noise_var;
    if (d.seed) {
        j["seed"] = *d.seed;
    }
    j["measured_db"] = d.measured_db;
    return j.dump(2) + "\n";
}

Dataset load_dataset(const std::filesystem::path& path) { return dataset_from_json_text(read_file(path)); }

void save_dataset(const Dataset& dataset, const std::filesystem::path& path) {
    write_file(path, dataset_to_json_text(dataset));
}

Dataset synthesize_dataset(const Scenario& scenario, double sigma_z, std::uint64_t seed) {
    if (!(sigma_z >= 0.0)) {
        throw ValidationError("sigma_z: must be >= 0");
    }
    const auto eps = scenario.true_eps();
    const RayCache cache = trace_all(scenario);
    const auto gains = forward(scenario, cache, eps, Exec::serial);

    Xoshiro256 rng(seed);
    Dataset d;
    d.noise_var = sigma_z * sigma_z;
    d.seed = seed;
    d.measured_db.resize(scenario.links.size());
    for (std::size_t n = 0; n < scenario.links.size(); ++n) {
        const auto& link = scenario.links[n];
        // Known terms are added to the gain first so that normalization with
        // sigma_z = 0 subtracts them in the reverse order.
        const double clean = link.p_dbm + link.g_tx_db + link.g_rx_db + gains[n];
        d.measured_db[n] = sigma_z > 0.0 ? clean + sigma_z * rng.normal() : clean;
    }
    return d;
}

std::vector<double> normalize_measurements(const Scenario& scenario, const Dataset& dataset) {
    if (dataset.measured_db.size() != scenario.links.size()) {
        throw ValidationError("measured_db: length " + std::to_string(dataset.measured_db.size()) +
                              " does not match " + std::to_string(scenario.links.size()) + " links");
    }
    std::vector<double> y(dataset.measured_db.size());
    for (std::size_t n = 0; n < y.size(); ++n) {
        const auto& link = scenario.links[n];
        y[n] = dataset.measured_db[n] - (link.p_dbm + link.g_tx_db + link.g_rx_db);
    }
    return y;
}

Scenario select_links(const Scenario& scenario, std::span<const std::size_t> keep) {
    Scenario out = scenario;
    out.links.clear();
    for (auto n : keep) {
        out.links.push_back(scenario.links.at(n));
    }
    return out;
}

Scenario make_canyon(const CanyonSpec& spec) {
    if (spec.num_materials < 1) {
        throw ValidationError("num_materials: must be >= 1");
    }
    if (spec.num_links < 1) {
        throw ValidationError("num_links: must be >= 1");
    }
    if (!(spec.length_m > 0.0) || !(spec.width_m > 0.0)) {
        throw ValidationError("length_m/width_m: must be positive");
    }
    if (!(spec.prior_lo >= 1.0) || !(spec.prior_hi > spec.prior_lo)) {
        throw ValidationError("prior: need 1 <= prior_lo < prior_hi");
    }
    if (!spec.true_eps.empty() && spec.true_eps.size() != static_cast<std::size_t>(spec.num_materials)) {
        throw ValidationError("true_eps: expected one value per material");
    }

    static constexpr double kDefaultEps[] = {4.0, 7.0, 5.5, 9.0, 3.0, 11.0};

    Scenario s;
    s.wavelength_m = spec.wavelength_m;
    s.max_reflections = spec.max_reflections;
    for (int m = 0; m < spec.num_materials; ++m) {
        Material mat;
        mat.index = m + 1;
        mat.prior_lo = spec.prior_lo;
        mat.prior_hi = spec.prior_hi;
        mat.true_eps = spec.true_eps.empty() ? kDefaultEps[m % std::size(kDefaultEps)]
                                             : spec.true_eps[static_cast<std::size_t>(m)];
        s.materials.push_back(mat);
    }

    if (!spec.free_space) {
        const int per_wall = (spec.num_materials + 1) / 2;
        const double seg = spec.length_m / per_wall;
        int next = 0;
        for (int wall = 0; wall < 2; ++wall) {
            const double y = wall == 0 ? 0.0 : spec.width_m;
            for (int k = 0; k < per_wall; ++k) {
                Surface surf;
                surf.a = {k * seg, y};
                surf.b = {(k + 1) * seg, y};
                surf.material = next % spec.num_materials + 1;
                ++next;
                s.surfaces.push_back(surf);
            }
        }
    }

    Xoshiro256 rng(spec.seed);
    const double x_lo = 0.1 * spec.length_m;
    const double x_hi = 0.9 * spec.length_m;
    const double y_lo = 0.1 * spec.width_m;
    const double y_hi = 0.9 * spec.width_m;
    const double min_sep = std::min(1.0, 0.1 * spec.width_m);
    while (s.links.size() < static_cast<std::size_t>(spec.num_links)) {
        Link link;
        link.tx = {rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
        link.rx = {rng.uniform(x_lo, x_hi), rng.uniform(y_lo, y_hi)};
        if (distance(link.tx, link.rx) < min_sep) {
            continue;
        }
        link.p_dbm = 30.0;
        link.g_tx_db = 3.0;
        link.g_rx_db = 0.0;
        s.links.push_back(link);
    }
    validate(s);
    return s;
}

} // namespace permgamp
