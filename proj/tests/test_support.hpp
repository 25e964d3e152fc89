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

#include "permgamp/scenario.hpp"

#include <filesystem>
#include <string>

namespace permgamp::testing {

inline std::filesystem::path data_path(const std::string& name) {
    return std::filesystem::path(PERMGAMP_DATA_DIR) / name;
}

inline Scenario canyon_fixture() { return load_scenario(data_path("canyon.json")); }

/// One material, one link, optional horizontal wall at y = 0.
inline Scenario single_link(Vec2 tx, Vec2 rx, bool with_wall, double wall_half_length = 1e4) {
    Scenario s;
    s.wavelength_m = 0.3;
    s.max_reflections = 2;
    s.materials.push_back({1, 1.0, 13.0, 6.0});
    if (with_wall) {
        s.surfaces.push_back({{-wall_half_length, 0.0}, {wall_half_length, 0.0}, 1});
    }
    s.links.push_back({tx, rx, 0.0, 0.0, 0.0});
    return s;
}

} // namespace permgamp::testing
