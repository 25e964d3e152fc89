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
#include "permgamp/scenario.hpp"

#include <iosfwd>
#include <vector>

namespace permgamp {

/// Occlusion tolerance at segment endpoints, meters.
inline constexpr double kGeometryTolerance = 1e-9;

/// Incidence angles at or beyond pi/2 - kGrazingMargin are discarded.
inline constexpr double kGrazingMargin = 1e-9;

struct Reflection {
    int material = 1;           // 1-based material index
    std::size_t surface = 0;    // index into Scenario::surfaces
    double incidence_angle = 0; // radians from the surface normal, in [0, pi/2)
};

struct Ray {
    double total_length_m = 0.0;
    std::vector<Reflection> reflections; // empty for line of sight
    std::vector<Vec2> vertices;          // tx, reflection points..., rx
    bool blocked = false;

    std::size_t num_bounces() const { return reflections.size(); }
};

/// Per-link ray lists, indexed like Scenario::links.
using RayCache = std::vector<std::vector<Ray>>;

/// All unblocked rays of the link up to `max_reflections` bounces, found by
/// the image method and sorted by length. Throws UnusableLinkError when the
/// link has no unblocked ray.
std::vector<Ray> trace_link(const Scenario& scenario, std::size_t link_index);

/// Same enumeration, but blocked candidates are kept and flagged. Never throws
/// for an empty result.
std::vector<Ray> trace_link_all(const Scenario& scenario, std::size_t link_index);

/// trace_link over every link. Links without rays get an empty list.
RayCache trace_all(const Scenario& scenario);

/// True if the open segment p-q crosses any surface other than those in
/// `ignore_a`/`ignore_b` (pass SIZE_MAX for none).
bool segment_obstructed(const Scenario& scenario, Vec2 p, Vec2 q, std::size_t ignore_a,
                        std::size_t ignore_b);

/// CSV dump: link,ray,length_m,n_bounces,materials,angles (materials and
/// angles are ';'-joined, angles in radians).
void write_ray_table(std::ostream& os, const RayCache& cache);

} // namespace permgamp
