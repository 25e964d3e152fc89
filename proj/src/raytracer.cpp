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

#include "permgamp/raytracer.hpp"

#include "permgamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>

namespace permgamp {

namespace {

constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();

// Parameters of the crossing p + t (q - p) = a + u (b - a); nullopt when parallel.
struct Crossing {
    double t;
    double u;
};

std::optional<Crossing> cross_lines(Vec2 p, Vec2 q, Vec2 a, Vec2 b) {
    const Vec2 r = q - p;
    const Vec2 s = b - a;
    const double denom = cross(r, s);
    if (std::abs(denom) <= 1e-15 * norm(r) * norm(s)) {
        return std::nullopt;
    }
    const Vec2 ap = a - p;
    return Crossing{cross(ap, s) / denom, cross(ap, r) / denom};
}

double incidence_angle(Vec2 from, Vec2 at, const Surface& surf) {
    const Vec2 d = at - from;
    const Vec2 t = surf.b - surf.a;
    const Vec2 n{-t.y, t.x};
    // Angle from the normal: atan2(|tangential|, |normal|) component of the direction.
    return std::atan2(std::abs(dot(d, t)) / norm(t), std::abs(dot(d, n)) / norm(n));
}

class Tracer {
public:
    Tracer(const Scenario& scenario, const Link& link) : scenario_(scenario), link_(link) {}

    std::vector<Ray> run() {
        Ray los;
        los.total_length_m = distance(link_.tx, link_.rx);
        los.vertices = {link_.tx, link_.rx};
        los.blocked = segment_obstructed(scenario_, link_.tx, link_.rx, kNone, kNone);
        rays_.push_back(std::move(los));

        std::vector<std::size_t> seq;
        std::vector<Vec2> images{link_.tx};
        extend(seq, images);

        std::stable_sort(rays_.begin(), rays_.end(), [](const Ray& a, const Ray& b) {
            return a.total_length_m < b.total_length_m;
        });
        return std::move(rays_);
    }

private:
    void extend(std::vector<std::size_t>& seq, std::vector<Vec2>& images) {
        if (static_cast<int>(seq.size()) >= scenario_.max_reflections) {
            return;
        }
        for (std::size_t s = 0; s < scenario_.surfaces.size(); ++s) {
            if (!seq.empty() && seq.back() == s) {
                continue;
            }
            const auto& surf = scenario_.surfaces[s];
            const Vec2 src = images.back();
            const Vec2 dir = surf.b - surf.a;
            if (std::abs(cross(dir, src - surf.a)) <= kGeometryTolerance * norm(dir)) {
                continue; // source image on the mirror line
            }
            seq.push_back(s);
            images.push_back(mirror(src, surf.a, surf.b));
            build(seq, images);
            extend(seq, images);
            images.pop_back();
            seq.pop_back();
        }
    }

    // Back-trace from RX through the image chain and validate the path.
    void build(const std::vector<std::size_t>& seq, const std::vector<Vec2>& images) {
        const std::size_t k = seq.size();
        std::vector<Vec2> points(k);
        Vec2 target = link_.rx;
        for (std::size_t i = k; i-- > 0;) {
            const auto& surf = scenario_.surfaces[seq[i]];
            const auto hit = cross_lines(images[i + 1], target, surf.a, surf.b);
            if (!hit || !(hit->t > 0.0 && hit->t < 1.0) || hit->u < 0.0 || hit->u > 1.0) {
                return;
            }
            points[i] = surf.a + hit->u * (surf.b - surf.a);
            target = points[i];
        }

        Ray ray;
        ray.total_length_m = distance(images[k], link_.rx);
        ray.vertices.reserve(k + 2);
        ray.vertices.push_back(link_.tx);
        ray.vertices.insert(ray.vertices.end(), points.begin(), points.end());
        ray.vertices.push_back(link_.rx);

        for (std::size_t v = 0; v + 1 < ray.vertices.size(); ++v) {
            if (distance(ray.vertices[v], ray.vertices[v + 1]) <= kGeometryTolerance) {
                return;
            }
        }

        for (std::size_t i = 0; i < k; ++i) {
            const auto& surf = scenario_.surfaces[seq[i]];
            const double theta = incidence_angle(ray.vertices[i], ray.vertices[i + 1], surf);
            if (theta >= std::numbers::pi / 2 - kGrazingMargin) {
                return;
            }
            ray.reflections.push_back({surf.material, seq[i], theta});
        }

        for (std::size_t v = 0; v + 1 < ray.vertices.size(); ++v) {
            const std::size_t from = v == 0 ? kNone : seq[v - 1];
            const std::size_t to = v == k ? kNone : seq[v];
            if (segment_obstructed(scenario_, ray.vertices[v], ray.vertices[v + 1], from, to)) {
                ray.blocked = true;
                break;
            }
        }
        rays_.push_back(std::move(ray));
    }

    const Scenario& scenario_;
    const Link& link_;
    std::vector<Ray> rays_;
};

} // namespace

bool segment_obstructed(const Scenario& scenario, Vec2 p, Vec2 q, std::size_t ignore_a,
                        std::size_t ignore_b) {
    const double len = distance(p, q);
    for (std::size_t s = 0; s < scenario.surfaces.size(); ++s) {
        if (s == ignore_a || s == ignore_b) {
            continue;
        }
        const auto& surf = scenario.surfaces[s];
        const auto hit = cross_lines(p, q, surf.a, surf.b);
        if (!hit) {
            continue;
        }
        const double surf_len = distance(surf.a, surf.b);
        const bool inside_path = hit->t * len > kGeometryTolerance && (1.0 - hit->t) * len > kGeometryTolerance;
        const bool on_surface = hit->u * surf_len >= -kGeometryTolerance &&
                                (1.0 - hit->u) * surf_len >= -kGeometryTolerance;
        if (inside_path && on_surface) {
            return true;
        }
    }
    return false;
}

std::vector<Ray> trace_link_all(const Scenario& scenario, std::size_t link_index) {
    if (link_index >= scenario.links.size()) {
        throw ValidationError("link index " + std::to_string(link_index) + " out of range");
    }
    return Tracer(scenario, scenario.links[link_index]).run();
}

std::vector<Ray> trace_link(const Scenario& scenario, std::size_t link_index) {
    auto rays = trace_link_all(scenario, link_index);
    std::erase_if(rays, [](const Ray& r) { return r.blocked; });
    if (rays.empty()) {
        throw UnusableLinkError(link_index, "no unblocked ray");
    }
    return rays;
}

RayCache trace_all(const Scenario& scenario) {
    const auto n_links = static_cast<long>(scenario.links.size());
    RayCache cache(scenario.links.size());
#pragma omp parallel for schedule(dynamic, 8)
    for (long n = 0; n < n_links; ++n) {
        auto rays = trace_link_all(scenario, static_cast<std::size_t>(n));
        std::erase_if(rays, [](const Ray& r) { return r.blocked; });
        cache[static_cast<std::size_t>(n)] = std::move(rays);
    }
    return cache;
}

void write_ray_table(std::ostream& os, const RayCache& cache) {
    os << "link,ray,length_m,n_bounces,materials,angles\n";
    const auto old_precision = os.precision(17);
    for (std::size_t n = 0; n < cache.size(); ++n) {
        for (std::size_t j = 0; j < cache[n].size(); ++j) {
            const auto& ray = cache[n][j];
            os << n << ',' << j << ',' << ray.total_length_m << ',' << ray.num_bounces() << ',';
            for (std::size_t r = 0; r < ray.reflections.size(); ++r) {
                os << (r ? ";" : "") << ray.reflections[r].material;
            }
            os << ',';
            for (std::size_t r = 0; r < ray.reflections.size(); ++r) {
                os << (r ? ";" : "") << ray.reflections[r].incidence_angle;
            }
            os << '\n';
        }
    }
    os.precision(old_precision);
}

} // namespace permgamp
