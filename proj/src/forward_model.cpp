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

#include "permgamp/forward_model.hpp"

#include "permgamp/errors.hpp"

#include <cmath>
#include <exception>
#include <numbers>
#include <stdexcept>

namespace permgamp {

namespace {

constexpr double kDbPerNeper = 10.0 / std::numbers::ln10;

double friis(double wavelength_m, double length_m) {
    const double r = wavelength_m / (4.0 * std::numbers::pi * length_m);
    return r * r;
}

struct Reflectance {
    double gamma;  // amplitude coefficient
    double dgamma; // d gamma / d eps
};

Reflectance reflectance(double eps, double theta, Polarization pol) {
    const double c = std::cos(theta);
    const double s = std::sin(theta);
    const double root = std::sqrt(eps - s * s);
    const double droot = 0.5 / root;
    if (pol == Polarization::TE) {
        const double den = c + root;
        return {(c - root) / den, -2.0 * c * droot / (den * den)};
    }
    const double num = eps * c - root;
    const double den = eps * c + root;
    const double dnum = c - droot;
    const double dden = c + droot;
    return {num / den, (dnum * den - num * dden) / (den * den)};
}

void check_eps(double eps) {
    if (!(eps >= 1.0)) {
        throw std::domain_error("relative permittivity must be >= 1, got " + std::to_string(eps));
    }
}

// Linear gain of one ray and, optionally, its gradient with respect to eps
// (accumulated into `grad`, indexed by material slot).
double ray_gain_with_grad(const Ray& ray, std::span<const double> eps, double wavelength_m,
                          Polarization pol, std::span<double> grad) {
    const double free_space = friis(wavelength_m, ray.total_length_m);
    const std::size_t k = ray.reflections.size();
    if (k == 0) {
        return free_space;
    }
    // Up to max_reflections factors; the product rule is evaluated without
    // dividing by any factor so that |Gamma|^2 = 0 at eps = 1 stays exact.
    double power[16];
    double dpower[16];
    if (k > 16) {
        throw std::length_error("ray has more than 16 reflections");
    }
    double total = free_space;
    for (std::size_t r = 0; r < k; ++r) {
        const auto& refl = ray.reflections[r];
        const double e = eps[static_cast<std::size_t>(refl.material - 1)];
        check_eps(e);
        const auto rc = reflectance(e, refl.incidence_angle, pol);
        power[r] = rc.gamma * rc.gamma;
        dpower[r] = 2.0 * rc.gamma * rc.dgamma;
        total *= power[r];
    }
    if (!grad.empty()) {
        for (std::size_t r = 0; r < k; ++r) {
            double term = free_space * dpower[r];
            for (std::size_t q = 0; q < k; ++q) {
                if (q != r) {
                    term *= power[q];
                }
            }
            grad[static_cast<std::size_t>(ray.reflections[r].material - 1)] += term;
        }
    }
    return total;
}

double link_sum(std::span<const Ray> rays, std::span<const double> eps, double wavelength_m,
                Polarization pol, std::size_t link, std::span<double> grad) {
    if (rays.empty()) {
        throw UnusableLinkError(link, "no rays");
    }
    double sum = 0.0;
    for (const auto& ray : rays) {
        sum += ray_gain_with_grad(ray, eps, wavelength_m, pol, grad);
    }
    if (!(sum >= kGainFloor)) {
        throw UnusableLinkError(link, "total gain below floor");
    }
    return sum;
}

} // namespace

double fresnel_power_coeff(double eps, double theta, Polarization pol) {
    check_eps(eps);
    const double g = reflectance(eps, theta, pol).gamma;
    return g * g;
}

double fresnel_power_coeff_deps(double eps, double theta, Polarization pol) {
    check_eps(eps);
    const auto rc = reflectance(eps, theta, pol);
    return 2.0 * rc.gamma * rc.dgamma;
}

double ray_gain_linear(const Ray& ray, std::span<const double> eps, double wavelength_m,
                       Polarization pol) {
    return ray_gain_with_grad(ray, eps, wavelength_m, pol, {});
}

double link_gain_db(std::span<const Ray> rays, std::span<const double> eps, double wavelength_m,
                    Polarization pol, std::size_t link) {
    return 10.0 * std::log10(link_sum(rays, eps, wavelength_m, pol, link, {}));
}

std::vector<double> forward(const Scenario& scenario, const RayCache& cache,
                            std::span<const double> eps, Exec exec) {
    const auto n_links = static_cast<long>(cache.size());
    std::vector<double> out(cache.size());
    const auto eval = [&](long n) {
        const auto i = static_cast<std::size_t>(n);
        out[i] = link_gain_db(cache[i], eps, scenario.wavelength_m, scenario.polarization, i);
    };
    if (exec == Exec::serial) {
        for (long n = 0; n < n_links; ++n) {
            eval(n);
        }
        return out;
    }
    // Exceptions may not leave an OpenMP region; the first failing link is rethrown.
    std::exception_ptr error;
    long error_link = n_links;
#pragma omp parallel for schedule(static)
    for (long n = 0; n < n_links; ++n) {
        try {
            eval(n);
        } catch (...) {
#pragma omp critical(permgamp_forward_error)
            if (n < error_link) {
                error_link = n;
                error = std::current_exception();
            }
        }
    }
    if (error) {
        std::rethrow_exception(error);
    }
    return out;
}

Linearization jacobian(const Scenario& scenario, const RayCache& cache, std::span<const double> eps,
                       JacobianMethod method, double fd_step, Exec exec) {
    const std::size_t n_links = cache.size();
    const std::size_t n_mat = eps.size();
    for (double e : eps) {
        check_eps(e);
    }

    Linearization lin;
    lin.expansion_point.assign(eps.begin(), eps.end());
    lin.a_matrix = Matrix(n_links, n_mat);
    lin.mu.resize(n_links);

    if (method == JacobianMethod::analytic) {
        lin.gain_db.resize(n_links);
        std::exception_ptr error;
        long error_link = static_cast<long>(n_links);
        const auto row = [&](long n) {
            const auto i = static_cast<std::size_t>(n);
            auto grad = lin.a_matrix.row(i);
            const double sum =
                link_sum(cache[i], eps, scenario.wavelength_m, scenario.polarization, i, grad);
            lin.gain_db[i] = 10.0 * std::log10(sum);
            for (auto& g : grad) {
                g *= kDbPerNeper / sum;
            }
        };
        const auto n_rows = static_cast<long>(n_links);
        if (exec == Exec::serial) {
            for (long n = 0; n < n_rows; ++n) {
                row(n);
            }
        } else {
#pragma omp parallel for schedule(static)
            for (long n = 0; n < n_rows; ++n) {
                try {
                    row(n);
                } catch (...) {
#pragma omp critical(permgamp_jacobian_error)
                    if (n < error_link) {
                        error_link = n;
                        error = std::current_exception();
                    }
                }
            }
            if (error) {
                std::rethrow_exception(error);
            }
        }
    } else {
        if (!(fd_step > 0.0)) {
            throw std::invalid_argument("fd_step must be positive");
        }
        lin.gain_db = forward(scenario, cache, eps, exec);
        std::vector<double> probe(eps.begin(), eps.end());
        for (std::size_t m = 0; m < n_mat; ++m) {
            const double center = eps[m];
            probe[m] = center + fd_step;
            const auto plus = forward(scenario, cache, probe, exec);
            const bool one_sided = center - fd_step < 1.0;
            std::vector<double> minus;
            if (one_sided) {
                lin.one_sided_fd = true;
            } else {
                probe[m] = center - fd_step;
                minus = forward(scenario, cache, probe, exec);
            }
            probe[m] = center;
            for (std::size_t n = 0; n < n_links; ++n) {
                lin.a_matrix(n, m) = one_sided ? (plus[n] - lin.gain_db[n]) / fd_step
                                               : (plus[n] - minus[n]) / (2.0 * fd_step);
            }
        }
    }

    for (std::size_t n = 0; n < n_links; ++n) {
        double ax = 0.0;
        for (std::size_t m = 0; m < n_mat; ++m) {
            ax += lin.a_matrix(n, m) * eps[m];
        }
        lin.mu[n] = lin.gain_db[n] - ax;
    }
    return lin;
}

} // namespace permgamp
