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

#include "permgamp/exec.hpp"
#include "permgamp/matrix.hpp"
#include "permgamp/raytracer.hpp"
#include "permgamp/scenario.hpp"

#include <span>
#include <vector>

namespace permgamp {

/// Linear sums below this raise UnusableLinkError instead of returning -inf dB.
inline constexpr double kGainFloor = 1e-30;

/// |Gamma|^2 for a lossless dielectric half-space. Throws std::domain_error for eps < 1.
double fresnel_power_coeff(double eps, double theta, Polarization pol);

/// d|Gamma|^2 / d eps at fixed angle.
double fresnel_power_coeff_deps(double eps, double theta, Polarization pol);

/// Friis free-space factor (lambda / (4 pi d))^2 times the Fresnel factor of every bounce.
/// `eps` is indexed by material slot (material index - 1).
double ray_gain_linear(const Ray& ray, std::span<const double> eps, double wavelength_m,
                       Polarization pol);

/// 10 log10 of the energy sum over rays. `link` only labels the error.
double link_gain_db(std::span<const Ray> rays, std::span<const double> eps, double wavelength_m,
                    Polarization pol, std::size_t link = 0);

/// Noiseless map eps -> link gains in dB.
std::vector<double> forward(const Scenario& scenario, const RayCache& cache,
                            std::span<const double> eps, Exec exec = Exec::parallel);

enum class JacobianMethod { analytic, central_fd };

/// First-order surrogate g(x) ~ A x + mu around `expansion_point`.
struct Linearization {
    Matrix a_matrix; // N x M, dB per unit eps
    std::vector<double> mu;
    std::vector<double> expansion_point;
    std::vector<double> gain_db; // g(expansion_point), kept for residuals
    bool one_sided_fd = false;   // some FD column fell back to a forward difference
};

/// Jacobian of the forward map plus the offset mu = g(x) - A x.
///
/// The analytic route differentiates the log-sum through the product of
/// Fresnel factors. The finite-difference route uses central differences with
/// step `fd_step`, switching to a forward difference for any coordinate whose
/// backward point would cross eps = 1.
Linearization jacobian(const Scenario& scenario, const RayCache& cache,
                       std::span<const double> eps,
                       JacobianMethod method = JacobianMethod::analytic, double fd_step = 1e-6,
                       Exec exec = Exec::parallel);

} // namespace permgamp
