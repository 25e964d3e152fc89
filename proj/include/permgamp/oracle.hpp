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
#include "permgamp/forward_model.hpp"
#include "permgamp/trunc_gauss.hpp"

#include <limits>
#include <span>
#include <vector>

namespace permgamp::oracle {

/// Upper bound on the number of grid nodes grid_map will evaluate.
inline constexpr double kMaxGridNodes = 1e7;

/// Log-posterior up to a constant: uniform prior on each [a_m, b_m] plus an
/// i.i.d. Gaussian likelihood. Returns -infinity outside the prior support.
/// sigma_z <= 0 is treated as 1 (the argmax does not depend on it).
double log_posterior(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                     std::span<const double> eps, double sigma_z);

struct GridSpec {
    double step = 0.05;
};

/// Grid nodes lo, lo + step, ... up to hi for one prior.
std::vector<double> grid_axis(const Interval& prior, double step);

struct GridResult {
    std::vector<double> eps;
    double log_posterior = -std::numeric_limits<double>::infinity();
    std::size_t nodes = 0;
};

/// Exhaustive argmax over the Cartesian grid of the priors. Ties go to the
/// lexicographically smallest node. Throws ValidationError when the grid
/// exceeds kMaxGridNodes.
GridResult grid_map(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                    double sigma_z, const GridSpec& grid = {}, Exec exec = Exec::parallel);

/// Truncated-Gaussian moments by adaptive Gauss-Kronrod quadrature of the
/// defining integrals. Throws std::runtime_error if the error target is missed.
Moments quadrature_moments(double c_hat, double tau_c, const Interval& interval,
                           double abs_tol = 1e-11);

} // namespace permgamp::oracle
