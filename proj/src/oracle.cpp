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

#include "permgamp/oracle.hpp"

#include "permgamp/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <string>
#include <stdexcept>

namespace permgamp::oracle {

namespace {

double sum_squared_residual(const Scenario& scenario, const RayCache& cache,
                            std::span<const double> y, std::span<const double> eps) {
    double acc = 0.0;
    for (std::size_t n = 0; n < cache.size(); ++n) {
        const double r =
            y[n] - link_gain_db(cache[n], eps, scenario.wavelength_m, scenario.polarization, n);
        acc += r * r;
    }
    return acc;
}

bool inside_priors(const Scenario& scenario, std::span<const double> eps) {
    for (std::size_t m = 0; m < scenario.materials.size(); ++m) {
        const auto& mat = scenario.materials[m];
        if (!(eps[m] >= mat.prior_lo && eps[m] <= mat.prior_hi)) {
            return false;
        }
    }
    return true;
}

struct Best {
    double value = -std::numeric_limits<double>::infinity();
    std::size_t node = std::numeric_limits<std::size_t>::max();

    void offer(double v, std::size_t n) {
        if (v > value || (v == value && n < node)) {
            value = v;
            node = n;
        }
    }
};

struct Integral {
    double value = 0.0;
    double error = 0.0;
};

// 7-point Gauss / 15-point Kronrod pair on [-1, 1].
constexpr double kKronrodX[8] = {0.991455371120812639206854697526329, 0.949107912342758524526189684047851,
                                 0.864864423359769072789712788640926, 0.741531185599394439863864773280788,
                                 0.586087235467691130294144845693013, 0.405845151377397166906606412076961,
                                 0.207784955007898467600689403773245, 0.0};
constexpr double kKronrodW[8] = {0.022935322010529224963732008058970, 0.063092092629978553290700663189204,
                                 0.104790010322250183839876322541518, 0.140653259715525918745189590510238,
                                 0.169004726639267902826583426598550, 0.190350578064785409913256402421014,
                                 0.204432940075298892414161999234649, 0.209482141084727828012999174891714};
constexpr double kGaussW[4] = {0.129484966168869693270611432679082, 0.279705391489276667901467771423780,
                               0.381830050505118944950369775488975, 0.417959183673469387755102040816327};

// Recursive bisection until |K15 - G7| meets the local tolerance. The
// difference is dominated by the G7 error, so the returned K15 value is far
// more accurate than the reported bound.
template <class F>
Integral adaptive_kronrod(const F& f, double a, double b, double tol, int depth) {
    const double mid = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(mid);
    double kronrod = kKronrodW[7] * fc;
    double gauss = kGaussW[3] * fc;
    for (int i = 0; i < 7; ++i) {
        const double dx = half * kKronrodX[i];
        const double pair = f(mid - dx) + f(mid + dx);
        kronrod += kKronrodW[i] * pair;
        if (i % 2 == 1) {
            gauss += kGaussW[i / 2] * pair;
        }
    }
    kronrod *= half;
    gauss *= half;
    const double err = std::abs(kronrod - gauss);
    // Stop at the tolerance, at the rounding limit of the 15-point sum, or at depth 30.
    const double rounding = 64.0 * std::numeric_limits<double>::epsilon() * std::abs(half) * std::abs(fc);
    if (err <= tol || err <= rounding || depth >= 30) {
        return {kronrod, err};
    }
    const auto left = adaptive_kronrod(f, a, mid, 0.5 * tol, depth + 1);
    const auto right = adaptive_kronrod(f, mid, b, 0.5 * tol, depth + 1);
    return {left.value + right.value, left.error + right.error};
}

std::string fmt_sci(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.3g", v);
    return buf;
}

} // namespace

double log_posterior(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                     std::span<const double> eps, double sigma_z) {
    if (eps.size() != scenario.materials.size() || y.size() != cache.size()) {
        throw std::invalid_argument("log_posterior: dimension mismatch");
    }
    if (!inside_priors(scenario, eps)) {
        return -std::numeric_limits<double>::infinity();
    }
    const double var = sigma_z > 0.0 ? sigma_z * sigma_z : 1.0;
    return -sum_squared_residual(scenario, cache, y, eps) / (2.0 * var);
}

std::vector<double> grid_axis(const Interval& prior, double step) {
    if (!(step > 0.0)) {
        throw ValidationError("grid step: must be positive");
    }
    const auto count = static_cast<std::size_t>(std::floor(prior.width() / step + 1e-9)) + 1;
    std::vector<double> axis(count);
    for (std::size_t i = 0; i < count; ++i) {
        axis[i] = std::min(prior.hi, prior.lo + static_cast<double>(i) * step);
    }
    return axis;
}

GridResult grid_map(const Scenario& scenario, const RayCache& cache, std::span<const double> y,
                    double sigma_z, const GridSpec& grid, Exec exec) {
    const std::size_t n_mat = scenario.materials.size();
    std::vector<std::vector<double>> axes;
    double total = 1.0;
    for (const auto& mat : scenario.materials) {
        axes.push_back(grid_axis({mat.prior_lo, mat.prior_hi}, grid.step));
        total *= static_cast<double>(axes.back().size());
    }
    if (total > kMaxGridNodes) {
        throw ValidationError("grid: " + std::to_string(total) + " nodes exceeds the limit");
    }
    const auto nodes = static_cast<std::size_t>(total);

    // Node n decodes with the first material as the most significant digit,
    // so increasing n is lexicographic order of the eps vectors.
    const auto decode = [&](std::size_t n, std::vector<double>& eps) {
        for (std::size_t m = n_mat; m-- > 0;) {
            const std::size_t len = axes[m].size();
            eps[m] = axes[m][n % len];
            n /= len;
        }
    };

    Best best;
    if (exec == Exec::serial) {
        std::vector<double> eps(n_mat);
        for (std::size_t n = 0; n < nodes; ++n) {
            decode(n, eps);
            best.offer(log_posterior(scenario, cache, y, eps, sigma_z), n);
        }
    } else {
        const auto n_nodes = static_cast<long>(nodes);
        std::exception_ptr error;
#pragma omp parallel
        {
            Best local;
            std::vector<double> eps(n_mat);
#pragma omp for schedule(static)
            for (long n = 0; n < n_nodes; ++n) {
                try {
                    decode(static_cast<std::size_t>(n), eps);
                    local.offer(log_posterior(scenario, cache, y, eps, sigma_z),
                                static_cast<std::size_t>(n));
                } catch (...) {
#pragma omp critical(permgamp_grid_error)
                    if (!error) {
                        error = std::current_exception();
                    }
                }
            }
#pragma omp critical(permgamp_grid_reduce)
            best.offer(local.value, local.node);
        }
        if (error) {
            std::rethrow_exception(error);
        }
    }

    GridResult result;
    result.nodes = nodes;
    result.eps.resize(n_mat);
    if (best.node == std::numeric_limits<std::size_t>::max()) {
        throw std::runtime_error("grid_map: no finite log-posterior on the grid");
    }
    decode(best.node, result.eps);
    result.log_posterior = best.value;
    return result;
}

Moments quadrature_moments(double c_hat, double tau_c, const Interval& iv, double abs_tol) {
    if (!(tau_c > 0.0) || !(iv.lo < iv.hi)) {
        throw std::invalid_argument("quadrature_moments: need tau_c > 0 and lo < hi");
    }
    // Work in u = (x - peak) / scale, where peak is the mode of the restricted
    // density and scale its natural width, so the integrand is O(1) near u = 0
    // and the abscissae carry no large offset.
    const double s = std::sqrt(tau_c);
    const double peak = clamp_to_interval(c_hat, iv);
    const double gap = peak - c_hat;
    const double scale = gap != 0.0 ? std::min(s, tau_c / std::abs(gap)) : s;
    const double u_lo = (iv.lo - peak) / scale;
    const double u_hi = (iv.hi - peak) / scale;

    // (x - c)^2 - (peak - c)^2 = scale^2 u^2 + 2 scale gap u.
    const double quad = scale * scale / (2.0 * tau_c);
    const double lin = scale * gap / tau_c;
    const auto weight = [&](double u) { return std::exp(-u * (quad * u + lin)); };

    std::vector<double> cuts{u_lo, u_hi, 0.0};
    for (double d = 1.0; d < u_hi - u_lo; d *= 2.0) {
        cuts.push_back(-d);
        cuts.push_back(d);
    }
    std::erase_if(cuts, [&](double u) { return u < u_lo || u > u_hi; });
    std::sort(cuts.begin(), cuts.end());
    cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

    const auto integrate = [&](const auto& f, double tol) {
        Integral total;
        for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
            const auto piece = adaptive_kronrod(f, cuts[i], cuts[i + 1], tol * (cuts[i + 1] - cuts[i]) /
                                                                             (u_hi - u_lo), 0);
            total.value += piece.value;
            total.error += piece.error;
        }
        return total;
    };

    // The mode sits at u = 0 with weight 1, so Z_u is at least of order
    // min(1, u_hi - u_lo); a rough pass fixes the tolerance scale.
    const double z_rough = integrate(weight, 1e-6).value;
    const double tol = 1e-13 * z_rough;
    const Integral z = integrate(weight, tol);
    const Integral first = integrate([&](double u) { return u * weight(u); }, tol);
    const double mean_u = first.value / z.value;
    const Integral second = integrate(
        [&](double u) {
            const double d = u - mean_u;
            return d * d * weight(u);
        },
        tol);
    const double var_u = second.value / z.value;

    const double mean_err = scale * (first.error + std::abs(mean_u) * z.error) / z.value;
    const double var_err = scale * scale * (second.error + var_u * z.error) / z.value;
    if (!(z.value > 0.0) || mean_err > abs_tol || var_err > abs_tol) {
        throw std::runtime_error("quadrature_moments: error target not met (mean " + fmt_sci(mean_err) +
                                 ", variance " + fmt_sci(var_err) + ")");
    }
    return {peak + scale * mean_u, scale * scale * var_u};
}

} // namespace permgamp::oracle
