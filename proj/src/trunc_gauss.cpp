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

#include "permgamp/trunc_gauss.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace permgamp {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;
constexpr double kSqrt2OverPi = 0.79788456080286535588; // sqrt(2/pi)

// Exponent variation (in standardized units) below which the closed forms
// lose digits to cancellation and a fixed Gauss-Legendre rule is exact to
// rounding instead.
constexpr double kSmoothVariation = 1.0;

// Beyond this standardized distance the one-sided closed form loses about
// a^4 * 1e-16 relative accuracy in the variance; the exponential limit is
// accurate to 1/a^2 there.
constexpr double kExponentialTail = 1e3;

constexpr std::size_t kLegendreNodes = 24;

struct Legendre {
    std::array<double, kLegendreNodes> x{};
    std::array<double, kLegendreNodes> w{};
};

Legendre make_legendre() {
    Legendre rule;
    constexpr std::size_t n = kLegendreNodes;
    for (std::size_t i = 0; i < n; ++i) {
        double z = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (static_cast<double>(n) + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0;
            double p1 = z;
            for (std::size_t k = 2; k <= n; ++k) {
                const double p2 = ((2.0 * k - 1.0) * z * p1 - (k - 1.0) * p0) / static_cast<double>(k);
                p0 = p1;
                p1 = p2;
            }
            dp = static_cast<double>(n) * (z * p1 - p0) / (z * z - 1.0);
            const double dz = p1 / dp;
            z -= dz;
            if (std::abs(dz) < 1e-16) {
                break;
            }
        }
        rule.x[i] = z;
        rule.w[i] = 2.0 / ((1.0 - z * z) * dp * dp);
    }
    return rule;
}

const Legendre& legendre() {
    static const Legendre rule = make_legendre();
    return rule;
}

// Nearly flat density over the interval: integrate exp(-(v^2)/2) on
// v = mid + half * x, x in [-1, 1], relative to the midpoint.
Moments smooth_moments(const Interval& iv, double mid_std, double half_std) {
    const auto& rule = legendre();
    double z = 0.0;
    double m1 = 0.0;
    double m2 = 0.0;
    for (std::size_t i = 0; i < kLegendreNodes; ++i) {
        const double x = rule.x[i];
        const double f = rule.w[i] * std::exp(-half_std * x * (mid_std + 0.5 * half_std * x));
        z += f;
        m1 += f * x;
        m2 += f * x * x;
    }
    const double ex = m1 / z;
    const double var_x = m2 / z - ex * ex;
    const double half = 0.5 * iv.width();
    return {0.5 * (iv.lo + iv.hi) + half * ex, half * half * var_x};
}

struct Standardized {
    double mean;     // E[v], or E[v - a] for one_sided
    double variance; // Var[v]
};

// Interval [a, b] in standardized coordinates with 0 <= a < b. The mean is
// returned as the offset from a so that callers can anchor it at the
// endpoint without losing the offset to rounding when a is large.
Standardized one_sided(double a, double b) {
    if (a > kExponentialTail) {
        // Density of t = v - a is ~ exp(-a t) on [0, b - a].
        const double w = b - a;
        const double q = std::exp(-a * w);
        const double one_minus_q = -std::expm1(-a * w);
        const double et = 1.0 / a - w * q / one_minus_q;
        const double vt = 1.0 / (a * a) - w * w * q / (one_minus_q * one_minus_q);
        return {et, vt};
    }
    const double decay = std::exp(-0.5 * (b - a) * (b + a));
    const double denom = erfcx(a * kInvSqrt2) - erfcx(b * kInvSqrt2) * decay;
    const double la = kSqrt2OverPi / denom;
    const double lb = la * decay;
    const double m = la - lb;
    return {m - a, 1.0 + a * la - b * lb - m * m};
}

Standardized straddling(double a, double b) {
    const double z = 0.5 * (std::erf(b * kInvSqrt2) - std::erf(a * kInvSqrt2));
    const double la = normal_pdf(a) / z;
    const double lb = normal_pdf(b) / z;
    const double m = la - lb;
    return {m, 1.0 + a * la - b * lb - m * m};
}

Moments fallback(double c_hat, const Interval& iv) {
    const double floor = 1e-12 * iv.width() * iv.width();
    const double offset = std::sqrt(floor);
    double mean;
    if (c_hat >= iv.hi) {
        mean = iv.hi - offset;
    } else if (c_hat <= iv.lo) {
        mean = iv.lo + offset;
    } else {
        mean = c_hat;
    }
    return {mean, floor};
}

} // namespace

Interval intersect(const Interval& a, const Interval& b) {
    return {std::max(a.lo, b.lo), std::min(a.hi, b.hi)};
}

double clamp_to_interval(double x, const Interval& interval) {
    return std::min(interval.hi, std::max(interval.lo, x));
}

double normal_pdf(double x) { return 0.39894228040143267794 * std::exp(-0.5 * x * x); }

double normal_cdf(double x) { return 0.5 * std::erfc(-x * kInvSqrt2); }

double erfcx(double x) {
    if (std::isnan(x)) {
        return x;
    }
    if (x < 0.0) {
        if (x < -26.6) {
            return std::numeric_limits<double>::infinity();
        }
        const double hi = x * x;
        const double lo = std::fma(x, x, -hi);
        return 2.0 * std::exp(hi) * (1.0 + lo) - erfcx(-x);
    }
    if (x < 10.0) {
        // exp(x^2) with x^2 split into hi + lo so the exponent is exact.
        const double hi = x * x;
        const double lo = std::fma(x, x, -hi);
        return std::exp(hi) * (1.0 + lo) * std::erfc(x);
    }
    // Asymptotic series; at x >= 10 forty terms reach double precision.
    const double inv2x2 = 0.5 / (x * x);
    double term = 1.0;
    double sum = 1.0;
    for (int k = 1; k <= 40; ++k) {
        term *= -(2.0 * k - 1.0) * inv2x2;
        sum += term;
        if (std::abs(term) < 1e-17 * std::abs(sum)) {
            break;
        }
    }
    return sum / (x * std::sqrt(std::numbers::pi));
}

Moments truncated_moments(double c_hat, double tau_c, const Interval& iv) {
    const double s = std::sqrt(tau_c);
    const double mid_std = (0.5 * (iv.lo + iv.hi) - c_hat) / s;
    const double half_std = 0.5 * iv.width() / s;
    const double a = (iv.lo - c_hat) / s;
    const double b = (iv.hi - c_hat) / s;

    const bool straddles = a < 0.0 && b > 0.0;
    const double variation = straddles ? 0.5 * std::max(a * a, b * b)
                                       : std::abs(2.0 * mid_std * half_std);

    Moments out;
    if (variation <= kSmoothVariation) {
        out = smooth_moments(iv, mid_std, half_std);
    } else {
        if (straddles) {
            const auto st = straddling(a, b);
            out = {c_hat + s * st.mean, tau_c * st.variance};
        } else if (a >= 0.0) {
            const auto st = one_sided(a, b);
            out = {iv.lo + s * st.mean, tau_c * st.variance};
        } else {
            const auto st = one_sided(-b, -a);
            out = {iv.hi - s * st.mean, tau_c * st.variance};
        }
    }

    if (!std::isfinite(out.mean) || !std::isfinite(out.variance) || !(out.variance > 0.0)) {
        return fallback(c_hat, iv);
    }
    out.mean = clamp_to_interval(out.mean, iv);
    return out;
}

} // namespace permgamp
