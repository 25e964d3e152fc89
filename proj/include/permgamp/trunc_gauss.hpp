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

namespace permgamp {

struct Interval {
    double lo = 0.0;
    double hi = 1.0;

    double width() const { return hi - lo; }
    bool contains(double x) const { return lo <= x && x <= hi; }

    friend bool operator==(const Interval&, const Interval&) = default;
};

/// Intersection of two intervals. The result may be empty (lo > hi).
Interval intersect(const Interval& a, const Interval& b);

double clamp_to_interval(double x, const Interval& interval);

struct Moments {
    double mean = 0.0;
    double variance = 0.0;
};

/// Mean and variance of N(c_hat, tau_c) restricted to `interval`.
///
/// Tail-safe: the result is finite, the mean lies in the interval and the
/// variance is positive for any finite inputs with tau_c > 0 and lo < hi.
/// When the restricted mass is numerically zero the mean sits sqrt(floor)
/// inside the nearest endpoint and the variance equals
/// floor = 1e-12 * width^2.
Moments truncated_moments(double c_hat, double tau_c, const Interval& interval);

/// erfc(x) * exp(x^2), accurate for large positive x where erfc underflows.
double erfcx(double x);

/// Standard normal density and distribution function.
double normal_pdf(double x);
double normal_cdf(double x);

} // namespace permgamp
