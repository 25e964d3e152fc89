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

// Serial vs OpenMP timings for the hot kernels on the bundled canyon.

#include "permgamp/exec.hpp"
#include "permgamp/experiment.hpp"
#include "permgamp/forward_model.hpp"
#include "permgamp/oracle.hpp"

#include <benchmark/benchmark.h>

#include <filesystem>

using namespace permgamp;

namespace {

const PreparedScenario& canyon() {
    static const PreparedScenario prep = [] {
        CanyonSpec spec;
        spec.num_links = 400;
        spec.max_reflections = 3;
        return prepare(make_canyon(spec));
    }();
    return prep;
}

Exec exec_of(const benchmark::State& state) { return state.range(0) ? Exec::parallel : Exec::serial; }

void BM_Trace(benchmark::State& state) {
    CanyonSpec spec;
    spec.num_links = 400;
    spec.max_reflections = 3;
    const auto s = make_canyon(spec);
    for (auto _ : state) {
        benchmark::DoNotOptimize(trace_all(s));
    }
}

void BM_Forward(benchmark::State& state) {
    const auto& p = canyon();
    const std::vector<double> eps = {4.0, 7.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(forward(p.scenario, p.cache, eps, exec_of(state)));
    }
}

void BM_Jacobian(benchmark::State& state) {
    const auto& p = canyon();
    const std::vector<double> eps = {4.0, 7.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(jacobian(p.scenario, p.cache, eps, JacobianMethod::analytic, 1e-6, exec_of(state)));
    }
}

void BM_JacobianFD(benchmark::State& state) {
    const auto& p = canyon();
    const std::vector<double> eps = {4.0, 7.0};
    for (auto _ : state) {
        benchmark::DoNotOptimize(jacobian(p.scenario, p.cache, eps, JacobianMethod::central_fd, 1e-6, exec_of(state)));
    }
}

void BM_GridMap(benchmark::State& state) {
    const auto& p = canyon();
    const std::vector<double> eps = {4.0, 7.0};
    const auto y = forward(p.scenario, p.cache, eps, Exec::serial);
    for (auto _ : state) {
        benchmark::DoNotOptimize(oracle::grid_map(p.scenario, p.cache, y, 1.0, oracle::GridSpec{0.2}, exec_of(state)));
    }
}

} // namespace

BENCHMARK(BM_Trace)->Unit(benchmark::kMillisecond);
BENCHMARK(BM_Forward)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_Jacobian)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_JacobianFD)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMicrosecond);
BENCHMARK(BM_GridMap)->Arg(0)->Arg(1)->ArgName("parallel")->Unit(benchmark::kMillisecond);

int main(int argc, char** argv) {
    configure_workers_from_env();
    benchmark::Initialize(&argc, argv);
    if (benchmark::ReportUnrecognizedArguments(argc, argv)) {
        return 1;
    }
    benchmark::AddCustomContext("workers", std::to_string(worker_count()));
    benchmark::RunSpecifiedBenchmarks();
    benchmark::Shutdown();
    return 0;
}
