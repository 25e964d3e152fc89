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

/// Execution policy for the data-parallel kernels. `serial` is the reference
/// path; `parallel` splits independent rows or grid nodes over OpenMP threads
/// and assembles results in the same order, so both give identical bits.
enum class Exec { serial, parallel };

/// Number of OpenMP threads the parallel kernels will use (1 without OpenMP).
int worker_count();

/// Set the worker count; values < 1 restore the runtime default.
void set_worker_count(int n);

/// Apply PERMGAMP_WORKERS from the environment, if set.
void configure_workers_from_env();

} // namespace permgamp
