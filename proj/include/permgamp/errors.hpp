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

#include <cstddef>
#include <stdexcept>
#include <string>

namespace permgamp {

/// Malformed input file (bad JSON, wrong field types, missing keys).
class ParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A value parsed fine but violates a domain invariant. The message names the field.
class ValidationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A link that cannot be used for estimation: no unblocked ray, or the
/// summed linear gain fell below the floor at the queried permittivities.
class UnusableLinkError : public std::runtime_error {
public:
    UnusableLinkError(std::size_t link, const std::string& what)
        : std::runtime_error("link " + std::to_string(link) + ": " + what), link_(link) {}

    std::size_t link() const noexcept { return link_; }

private:
    std::size_t link_;
};

/// The estimator hit a non-finite intermediate or a forward-model failure.
class SolverError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace permgamp
