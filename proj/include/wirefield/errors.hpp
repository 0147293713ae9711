/*
 * Copyright 2026 The Wirefield Authors.
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

#include <stdexcept>
#include <string>

namespace wirefield {

/// Unreadable or unparseable input (missing file, malformed document,
/// header mismatch). CLI exit code 2.
struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Structurally valid input that violates a documented invariant
/// (out-of-range index, duplicate junction, bad config value).
/// CLI exit code 3.
struct InvariantError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace wirefield
