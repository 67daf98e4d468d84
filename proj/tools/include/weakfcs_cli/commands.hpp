// Copyright 2026 The weakfcs Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <iosfwd>

#include "weakfcs_cli/config.hpp"

namespace weakfcs::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

const char *version();

/// Writes the artifact of `cfg` (CSV or JSON, by command). `jobs` bounds the
/// worker threads and never changes the output.
void run(const RunConfig &cfg, std::ostream &out, int jobs = 1);

/// Entry point shared by the executable and the tests.
int main_with_args(int argc, const char *const *argv, std::istream &in, std::ostream &out,
                   std::ostream &err);

} // namespace weakfcs::cli
