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

// Philox4x32-10 counter-based generator (Salmon et al., SC'11).

#pragma once

#include <array>
#include <cstdint>

namespace weakfcs {

class Philox4x32 {
  public:
    using Counter = std::array<std::uint32_t, 4>;
    using Key = std::array<std::uint32_t, 2>;

    /// One block of 10 rounds.
    static Counter block(Counter ctr, Key key);

    /// Stream `stream` of a 64-bit seed: key = seed, counter = (0, 0, stream).
    Philox4x32(std::uint64_t seed, std::uint64_t stream);

    /// Next 64 random bits. Each block yields two.
    std::uint64_t next_u64();
    /// Uniform in [0, 1) with 53 random bits.
    double next_double();

  private:
    Counter ctr_{};
    Key key_{};
    Counter out_{};
    int used_ = 4;
};

} // namespace weakfcs
