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

#include <benchmark/benchmark.h>

#include "weakfcs/mc.hpp"
#include "weakfcs/philox.hpp"
#include "weakfcs/spinhalf.hpp"

namespace {

using namespace weakfcs;

void BM_PhiloxBlock(benchmark::State &state) {
    Philox4x32::Counter c{0, 0, 0, 0};
    const Philox4x32::Key k{0x12345678, 0x9abcdef0};
    for (auto _ : state) {
        c = Philox4x32::block(c, k);
        benchmark::DoNotOptimize(c);
    }
}
BENCHMARK(BM_PhiloxBlock);

// Shots per second of the full protocol, including the joint-table build.
void BM_Ensemble(benchmark::State &state) {
    const SpinSetup spin = coplanar_setup(0.75 * 3.141592653589793, 0.05, pure_gaussian_probe(0.0, 1.0));
    ProtocolConfig p{to_measurement_setup(spin), MomentumP{}, spectral_decompose(spin_component(spin.n_f)),
                     {0.0, 1.0}, state.range(0), 1, 1, 4};
    for (auto _ : state) benchmark::DoNotOptimize(ensemble(p));
    state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Ensemble)->Arg(10000)->Arg(100000)->Unit(benchmark::kMillisecond);

} // namespace

BENCHMARK_MAIN();
