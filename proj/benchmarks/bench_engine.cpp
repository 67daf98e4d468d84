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

#include <numbers>

#include <benchmark/benchmark.h>

#include "weakfcs/exact.hpp"
#include "weakfcs/perturb.hpp"
#include "weakfcs/spinhalf.hpp"
#include "weakfcs/weakvalues.hpp"

namespace {

using namespace weakfcs;

SpinSetup bench_spin() {
    return coplanar_setup(0.9 * std::numbers::pi, 0.05, make_gaussian_probe(0.3, 1.0, 0.7));
}

// Grid engine, P(p|f), against the number of q points.
void BM_ConditionalPdfGrid(benchmark::State &state) {
    GridOptions grid;
    grid.n_q = static_cast<int>(state.range(0));
    grid.gaussian_closed_form = false;
    const MeasurementSetup s = to_measurement_setup(bench_spin(), grid);
    for (auto _ : state) benchmark::DoNotOptimize(conditional_pdf(s, MomentumP{}));
    state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_ConditionalPdfGrid)->RangeMultiplier(2)->Range(64, 1024)->Complexity();

void BM_ConditionalPdfClosedForm(benchmark::State &state) {
    const MeasurementSetup s = to_measurement_setup(bench_spin());
    for (auto _ : state) benchmark::DoNotOptimize(conditional_pdf(s, MomentumP{}));
}
BENCHMARK(BM_ConditionalPdfClosedForm);

void BM_SpinPdf(benchmark::State &state) {
    const SpinSetup s = bench_spin();
    for (auto _ : state) benchmark::DoNotOptimize(spin_pdf(s));
}
BENCHMARK(BM_SpinPdf);

void BM_SpinExactMoment(benchmark::State &state) {
    const SpinSetup s = bench_spin();
    const int j = static_cast<int>(state.range(0));
    for (auto _ : state) benchmark::DoNotOptimize(spin_exact_moment(s, j));
}
BENCHMARK(BM_SpinExactMoment)->Arg(2)->Arg(100)->Arg(400)->Arg(1000);

void BM_WeakValueTable(benchmark::State &state) {
    const int d = static_cast<int>(state.range(0));
    Matrix a = Matrix::Zero(d, d);
    for (int k = 0; k + 1 < d; ++k) a(k, k + 1) = a(k + 1, k) = 1.0;
    Vector psi_i = Vector::Zero(d);
    psi_i(0) = 1.0;
    const Vector psi_f = Vector::Ones(d);
    const DensityMatrix ri = pure_state(psi_i);
    const DensityMatrix rf = pure_state(psi_f);
    const SystemObservable obs = spectral_decompose(a);
    for (auto _ : state) benchmark::DoNotOptimize(weak_value_table(ri, rf, obs, 4));
}
BENCHMARK(BM_WeakValueTable)->Arg(2)->Arg(8)->Arg(32);

void BM_MomentExpansion(benchmark::State &state) {
    const MeasurementSetup s = to_measurement_setup(bench_spin());
    for (auto _ : state) {
        benchmark::DoNotOptimize(moment_p_gaussian(s, 4, ExpansionVariant::Full2ndOrder));
    }
}
BENCHMARK(BM_MomentExpansion);

void BM_ExactCharfuncGridObservable(benchmark::State &state) {
    const MeasurementSetup s = to_measurement_setup(bench_spin());
    const GridObservable h = harmonic_number_operator(default_grid(s), 1.0);
    for (auto _ : state) benchmark::DoNotOptimize(conditional_charfunc(s, h, 0.7));
}
BENCHMARK(BM_ExactCharfuncGridObservable);

} // namespace
