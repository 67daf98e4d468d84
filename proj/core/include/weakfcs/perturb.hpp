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

/**
 * @file
 * Second-order expansions in the coupling lambda.
 *
 * Every statistic of an operand F of the probe is written as a ratio of two
 * second-order polynomials in lambda whose coefficients are probe averages of
 * F sandwiched between powers of q, times normal weak values:
 *
 *   num = <F> a0 + lambda [-i<[q,F]> Re a1 + <{q,F}> Im a1]
 *       + lambda^2 [<qFq> a11 - <{q^2,F}> Re a2 / 2 - i<[q^2,F]> Im a2 / 2]
 *
 * and the denominator is the same expression with F = 1. Variants differ in
 * which alpha2 terms they keep:
 *
 *  - Full2ndOrder keeps everything.
 *  - Interpolating drops the alpha2 terms from the denominator, and from the
 *    numerator unless the first-order probe coefficients or <qFq> vanish.
 *  - ABOnly is Interpolating rewritten in A^w, B^w, C^w. It refuses nearly
 *    orthogonal selections.
 *
 * When lambda |q*| max|a| exceeds the large-shift threshold the weak values are
 * taken at the shifted point lambda q* and q is measured from q*.
 */

#pragma once

#include <array>
#include <optional>
#include <vector>

#include "weakfcs/exact.hpp"
#include "weakfcs/weakvalues.hpp"

namespace weakfcs {

enum class ExpansionVariant { Full2ndOrder, Interpolating, ABOnly };
enum class CharfuncForm { Resummed, Strict2nd };

struct PerturbOptions {
    double large_lambda_qstar = 0.2;
    double eps_orth = kOrthTol;
};

struct MomentEstimate {
    double value = 0.0;
    int order_used = 2;
    double validity_n_star = 0.0;
};

/// Where the expansion is carried out.
struct ExpansionPoint {
    bool shifted = false;
    double q_star = 0.0;
    /// Origin of q in the probe averages: q* when shifted, 0 otherwise.
    double q_offset = 0.0;
    WeakValueTable table;
};

ExpansionPoint expansion_point(const MeasurementSetup &s, const PerturbOptions &opts = {});

/// Partial sums S_0 .. S_{n_max} of the lambda series for N. n_max <= 12.
std::vector<double> n_series(const MeasurementSetup &s, int n_max);

struct Denominators {
    double n2 = 0.0;
    double n2_prime = 0.0;
    /// N2'' = N2' / alpha0; absent when alpha0 < eps_orth.
    std::optional<double> n2_ab;
};

Denominators denominators(const MeasurementSetup &s, const PerturbOptions &opts = {});
/// N2'' alone; throws OrthogonalStates when alpha0 < eps_orth.
double ab_denominator(const MeasurementSetup &s, const PerturbOptions &opts = {});

/// Z_Q(chi|f). The Interpolating and ABOnly variants drop Re(alpha2).
Complex charfunc_q(const MeasurementSetup &s, double chi, ExpansionVariant v,
                   const PerturbOptions &opts = {});

/// <p^j>_f for a Gaussian probe. Throws InvalidArgument for other probes and
/// BeyondValidity when j exceeds the validity order.
MomentEstimate moment_p_gaussian(const MeasurementSetup &s, int j, ExpansionVariant v,
                                 const PerturbOptions &opts = {});

/// <p^j>_f at full second order, from quasi-averages of any probe. j <= 8.
MomentEstimate moment_p_general(const MeasurementSetup &s, int j, const PerturbOptions &opts = {});

/// Z_P(chi|f). Resummed keeps the weak values at lambda chi / 2; Strict2nd is
/// the consistent second-order truncation.
Complex charfunc_p(const MeasurementSetup &s, double chi, CharfuncForm form,
                   const PerturbOptions &opts = {});

/// Z_O(chi|f) at full second order.
Complex charfunc_obs(const MeasurementSetup &s, const ProbeObservable &obs, double chi,
                     const PerturbOptions &opts = {});

/// <o>_f.
double expectation_obs(const MeasurementSetup &s, const ProbeObservable &obs, ExpansionVariant v,
                       const PerturbOptions &opts = {});

/// <q e^{i chi o} q>_0 / <q^2>_0. Throws ZeroQVariance when <q^2>_0 vanishes.
Complex orthogonal_limit(const ProbeState &probe, const ProbeObservable &obs, double chi);

/// n* = dP^2 / (lambda max|a|)^2, with dP the momentum spread of the probe.
double validity_order(const MeasurementSetup &s);

/// For moment order j, the largest ratio over k > 2 of
///   C(j,k) l^k X_{j-k}  to  C(j,2) l^2 X_{j-2},   l = lambda max|a|,
/// for X_m = bar{p^m}, bar{q p^m}, bar{q^2 p^m} (quasi-averages). A ratio
/// above one signals that j is past the validity order. NaN when the
/// reference term vanishes.
std::array<double, 3> nstar_diagnostics(const MeasurementSetup &s, int j);

} // namespace weakfcs
