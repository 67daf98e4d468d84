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

// Closed forms for a weakly measured spin component A = n . sigma with
// pre- and post-selections rho_{i,f} = (1 + n_{i,f} . sigma) / 2.

#pragma once

#include "weakfcs/exact.hpp"
#include "weakfcs/hilbert.hpp"
#include "weakfcs/probe.hpp"

namespace weakfcs {

struct SpinSetup {
    Vec3 n_i{0.0, 0.0, 1.0};
    Vec3 n_f{0.0, 0.0, 1.0};
    Vec3 n{1.0, 0.0, 0.0};
    double lambda = 0.0;
    GaussianProbe probe;
};

/// Throws InvalidArgument unless |n| = 1 and |n_i|, |n_f| <= 1.
SpinSetup make_spin_setup(const Vec3 &n_i, const Vec3 &n_f, const Vec3 &n, double lambda,
                          const GaussianProbe &probe);

/// Preselection along z, measured component along x, post-selection at angle
/// theta from the preselection in the x-z plane.
SpinSetup coplanar_setup(double theta, double lambda, const GaussianProbe &probe);

MeasurementSetup to_measurement_setup(const SpinSetup &s, GridOptions grid = {});

struct SpinWeakValues {
    double alpha0 = 0.0;
    Complex alpha1;
    double alpha11 = 0.0;
};

SpinWeakValues spin_weak_values(const SpinSetup &s);

/// Exact N for the Gaussian probe of the setup.
double spin_normalization(const SpinSetup &s);

/// P(p|f) on the default grid of the equivalent setup.
ConditionalDistribution spin_pdf(const SpinSetup &s);
/// P(p|f) for an arbitrary probe, on the p points of its grid. Gaussian probes
/// are evaluated in closed form on the default grid.
ConditionalDistribution spin_pdf(const SpinSetup &s, const ProbeState &probe);

/// Exact <p^j>_f, j <= 1000, summed in log space.
double spin_exact_moment(const SpinSetup &s, int j);

/// (<p^j>_f - bar{p^j}) / (j bar{p^j}) for even j >= 2, in log space.
double spin_scaled_moment(const SpinSetup &s, int j);

/// First non-vanishing order in lambda over N2. Throws BeyondValidity when
/// j exceeds n* = (dP / lambda)^2.
double spin_interp_moment(const SpinSetup &s, int j);

struct ScalingPoint {
    double exact = 0.0;
    /// (alpha0 + alpha11) / (4 Delta^2 N), Delta = dP / lambda.
    double predicted = 0.0;
    /// delta p^2 / dP^2, the value reached at orthogonality.
    double plateau = 0.0;
    double n_star = 0.0;
};

/// Throws InvalidArgument for odd j or j < 2.
ScalingPoint universal_scaling(const SpinSetup &s, int j);

} // namespace weakfcs
