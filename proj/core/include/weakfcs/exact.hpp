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
 * Exact conditional statistics of the probe after the instantaneous coupling
 * exp(i lambda A q) and post-selection on rho_f.
 *
 * In the q representation the conditional kernel is
 *   rho(q, q'|f) = rho0(q, q') Z^w(lambda q, lambda q') / N,
 * which the grid engine evaluates directly. Gaussian probes additionally have
 * closed forms for every p and q statistic, used unless disabled.
 */

#pragma once

#include <memory>
#include <variant>

#include "weakfcs/hilbert.hpp"
#include "weakfcs/probe.hpp"

namespace weakfcs {

inline constexpr double kZeroPostselectionTol = 1e-14;
inline constexpr double kTailTol = 1e-10;

struct GridOptions {
    /// 0 picks a power of two from the coupling and the probe spreads.
    int n_q = 0;
    /// 0 picks 24 delta_Q around q_bar.
    double span = 0.0;
    /// Use closed-form Gaussian expressions for p and q statistics.
    bool gaussian_closed_form = true;
};

struct MeasurementSetup {
    double lambda = 0.0;
    DensityMatrix rho_i;
    DensityMatrix rho_f;
    SystemObservable A;
    ProbeState probe;
    GridOptions grid;
};

/// Throws InvalidArgument for non-finite lambda and DimMismatch for
/// inconsistent system dimensions.
MeasurementSetup make_setup(double lambda, DensityMatrix rho_i, DensityMatrix rho_f,
                            SystemObservable a, ProbeState probe, GridOptions grid = {});

struct PositionQ {};
struct MomentumP {};

/// Hermitian operator on a probe grid, with its spectrum cached.
class GridObservable {
  public:
    const QGrid &grid() const { return data_->grid; }
    const Matrix &matrix() const { return data_->matrix; }
    const RealVector &eigenvalues() const { return data_->values; }
    const Matrix &eigenvectors() const { return data_->vectors; }

    /// exp(i chi O).
    Matrix exp_i(double chi) const;

  private:
    struct Data {
        QGrid grid;
        Matrix matrix;
        RealVector values;
        Matrix vectors;
    };
    explicit GridObservable(std::shared_ptr<const Data> d) : data_(std::move(d)) {}
    friend GridObservable make_grid_observable(const QGrid &grid, const Matrix &m);

    std::shared_ptr<const Data> data_;
};

/// Throws DimMismatch or NonHermitian.
GridObservable make_grid_observable(const QGrid &grid, const Matrix &m);

/// (omega q^2 + p^2 / omega) / 2 - 1/2 on the grid.
GridObservable harmonic_number_operator(const QGrid &grid, double omega = 1.0);

using ProbeObservable = std::variant<PositionQ, MomentumP, GridObservable>;

/// Grid used by the engine when none is imposed by the probe or observable.
QGrid default_grid(const MeasurementSetup &s);

/// The probe kernel the grid engine works with: the probe's own grid, the
/// observable's grid, or the default grid, in that order of preference.
GridProbe resolve_grid_probe(const MeasurementSetup &s, const ProbeObservable &obs = PositionQ{});

/// N = int dq rho0(q, q) Z^w(lambda q, lambda q).
double normalization(const MeasurementSetup &s);

/// lambda (a_max - a_min) / delta p. Interference between the branches of the
/// probe is appreciable when this is small.
double interference_ratio(const MeasurementSetup &s);

struct ConditionalKernel {
    QGrid grid;
    /// q rep: rho(q_m, q_m'|f) dq; p rep: <p_k|rho(f)|p_k'>.
    Matrix kernel;
    Quadrature rep = Quadrature::Q;
    double normalization = 0.0;
};

/// Throws ZeroPostselection when N vanishes.
ConditionalKernel conditional_probe_state(const MeasurementSetup &s, Quadrature rep);

struct ConditionalDistribution {
    /// Outcome values: grid points for q and p, distinct eigenvalues otherwise.
    RealVector support;
    /// Density for continuous outcomes, probability mass for discrete ones.
    RealVector pdf;
    /// Grid spacing for continuous outcomes, 1 for discrete ones.
    double cell_width = 1.0;
    bool discrete = false;
    double normalization = 0.0;

    RealVector masses() const { return pdf * cell_width; }
    RealVector cumulative() const;
};

/// Unnormalized joint law: pdf holds P(o, f) per unit o and normalization
/// holds N. Never throws ZeroPostselection.
ConditionalDistribution joint_distribution(const MeasurementSetup &s, const ProbeObservable &obs);

ConditionalDistribution conditional_pdf(const MeasurementSetup &s, const ProbeObservable &obs);

/// Z(chi|f) = <exp(i chi o)>_f.
Complex conditional_charfunc(const MeasurementSetup &s, const ProbeObservable &obs, double chi);

/// P(o, f) per outcome cell; the masses sum to N.
RealVector joint_masses(const MeasurementSetup &s, const ProbeObservable &obs);
double joint_prob(const MeasurementSetup &s, const ProbeObservable &obs, int bin);

/// <o^j>_f. Throws GridResolutionInsufficient when the two outermost cells on
/// either side of the grid carry more than kTailTol of the integrand.
double exact_moment(const MeasurementSetup &s, const ProbeObservable &obs, int j);

} // namespace weakfcs
