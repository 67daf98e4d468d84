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
 * Initial probe states. Units: hbar = 1, [q, p] = i.
 *
 * A probe is either a parametric Gaussian (Wigner function factorized in q and
 * p, centred at p = 0) or an explicit kernel sampled on a uniform q grid. The
 * grid carries its DFT-conjugate momentum grid: p_k = (k - n/2) dp with
 * dp = 2 pi / (n dq), and <q_m|p_k> = exp(i p_k q_m) / sqrt(n).
 */

#pragma once

#include <span>
#include <variant>
#include <vector>

#include "weakfcs/hilbert.hpp"

namespace weakfcs {

inline constexpr double kEdgeTol = 1e-12;

struct GaussianProbe {
    double q_bar = 0.0;
    double delta_Q = 1.0;
    double delta_P = 0.5;

    /// delta p = 1 / (2 delta_Q): decay scale of the off-diagonal p coherences.
    double coherence_scale() const { return 0.5 / delta_Q; }
};

/// Throws InvalidArgument unless delta_Q, delta_P > 0 and
/// 1/(2 delta_Q) <= delta_P (a physical Wigner function).
GaussianProbe make_gaussian_probe(double q_bar, double delta_Q, double delta_P);

/// Pure (minimum-uncertainty) Gaussian: delta_P = 1/(2 delta_Q).
GaussianProbe pure_gaussian_probe(double q_bar, double delta_Q);

class QGrid {
  public:
    QGrid() = default;
    QGrid(int n, double q_min, double dq);

    /// Symmetric grid about `center`: q_m = center + (m - (n-1)/2) dq, dq = span/n.
    static QGrid centered(int n, double center, double span);

    int size() const noexcept { return n_; }
    double q_min() const noexcept { return q_min_; }
    double dq() const noexcept { return dq_; }
    double span() const noexcept { return n_ * dq_; }
    double q(int m) const noexcept { return q_min_ + m * dq_; }

    double dp() const;
    double p(int k) const { return (k - n_ / 2) * dp(); }

    RealVector q_values() const;
    RealVector p_values() const;

  private:
    int n_ = 0;
    double q_min_ = 0.0;
    double dq_ = 1.0;
};

/// kernel(m, m') = rho0(q_m, q_m') * dq, so the diagonal sums to one.
struct GridProbe {
    QGrid grid;
    Matrix kernel;
};

/// Same state in the momentum basis: kernel(k, k') = <p_k|rho0|p_k'>.
struct PGridProbe {
    QGrid grid;
    Matrix kernel;
};

/// Validates Hermiticity, unit trace, positivity and boundary decay.
GridProbe make_grid_probe(QGrid grid, Matrix kernel);

/// Samples the Gaussian kernel
///   rho0(q, q') = N(((q+q')/2); q_bar, dQ^2) exp(-dP^2 (q-q')^2 / 2)
/// on a grid centred at q_bar. n_q must be a power of two >= 64.
/// Throws SpanTooSmall when the kernel does not decay to kEdgeTol at the edges
/// and GridResolutionInsufficient when the momentum grid cannot hold it.
GridProbe to_grid(const GaussianProbe &probe, int n_q, double span);

/// Same sampling on an explicit grid, with the same decay checks.
GridProbe sample_on_grid(const GaussianProbe &probe, const QGrid &grid);

/// Convex mixture of Gaussian kernels on a common grid.
GridProbe gaussian_mixture_grid(const QGrid &grid, std::span<const double> weights,
                                std::span<const GaussianProbe> components);

/// Unitary DFT matrix U(k, m) = exp(-i p_k q_m) / sqrt(n).
Matrix dft_matrix(const QGrid &grid);

PGridProbe p_representation(const GridProbe &probe);
GridProbe q_representation(const PGridProbe &probe);

/// <p_k|M|p_k> for every momentum grid point, in O(n^2).
Vector p_diagonal(const QGrid &grid, const Matrix &m);

/// Continuous-p density (dq / 2 pi) sum_{m,m'} exp(-i p (q_m - q_m')) M(m, m'),
/// valid off the DFT grid.
Complex p_density_at(const QGrid &grid, const Matrix &m, double p);

/// f(p) = exp(i chi p) * sum_m c_m p^m. Closed under differentiation, which is
/// what the Weyl-ordering identities in the expansions need.
class MomentumFunction {
  public:
    static MomentumFunction power(int m);
    static MomentumFunction plane_wave(double chi);
    static MomentumFunction plane_wave_power(double chi, int m);

    Complex operator()(double p) const;
    MomentumFunction derivative() const;
    MomentumFunction operator*(Complex s) const;
    MomentumFunction operator+(const MomentumFunction &o) const;

    double chi() const noexcept { return chi_; }
    const std::vector<Complex> &coefficients() const noexcept { return coeffs_; }

  private:
    std::vector<Complex> coeffs_;
    double chi_ = 0.0;
};

/// f(p-hat) represented on a grid: U^dagger diag(f(p_k)) U.
Matrix momentum_operator(const QGrid &grid, const MomentumFunction &f);
/// Diagonal position operator on the grid.
Matrix position_operator(const QGrid &grid);

using ProbeState = std::variant<GaussianProbe, GridProbe>;

/// Analytic function of p, or an explicit f(p-hat) matrix on the probe grid.
using MomentumOperand = std::variant<MomentumFunction, Matrix>;

/// Symmetric-ordered average
///   bar{f(p) (q - q_offset)^j} = 2^-j sum_k C(j,k) Tr{q'^(j-k) f(p) q'^k rho0}.
/// j <= 8. A matrix operand with a Gaussian probe is UnsupportedFunction.
Complex quasi_average(const ProbeState &probe, const MomentumOperand &f, int j,
                      double q_offset = 0.0);

enum class Quadrature { Q, P };

/// which = Q: bar{(q - q_offset)^n exp(i chi q)} (proper average).
/// which = P: bar{(q - q_offset)^n exp(i chi p)} (quasi-average).
Complex initial_charfunc(const ProbeState &probe, Quadrature which, double chi, int weight_power,
                         double q_offset = 0.0);

/// E[x^n exp(i kappa x)] for x ~ N(mean, sigma^2).
Complex gaussian_power_charfunc(double mean, double sigma, double kappa, int n);

/// E[X^j] for X ~ N(0, sigma^2).
double gaussian_moment(double sigma, int j);
/// log E[X^j] for even j; stable up to j in the thousands.
double log_gaussian_even_moment(double sigma, int j);

/// bar{(q - offset)^n}.
double q_moment(const ProbeState &probe, int n, double offset = 0.0);
/// bar{p^n}, from the probe's momentum marginal.
double p_moment(const ProbeState &probe, int n);
/// Location of the maximum of rho0(q, q): q_bar for a Gaussian.
double q_star(const ProbeState &probe);
/// Momentum spread sqrt(bar{p^2} - bar{p}^2).
double p_spread(const ProbeState &probe);

} // namespace weakfcs
