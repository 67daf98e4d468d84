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

#include "weakfcs/probe.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "test_util.hpp"

namespace weakfcs {
namespace {

constexpr double kPi = std::numbers::pi;

TEST(GaussianProbe, ValidatesUncertainty) {
    EXPECT_NO_THROW(make_gaussian_probe(0.0, 1.0, 0.5));
    EXPECT_WEAKFCS_ERROR(make_gaussian_probe(0.0, 1.0, 0.4), ErrorCode::InvalidArgument);
    EXPECT_WEAKFCS_ERROR(make_gaussian_probe(0.0, -1.0, 1.0), ErrorCode::InvalidArgument);
    const GaussianProbe g = pure_gaussian_probe(0.3, 2.0);
    EXPECT_DOUBLE_EQ(g.delta_P, 0.25);
    EXPECT_DOUBLE_EQ(g.coherence_scale(), 0.25);
}

TEST(QGrid, ConjugateMomentumGrid) {
    const QGrid grid = QGrid::centered(64, 1.0, 16.0);
    EXPECT_DOUBLE_EQ(grid.dq(), 0.25);
    EXPECT_NEAR(0.5 * (grid.q(31) + grid.q(32)), 1.0, 1e-14);
    EXPECT_NEAR(grid.dp(), 2.0 * kPi / 16.0, 1e-14);
    EXPECT_NEAR(grid.p(32), 0.0, 0.0);
    EXPECT_NEAR(grid.p(0), -32.0 * grid.dp(), 1e-12);
}

TEST(GridProbe, GaussianSamplingIsNormalized) {
    const GaussianProbe g = make_gaussian_probe(0.5, 1.0, 0.8);
    const GridProbe gp = to_grid(g, 256, 24.0);
    EXPECT_NEAR(gp.kernel.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(q_moment(gp, 1), 0.5, 1e-10);
    EXPECT_NEAR(q_moment(gp, 2, 0.5), 1.0, 1e-10);
    EXPECT_NEAR(p_moment(gp, 2), 0.64, 1e-10);
    EXPECT_NEAR(p_spread(gp), 0.8, 1e-10);
    EXPECT_NEAR(q_star(gp), 0.5, 0.5 * gp.grid.dq());
}

TEST(GridProbe, DetectsTruncation) {
    const GaussianProbe g = pure_gaussian_probe(0.0, 1.0);
    EXPECT_WEAKFCS_ERROR(to_grid(g, 256, 6.0), ErrorCode::SpanTooSmall);
    EXPECT_WEAKFCS_ERROR(to_grid(g, 100, 24.0), ErrorCode::InvalidArgument);
}

TEST(GridProbe, MomentumRepresentationRoundTrip) {
    const GridProbe gp = to_grid(make_gaussian_probe(-0.4, 0.7, 1.1), 128, 20.0);
    const PGridProbe pp = p_representation(gp);
    EXPECT_NEAR(pp.kernel.trace().real(), 1.0, 1e-12);
    EXPECT_LT((q_representation(pp).kernel - gp.kernel).norm(), 1e-12);
    const Vector diag = p_diagonal(gp.grid, gp.kernel);
    EXPECT_LT((diag - pp.kernel.diagonal()).norm(), 1e-12);
    // Off-grid density agrees with the DFT diagonal at grid points.
    const int k = gp.grid.size() / 2 + 3;
    EXPECT_NEAR(p_density_at(gp.grid, gp.kernel, gp.grid.p(k)).real(),
                diag(k).real() / gp.grid.dp(), 1e-10);
}

TEST(GridProbe, MixtureIsConvex) {
    const QGrid grid = QGrid::centered(256, 0.0, 40.0);
    const std::vector<double> w{0.25, 0.75};
    const std::vector<GaussianProbe> parts{pure_gaussian_probe(-2.0, 1.0),
                                           make_gaussian_probe(1.0, 1.5, 0.6)};
    const GridProbe mix = gaussian_mixture_grid(grid, w, parts);
    EXPECT_NEAR(mix.kernel.trace().real(), 1.0, 1e-12);
    EXPECT_NEAR(q_moment(mix, 1), 0.25 * -2.0 + 0.75 * 1.0, 1e-10);
    EXPECT_NEAR(p_moment(mix, 2), 0.25 * 0.25 + 0.75 * 0.36, 1e-10);
}

TEST(GaussianMoments, ClosedForms) {
    EXPECT_DOUBLE_EQ(gaussian_moment(2.0, 0), 1.0);
    EXPECT_DOUBLE_EQ(gaussian_moment(2.0, 3), 0.0);
    EXPECT_NEAR(gaussian_moment(2.0, 4), 3.0 * 16.0, 1e-12);
    EXPECT_NEAR(gaussian_moment(0.5, 6), 15.0 / 64.0, 1e-15);
    EXPECT_NEAR(log_gaussian_even_moment(0.5, 6), std::log(15.0 / 64.0), 1e-14);
    // (2k-1)!! sigma^2k at k = 500, by lgamma.
    const double k = 500.0;
    const double expected = std::lgamma(2 * k + 1) - std::lgamma(k + 1) - k * std::log(2.0) +
                            2 * k * std::log(0.7);
    EXPECT_NEAR(log_gaussian_even_moment(0.7, 1000), expected, 1e-9 * std::abs(expected));
}

TEST(GaussianMoments, PowerCharfuncMatchesQuadrature) {
    const double mean = 0.3;
    const double sigma = 0.9;
    const double kappa = 1.4;
    for (int n = 0; n <= 4; ++n) {
        Complex s = 0.0;
        const double h = 1e-3;
        for (double x = mean - 14.0 * sigma; x <= mean + 14.0 * sigma; x += h) {
            const double z = (x - mean) / sigma;
            s += std::pow(x, n) * std::exp(Complex(0.0, kappa * x)) * std::exp(-0.5 * z * z);
        }
        s *= h / std::sqrt(2.0 * kPi * sigma * sigma);
        EXPECT_LT(std::abs(gaussian_power_charfunc(mean, sigma, kappa, n) - s), 1e-9) << n;
    }
}

TEST(InitialCharfunc, GaussianMarginals) {
    const GaussianProbe g = make_gaussian_probe(0.4, 1.2, 0.7);
    const double chi = 0.9;
    const Complex zq = initial_charfunc(g, Quadrature::Q, chi, 0);
    EXPECT_LT(std::abs(zq - std::exp(Complex(-0.5 * chi * chi * 1.44, chi * 0.4))), 1e-14);
    const Complex zp = initial_charfunc(g, Quadrature::P, chi, 0);
    EXPECT_LT(std::abs(zp - std::exp(-0.5 * chi * chi * 0.49)), 1e-14);
}

// Symmetric-ordered averages of the Gaussian closed form against explicit
// operator products on a grid.
TEST(QuasiAverage, GaussianMatchesOperatorProducts) {
    const GaussianProbe g = make_gaussian_probe(0.3, 1.0, 0.7);
    const GridProbe gp = to_grid(g, 256, 28.0);
    const Matrix q = position_operator(gp.grid);
    for (const MomentumFunction &f :
         {MomentumFunction::power(2), MomentumFunction::plane_wave(0.8),
          MomentumFunction::plane_wave_power(-0.5, 1)}) {
        const Matrix fm = momentum_operator(gp.grid, f);
        for (int j = 0; j <= 3; ++j) {
            Complex direct = 0.0;
            for (int k = 0; k <= j; ++k) {
                Matrix left = Matrix::Identity(q.rows(), q.cols());
                for (int n = 0; n < j - k; ++n) left = left * q;
                Matrix right = Matrix::Identity(q.rows(), q.cols());
                for (int n = 0; n < k; ++n) right = right * q;
                const double c = std::tgamma(j + 1) / (std::tgamma(k + 1) * std::tgamma(j - k + 1));
                direct += c * (left * fm * right * gp.kernel).trace();
            }
            direct /= std::pow(2.0, j);
            EXPECT_LT(std::abs(quasi_average(g, f, j) - direct), 1e-8) << j;
            EXPECT_LT(std::abs(quasi_average(gp, f, j) - direct), 1e-8) << j;
            EXPECT_LT(std::abs(quasi_average(gp, fm, j) - direct), 1e-8) << j;
        }
    }
    EXPECT_WEAKFCS_ERROR(quasi_average(g, Matrix(Matrix::Identity(4, 4)), 1),
                         ErrorCode::UnsupportedFunction);
}

TEST(MomentumFunction, DerivativeAndEvaluation) {
    const MomentumFunction f = MomentumFunction::plane_wave_power(0.5, 2);
    const double p = 1.3;
    const Complex expected = std::exp(Complex(0.0, 0.5 * p)) * (Complex(0.0, 0.5) * p * p + 2.0 * p);
    EXPECT_LT(std::abs(f.derivative()(p) - expected), 1e-14);
    EXPECT_LT(std::abs((f * 2.0 + f)(p) - 3.0 * f(p)), 1e-14);
}

} // namespace
} // namespace weakfcs
