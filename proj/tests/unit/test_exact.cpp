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

#include "weakfcs/exact.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"

namespace weakfcs {
namespace {

constexpr double kPi = std::numbers::pi;

// A spin-1 selection with a generic measured component.
struct Case {
    oracle::PureProblem problem;
    MeasurementSetup setup;
};

Case spin_one_case(double lambda, double q_bar, bool closed_form) {
    oracle::PureProblem p;
    p.psi_i = oracle::top_eigenvector(oracle::spin_one(2));
    p.psi_f = oracle::top_eigenvector(0.6 * oracle::spin_one(0) + 0.8 * oracle::spin_one(1));
    p.a = 0.5 * oracle::spin_one(0) - 0.3 * oracle::spin_one(1) + 0.81240384046359604 * oracle::spin_one(2);
    p.lambda = lambda;
    p.q_bar = q_bar;
    p.delta_Q = 1.0;
    GridOptions grid;
    grid.gaussian_closed_form = closed_form;
    MeasurementSetup s = make_setup(lambda, pure_state(p.psi_i), pure_state(p.psi_f),
                                    spectral_decompose(p.a), pure_gaussian_probe(q_bar, 1.0), grid);
    return {p, s};
}

class ExactEngine : public ::testing::TestWithParam<bool> {};

TEST_P(ExactEngine, NormalizationMatchesQuadrature) {
    for (double lambda : {0.0, 0.1, 0.7}) {
        const Case c = spin_one_case(lambda, 0.4, GetParam());
        EXPECT_NEAR(normalization(c.setup), oracle::normalization(c.problem), 1e-10);
    }
}

TEST_P(ExactEngine, MomentumDensityMatchesQuadrature) {
    const Case c = spin_one_case(0.6, 0.4, GetParam());
    const ConditionalDistribution d = conditional_pdf(c.setup, MomentumP{});
    EXPECT_FALSE(d.discrete);
    EXPECT_NEAR(d.masses().sum(), 1.0, 1e-10);
    const double n = oracle::normalization(c.problem);
    for (Eigen::Index k = 0; k < d.support.size(); k += d.support.size() / 37) {
        const double expected = oracle::joint_density_p(c.problem, d.support(k)) / n;
        EXPECT_NEAR(d.pdf(k), expected, 1e-9) << d.support(k);
    }
    EXPECT_NEAR(d.cumulative()(d.support.size() - 1), 1.0, 1e-12);
}

TEST_P(ExactEngine, PositionDensityMatchesClosedForm) {
    const Case c = spin_one_case(0.6, -0.3, GetParam());
    const ConditionalDistribution d = conditional_pdf(c.setup, PositionQ{});
    const double n = oracle::normalization(c.problem);
    for (Eigen::Index k = 0; k < d.support.size(); k += 7) {
        EXPECT_NEAR(d.pdf(k), oracle::joint_density_q(c.problem, d.support(k)) / n, 1e-10);
    }
}

TEST_P(ExactEngine, MomentsAndCharfuncsMatchQuadrature) {
    const Case c = spin_one_case(0.5, 0.7, GetParam());
    for (int j = 1; j <= 4; ++j) {
        const double ep = oracle::moment_p(c.problem, j);
        EXPECT_NEAR(exact_moment(c.setup, MomentumP{}, j), ep, 1e-8 * std::max(1.0, std::abs(ep)));
        const double eq = oracle::moment_q(c.problem, j);
        EXPECT_NEAR(exact_moment(c.setup, PositionQ{}, j), eq, 1e-8 * std::max(1.0, std::abs(eq)));
    }
    for (double chi : {0.3, 1.0, 2.5}) {
        EXPECT_LT(std::abs(conditional_charfunc(c.setup, MomentumP{}, chi) -
                           oracle::charfunc_p(c.problem, chi)),
                  1e-9);
        EXPECT_LT(std::abs(conditional_charfunc(c.setup, PositionQ{}, chi) -
                           oracle::charfunc_q(c.problem, chi)),
                  1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(ClosedFormAndGrid, ExactEngine, ::testing::Bool(),
                         [](const auto &info) { return info.param ? "closed_form" : "grid"; });

TEST(ExactEngine, ZeroCouplingEchoesInitialMarginal) {
    const GaussianProbe g = make_gaussian_probe(0.2, 1.0, 0.9);
    const MeasurementSetup s =
        make_setup(0.0, validate_density(bloch_density({0.0, 0.0, 1.0})),
                   validate_density(bloch_density({1.0, 0.0, 0.0})), spectral_decompose(pauli_x()), g);
    const ConditionalDistribution d = conditional_pdf(s, MomentumP{});
    for (Eigen::Index k = 0; k < d.support.size(); ++k) {
        const double x = d.support(k) / 0.9;
        EXPECT_NEAR(d.pdf(k), std::exp(-0.5 * x * x) / std::sqrt(2.0 * kPi * 0.81), 1e-12);
    }
    EXPECT_NEAR(d.normalization, 0.5, 1e-15);
    EXPECT_NEAR(exact_moment(s, PositionQ{}, 1), 0.2, 1e-12);
}

TEST(ExactEngine, ZeroPostselection) {
    const MeasurementSetup s = make_setup(
        0.0, validate_density(bloch_density({0.0, 0.0, 1.0})),
        validate_density(bloch_density({0.0, 0.0, -1.0})), spectral_decompose(pauli_x()),
        pure_gaussian_probe(0.0, 1.0));
    EXPECT_WEAKFCS_ERROR(conditional_pdf(s, MomentumP{}), ErrorCode::ZeroPostselection);
    // The joint law stays available.
    EXPECT_NEAR(joint_masses(s, MomentumP{}).sum(), 0.0, 1e-15);
}

TEST(ExactEngine, SetupValidation) {
    const DensityMatrix q = validate_density(bloch_density({0.0, 0.0, 1.0}));
    EXPECT_WEAKFCS_ERROR(make_setup(std::nan(""), q, q, spectral_decompose(pauli_x()),
                                    pure_gaussian_probe(0.0, 1.0)),
                         ErrorCode::InvalidArgument);
    EXPECT_WEAKFCS_ERROR(make_setup(0.1, q, q, spectral_decompose(oracle::spin_one(0)),
                                    pure_gaussian_probe(0.0, 1.0)),
                         ErrorCode::DimMismatch);
}

TEST(GridObservables, NumberOperatorStatistics) {
    const Case c = spin_one_case(0.3, 0.0, true);
    const QGrid grid = default_grid(c.setup);
    const GridObservable h = harmonic_number_operator(grid, 1.0);
    // Low-lying levels of the discretized oscillator are the integers.
    for (int n = 0; n < 4; ++n) EXPECT_NEAR(h.eigenvalues()(n), n, 1e-8);
    const ConditionalDistribution d = conditional_pdf(c.setup, h);
    EXPECT_TRUE(d.discrete);
    EXPECT_NEAR(d.pdf.sum(), 1.0, 1e-12);
    EXPECT_TRUE((d.pdf.array() >= -1e-15).all());
    const double mean = exact_moment(c.setup, h, 1);
    EXPECT_NEAR(std::abs(conditional_charfunc(c.setup, h, 0.0)), 1.0, 1e-12);
    const double step = 1e-4;
    const Complex slope = (conditional_charfunc(c.setup, h, step) -
                           conditional_charfunc(c.setup, h, -step)) /
                          (2.0 * step);
    EXPECT_NEAR(slope.imag(), mean, 1e-6);
    EXPECT_WEAKFCS_ERROR(make_grid_observable(grid, Matrix::Identity(3, 3)), ErrorCode::DimMismatch);
}

TEST(GridObservables, JointProbabilities) {
    const Case c = spin_one_case(0.3, 0.0, false);
    const RealVector m = joint_masses(c.setup, PositionQ{});
    EXPECT_NEAR(m.sum(), normalization(c.setup), 1e-12);
    EXPECT_DOUBLE_EQ(joint_prob(c.setup, PositionQ{}, 5), m(5));
    EXPECT_WEAKFCS_ERROR(joint_prob(c.setup, PositionQ{}, -1), ErrorCode::InvalidArgument);
}

TEST(ExactEngine, InterferenceRatio) {
    const MeasurementSetup s = make_setup(
        0.1, validate_density(bloch_density({0.0, 0.0, 1.0})),
        validate_density(bloch_density({0.0, 0.0, 1.0})), spectral_decompose(pauli_x()),
        pure_gaussian_probe(0.0, 1.0));
    EXPECT_NEAR(interference_ratio(s), 0.1 * 2.0 / 0.5, 1e-14);
}

TEST(ExactEngine, GridMomentsConvergeUnderDoubling) {
    Case c = spin_one_case(0.6, 0.4, false);
    for (int j = 1; j <= 4; ++j) {
        double previous = 0.0;
        for (int n_q : {128, 256, 512}) {
            c.setup.grid.n_q = n_q;
            const double m = exact_moment(c.setup, MomentumP{}, j);
            if (n_q > 128) EXPECT_LT(std::abs(m - previous), 1e-7) << "j=" << j << " n_q=" << n_q;
            previous = m;
        }
    }
}

} // namespace
} // namespace weakfcs
