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

#include "weakfcs/perturb.hpp"

#include <cmath>
#include <numbers>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "test_util.hpp"
#include "weakfcs/spinhalf.hpp"

namespace weakfcs {
namespace {

constexpr double kPi = std::numbers::pi;

MeasurementSetup spin_one_setup(double lambda, double q_bar) {
    const Vector psi_i = oracle::top_eigenvector(oracle::spin_one(2));
    const Vector psi_f = oracle::top_eigenvector(oracle::spin_one(0));
    const double st = std::sin(5.0 * kPi / 6.0);
    const Matrix a = st * std::cos(kPi / 6.0) * oracle::spin_one(0) +
                     st * std::sin(kPi / 6.0) * oracle::spin_one(1) +
                     std::cos(5.0 * kPi / 6.0) * oracle::spin_one(2);
    return make_setup(lambda, pure_state(psi_i), pure_state(psi_f), spectral_decompose(a),
                      pure_gaussian_probe(q_bar, 1.0));
}

MeasurementSetup spin_setup(double theta, double lambda, const GaussianProbe &g) {
    return to_measurement_setup(coplanar_setup(theta, lambda, g));
}

// Errors of a consistent second-order expansion fall by about 2^3 per halving.
TEST(Expansion, ThirdOrderResidual) {
    double prev[4] = {};
    for (int h = 0; h < 4; ++h) {
        const double lambda = 0.1 / std::pow(2.0, h);
        const MeasurementSetup s = spin_one_setup(lambda, 1.0);
        const double err[4] = {
            std::abs(moment_p_gaussian(s, 1, ExpansionVariant::Full2ndOrder).value -
                     exact_moment(s, MomentumP{}, 1)),
            std::abs(moment_p_general(s, 2).value - exact_moment(s, MomentumP{}, 2)),
            std::abs(charfunc_q(s, 1.0, ExpansionVariant::Full2ndOrder) -
                     conditional_charfunc(s, PositionQ{}, 1.0)),
            std::abs(charfunc_p(s, 0.7, CharfuncForm::Strict2nd) -
                     conditional_charfunc(s, MomentumP{}, 0.7))};
        for (int i = 0; i < 4; ++i) {
            if (h > 0) {
                EXPECT_GT(prev[i] / err[i], 6.0) << i << ' ' << h;
                EXPECT_LT(prev[i] / err[i], 10.0) << i << ' ' << h;
            }
            prev[i] = err[i];
        }
    }
}

TEST(Expansion, GeneralMomentsAgreeWithGaussianForm) {
    const MeasurementSetup s = spin_one_setup(0.05, 0.5);
    for (int j = 1; j <= 6; ++j) {
        const double g = moment_p_gaussian(s, j, ExpansionVariant::Full2ndOrder).value;
        EXPECT_NEAR(moment_p_general(s, j).value, g, 1e-10 * std::max(1.0, std::abs(g))) << j;
    }
    EXPECT_NEAR(expectation_obs(s, MomentumP{}, ExpansionVariant::Full2ndOrder),
                moment_p_gaussian(s, 1, ExpansionVariant::Full2ndOrder).value, 1e-12);
}

TEST(Expansion, NormalizationSeriesConverges) {
    const MeasurementSetup s = spin_one_setup(0.2, 0.3);
    const std::vector<double> partial = n_series(s, 12);
    ASSERT_EQ(partial.size(), 13u);
    EXPECT_NEAR(partial.back(), normalization(s), 1e-9);
    EXPECT_NEAR(partial[0], expansion_point(s).table.alpha0().real(), 1e-14);
    const Denominators d = denominators(s);
    EXPECT_NEAR(d.n2, partial[2], 1e-12);
    ASSERT_TRUE(d.n2_ab.has_value());
    EXPECT_NEAR(*d.n2_ab, d.n2_prime / partial[0], 1e-12);
}

TEST(Expansion, VariantsNearOrthogonality) {
    const GaussianProbe g = pure_gaussian_probe(0.0, 1.0);
    const MeasurementSetup s = spin_setup(kPi, 0.05, g);
    EXPECT_WEAKFCS_ERROR(ab_denominator(s), ErrorCode::OrthogonalStates);
    EXPECT_WEAKFCS_ERROR(moment_p_gaussian(s, 2, ExpansionVariant::ABOnly), ErrorCode::OrthogonalStates);
    // Interpolating stays finite and close to the exact second moment.
    const double exact = exact_moment(s, MomentumP{}, 2);
    const double interp = moment_p_gaussian(s, 2, ExpansionVariant::Interpolating).value;
    EXPECT_NEAR(interp, exact, 0.01 * exact);
}

TEST(Expansion, ABOnlyMatchesInterpolatingAwayFromOrthogonality) {
    const GaussianProbe g = make_gaussian_probe(0.3, 1.0, 0.6);
    for (double theta : {0.5, 1.5, 2.5}) {
        const MeasurementSetup s = spin_setup(theta, 0.05, g);
        for (int j = 1; j <= 4; ++j) {
            const double a = moment_p_gaussian(s, j, ExpansionVariant::ABOnly).value;
            const double b = moment_p_gaussian(s, j, ExpansionVariant::Interpolating).value;
            EXPECT_NEAR(a, b, 1e-10 * std::max(1.0, std::abs(b)));
        }
    }
}

TEST(Expansion, ValidityOrder) {
    const GaussianProbe g = make_gaussian_probe(0.0, 1.0, 0.8);
    const MeasurementSetup s = spin_setup(1.0, 0.2, g);
    EXPECT_NEAR(validity_order(s), 0.64 / 0.04, 1e-12);
    EXPECT_NO_THROW(moment_p_gaussian(s, 16, ExpansionVariant::Full2ndOrder));
    EXPECT_WEAKFCS_ERROR(moment_p_gaussian(s, 17, ExpansionVariant::Full2ndOrder),
                         ErrorCode::BeyondValidity);
    // For a Gaussian the p-moment ratio is led by k = 4: (j - 2) / (12 n*).
    EXPECT_NEAR(nstar_diagnostics(s, 60)[0], 58.0 / (12.0 * 16.0), 1e-12);
    EXPECT_GT(nstar_diagnostics(s, 400)[0], 1.0);
}

TEST(Expansion, ShiftedExpansionPoint) {
    const GaussianProbe g = pure_gaussian_probe(3.0, 1.0);
    const MeasurementSetup s = spin_setup(1.2, 0.1, g);
    const ExpansionPoint ep = expansion_point(s);
    EXPECT_TRUE(ep.shifted);
    EXPECT_DOUBLE_EQ(ep.q_offset, 3.0);
    EXPECT_FALSE(expansion_point(spin_setup(1.2, 0.01, g)).shifted);
    // The shifted expansion remains accurate where a naive one in lambda q_bar would not be.
    const double exact = exact_moment(s, MomentumP{}, 1);
    EXPECT_NEAR(moment_p_gaussian(s, 1, ExpansionVariant::Full2ndOrder).value, exact,
                0.01 * std::abs(exact));
}

TEST(Expansion, ResummedMomentumCharfunc) {
    const GaussianProbe g = pure_gaussian_probe(0.0, 1.0);
    const MeasurementSetup s = spin_setup(2.0, 0.02, g);
    for (double chi : {0.5, 2.0, 6.0}) {
        const Complex exact = conditional_charfunc(s, MomentumP{}, chi);
        EXPECT_LT(std::abs(charfunc_p(s, chi, CharfuncForm::Resummed) - exact), 1e-4) << chi;
    }
}

TEST(Expansion, GridObservable) {
    const MeasurementSetup s = spin_one_setup(0.02, 0.0);
    const GridObservable h = harmonic_number_operator(default_grid(s), 1.0);
    const double exact = exact_moment(s, h, 1);
    EXPECT_NEAR(expectation_obs(s, h, ExpansionVariant::Full2ndOrder), exact, 1e-4);
    const Complex z = conditional_charfunc(s, h, 0.8);
    EXPECT_LT(std::abs(charfunc_obs(s, h, 0.8) - z), 1e-4);
}

TEST(OrthogonalLimit, MatchesTranslatedWaveFunctions) {
    const GaussianProbe g = pure_gaussian_probe(0.0, 1.3);
    for (double chi : {0.0, 0.5, 1.0, 2.0}) {
        EXPECT_NEAR(orthogonal_limit(g, MomentumP{}, chi).real(), oracle::orthogonal_limit_p(1.3, chi),
                    1e-10);
        EXPECT_NEAR(orthogonal_limit(g, MomentumP{}, chi).imag(), 0.0, 1e-12);
    }
}

} // namespace
} // namespace weakfcs
