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
 * Shot-level Monte Carlo of the selection protocol: prepare rho_i, couple,
 * read the probe observable o, measure the system observable S_f, and keep
 * the record o when a uniform x falls below w(S).
 *
 * (o, S) is drawn by inverse CDF from the joint table P(o, S) computed by
 * the exact engine with rho_f = |S><S|. Shot k uses Philox stream k of the
 * seed, so results do not depend on the number of worker threads.
 */

#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "weakfcs/exact.hpp"
#include "weakfcs/hilbert.hpp"

namespace weakfcs {

struct ProtocolConfig {
    MeasurementSetup setup;
    ProbeObservable obs = MomentumP{};
    /// Measured on the system after the coupling. Outcomes S are its eigenvectors.
    SystemObservable postselection;
    /// Acceptance probability per eigenvector of `postselection`, in [0, 1].
    std::vector<double> w;
    std::int64_t n_shots = 1;
    std::uint64_t seed = 0;
    int jobs = 1;
    /// Highest moment order reported.
    int max_moment = 4;
};

/// Throws InvalidArgument for out-of-range w, a size mismatch or n_shots < 1.
void validate(const ProtocolConfig &cfg);

/// P(o, S) per outcome cell (rows) and system outcome (columns).
struct JointTable {
    RealVector support;
    double cell_width = 1.0;
    bool discrete = false;
    RealMatrix masses;
    /// Running sum of `masses` in column-major order, last entry 1.
    std::vector<double> cdf;
};

JointTable joint_table(const ProtocolConfig &cfg);

struct Shot {
    Eigen::Index bin = 0;
    Eigen::Index outcome = 0;
};

/// Shot `index`; empty when the record is discarded.
std::optional<Shot> sample_run(const JointTable &table, const std::vector<double> &w,
                               std::uint64_t seed, std::uint64_t index);

struct MomentSample {
    int j = 0;
    double mean = 0.0;
    double standard_error = 0.0;
};

struct EnsembleResult {
    RealVector support;
    double cell_width = 1.0;
    bool discrete = false;
    std::vector<std::int64_t> counts;
    std::int64_t accepted = 0;
    std::int64_t total = 0;
    std::vector<MomentSample> moments;

    double acceptance() const;
    double acceptance_se() const;
};

EnsembleResult ensemble(const ProtocolConfig &cfg);

/// sum_S w(S) |S><S| / W with W = sum_S w(S): the post-selection the accepted
/// records are conditioned on. Throws InvalidArgument when W = 0.
DensityMatrix effective_postselection(const SystemObservable &postselection,
                                      const std::vector<double> &w);

struct BinomialCheck {
    double min_p_value = 1.0;
    /// Per-bin significance after the Bonferroni correction.
    double threshold = 0.0;
    int failures = 0;
    bool passed() const { return failures == 0; }
};

/// Two-sided binomial test of every bin against the expected conditional
/// masses, at family-wise significance alpha.
BinomialCheck binomial_bin_test(const EnsembleResult &r, const RealVector &expected_masses,
                                double alpha = 1e-3);

struct ChiSquareCheck {
    double statistic = 0.0;
    int dof = 0;
    double p_value = 1.0;
};

/// Pearson test; adjacent bins are merged until each expects at least
/// `min_expected` counts.
ChiSquareCheck chi_square_test(const EnsembleResult &r, const RealVector &expected_masses,
                               double min_expected = 5.0);

/// Columns o_low, o_high, count, density, density_se.
void write_histogram_csv(std::ostream &os, const EnsembleResult &r);

} // namespace weakfcs
