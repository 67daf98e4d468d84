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

#include "weakfcs/mc.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <thread>

#include <boost/math/distributions/binomial.hpp>
#include <boost/math/distributions/chi_squared.hpp>

#include "weakfcs/error.hpp"
#include "weakfcs/format.hpp"
#include "weakfcs/philox.hpp"

namespace weakfcs {

namespace {

struct Tally {
    std::vector<std::int64_t> counts;
    std::int64_t accepted = 0;
};

Tally run_range(const JointTable &table, const std::vector<double> &w, std::uint64_t seed,
                std::int64_t begin, std::int64_t end) {
    Tally t;
    t.counts.assign(static_cast<size_t>(table.support.size()), 0);
    for (std::int64_t k = begin; k < end; ++k) {
        if (const auto shot = sample_run(table, w, seed, static_cast<std::uint64_t>(k))) {
            ++t.counts[static_cast<size_t>(shot->bin)];
            ++t.accepted;
        }
    }
    return t;
}

double two_sided_binomial(std::int64_t n, double p, std::int64_t k) {
    if (p <= 0.0) return k == 0 ? 1.0 : 0.0;
    if (p >= 1.0) return k == n ? 1.0 : 0.0;
    const boost::math::binomial_distribution<double> dist(static_cast<double>(n), p);
    const double kd = static_cast<double>(k);
    const double lower = boost::math::cdf(dist, kd);
    const double upper = k == 0 ? 1.0 : boost::math::cdf(boost::math::complement(dist, kd - 1.0));
    return std::min(1.0, 2.0 * std::min(lower, upper));
}

} // namespace

void validate(const ProtocolConfig &cfg) {
    if (static_cast<Eigen::Index>(cfg.w.size()) != cfg.postselection.dim()) {
        fail(ErrorCode::InvalidArgument, "w needs one entry per post-selection outcome");
    }
    if (cfg.postselection.dim() != cfg.setup.A.dim()) {
        fail(ErrorCode::DimMismatch, "post-selection observable acts on another space");
    }
    for (double x : cfg.w) {
        if (!(x >= 0.0 && x <= 1.0)) fail(ErrorCode::InvalidArgument, "w(S) must lie in [0, 1]");
    }
    if (cfg.n_shots < 1) fail(ErrorCode::InvalidArgument, "n_shots must be >= 1");
    if (cfg.max_moment < 0) fail(ErrorCode::InvalidArgument, "max_moment must be >= 0");
}

JointTable joint_table(const ProtocolConfig &cfg) {
    validate(cfg);
    const Matrix &vectors = cfg.postselection.eigenvectors();
    JointTable t;
    for (Eigen::Index s = 0; s < vectors.cols(); ++s) {
        MeasurementSetup branch = cfg.setup;
        branch.rho_f = pure_state(vectors.col(s));
        const ConditionalDistribution d = joint_distribution(branch, cfg.obs);
        if (s == 0) {
            t.support = d.support;
            t.cell_width = d.cell_width;
            t.discrete = d.discrete;
            t.masses.resize(d.support.size(), vectors.cols());
        }
        t.masses.col(s) = d.masses().cwiseMax(0.0);
    }
    const double total = t.masses.sum();
    if (!(total > 0.0)) fail(ErrorCode::ZeroPostselection, "joint table carries no weight");
    t.cdf.resize(static_cast<size_t>(t.masses.size()));
    double acc = 0.0;
    for (Eigen::Index i = 0; i < t.masses.size(); ++i) {
        acc += t.masses.data()[i];
        t.cdf[static_cast<size_t>(i)] = acc / total;
    }
    t.cdf.back() = 1.0;
    return t;
}

std::optional<Shot> sample_run(const JointTable &table, const std::vector<double> &w,
                               std::uint64_t seed, std::uint64_t index) {
    Philox4x32 rng(seed, index);
    const double u = rng.next_double();
    const double x = rng.next_double();
    const auto it = std::upper_bound(table.cdf.begin(), table.cdf.end(), u);
    const auto flat = std::min<Eigen::Index>(static_cast<Eigen::Index>(it - table.cdf.begin()),
                                             table.masses.size() - 1);
    Shot shot{flat % table.masses.rows(), flat / table.masses.rows()};
    if (!(x < w[static_cast<size_t>(shot.outcome)])) return std::nullopt;
    return shot;
}

double EnsembleResult::acceptance() const {
    return total > 0 ? static_cast<double>(accepted) / static_cast<double>(total) : 0.0;
}

double EnsembleResult::acceptance_se() const {
    const double f = acceptance();
    return total > 0 ? std::sqrt(f * (1.0 - f) / static_cast<double>(total)) : 0.0;
}

EnsembleResult ensemble(const ProtocolConfig &cfg) {
    const JointTable table = joint_table(cfg);
    int jobs = cfg.jobs > 0 ? cfg.jobs : static_cast<int>(std::thread::hardware_concurrency());
    jobs = static_cast<int>(std::clamp<std::int64_t>(jobs, 1, cfg.n_shots));

    std::vector<Tally> parts(static_cast<size_t>(jobs));
    std::vector<std::thread> workers;
    const std::int64_t chunk = (cfg.n_shots + jobs - 1) / jobs;
    for (int t = 0; t < jobs; ++t) {
        const std::int64_t begin = std::min(cfg.n_shots, t * chunk);
        const std::int64_t end = std::min(cfg.n_shots, begin + chunk);
        auto work = [&, t, begin, end] {
            parts[static_cast<size_t>(t)] = run_range(table, cfg.w, cfg.seed, begin, end);
        };
        if (jobs == 1) {
            work();
        } else {
            workers.emplace_back(work);
        }
    }
    for (auto &th : workers) th.join();

    EnsembleResult r;
    r.support = table.support;
    r.cell_width = table.cell_width;
    r.discrete = table.discrete;
    r.total = cfg.n_shots;
    r.counts.assign(static_cast<size_t>(table.support.size()), 0);
    for (const Tally &p : parts) {
        r.accepted += p.accepted;
        for (size_t k = 0; k < r.counts.size(); ++k) r.counts[k] += p.counts[k];
    }

    const double n = static_cast<double>(r.accepted);
    for (int j = 1; j <= cfg.max_moment; ++j) {
        MomentSample m;
        m.j = j;
        if (r.accepted == 0) {
            m.mean = m.standard_error = std::numeric_limits<double>::quiet_NaN();
            r.moments.push_back(m);
            continue;
        }
        double s1 = 0.0;
        double s2 = 0.0;
        for (size_t k = 0; k < r.counts.size(); ++k) {
            const double o = std::pow(r.support(static_cast<Eigen::Index>(k)), j);
            s1 += static_cast<double>(r.counts[k]) * o;
            s2 += static_cast<double>(r.counts[k]) * o * o;
        }
        m.mean = s1 / n;
        const double var = r.accepted > 1 ? std::max(0.0, s2 / n - m.mean * m.mean) * n / (n - 1.0)
                                          : std::numeric_limits<double>::quiet_NaN();
        m.standard_error = std::sqrt(var / n);
        r.moments.push_back(m);
    }
    return r;
}

DensityMatrix effective_postselection(const SystemObservable &postselection,
                                      const std::vector<double> &w) {
    if (static_cast<Eigen::Index>(w.size()) != postselection.dim()) {
        fail(ErrorCode::InvalidArgument, "w needs one entry per post-selection outcome");
    }
    double total = 0.0;
    for (double x : w) total += x;
    if (!(total > 0.0)) fail(ErrorCode::InvalidArgument, "all acceptance probabilities vanish");
    Matrix rho = Matrix::Zero(postselection.dim(), postselection.dim());
    for (size_t s = 0; s < w.size(); ++s) {
        rho += (w[s] / total) * postselection.projector(static_cast<Eigen::Index>(s));
    }
    return validate_density(rho);
}

BinomialCheck binomial_bin_test(const EnsembleResult &r, const RealVector &expected_masses,
                                double alpha) {
    if (expected_masses.size() != static_cast<Eigen::Index>(r.counts.size())) {
        fail(ErrorCode::DimMismatch, "expected masses and histogram differ in size");
    }
    const double total = expected_masses.sum();
    BinomialCheck c;
    c.threshold = alpha / static_cast<double>(r.counts.size());
    for (size_t k = 0; k < r.counts.size(); ++k) {
        const double p = expected_masses(static_cast<Eigen::Index>(k)) / total;
        const double pv = two_sided_binomial(r.accepted, p, r.counts[k]);
        c.min_p_value = std::min(c.min_p_value, pv);
        if (pv < c.threshold) ++c.failures;
    }
    return c;
}

ChiSquareCheck chi_square_test(const EnsembleResult &r, const RealVector &expected_masses,
                               double min_expected) {
    if (expected_masses.size() != static_cast<Eigen::Index>(r.counts.size())) {
        fail(ErrorCode::DimMismatch, "expected masses and histogram differ in size");
    }
    const double n = static_cast<double>(r.accepted);
    const double total = expected_masses.sum();
    std::vector<double> obs;
    std::vector<double> exp;
    double o = 0.0;
    double e = 0.0;
    for (size_t k = 0; k < r.counts.size(); ++k) {
        o += static_cast<double>(r.counts[k]);
        e += n * expected_masses(static_cast<Eigen::Index>(k)) / total;
        if (e >= min_expected) {
            obs.push_back(o);
            exp.push_back(e);
            o = e = 0.0;
        }
    }
    if (!exp.empty()) {
        obs.back() += o;
        exp.back() += e;
    }
    ChiSquareCheck c;
    for (size_t g = 0; g < exp.size(); ++g) {
        c.statistic += (obs[g] - exp[g]) * (obs[g] - exp[g]) / exp[g];
    }
    c.dof = static_cast<int>(exp.size()) - 1;
    if (c.dof >= 1) {
        const boost::math::chi_squared_distribution<double> dist(c.dof);
        c.p_value = boost::math::cdf(boost::math::complement(dist, c.statistic));
    }
    return c;
}

void write_histogram_csv(std::ostream &os, const EnsembleResult &r) {
    os << "o_low,o_high,count,density,density_se\n";
    const double n = static_cast<double>(r.accepted);
    const double half = r.discrete ? 0.0 : 0.5 * r.cell_width;
    for (size_t k = 0; k < r.counts.size(); ++k) {
        const double o = r.support(static_cast<Eigen::Index>(k));
        const double f = n > 0.0 ? static_cast<double>(r.counts[k]) / n : 0.0;
        const double se = n > 0.0 ? std::sqrt(f * (1.0 - f) / n) : 0.0;
        os << format_double(o - half) << ',' << format_double(o + half) << ',' << r.counts[k]
           << ',' << format_double(f / r.cell_width) << ',' << format_double(se / r.cell_width)
           << '\n';
    }
}

} // namespace weakfcs
