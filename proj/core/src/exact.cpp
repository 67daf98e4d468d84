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

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

constexpr Complex kI{0.0, 1.0};

int next_power_of_two(double x) {
    int n = 1;
    while (n < x) n <<= 1;
    return n;
}

// M(a, a') = <a'|rho_f|a> <a|rho_i|a'> in the eigenbasis of A.
Matrix selection_weights(const MeasurementSetup &s) {
    const Matrix &v = s.A.eigenvectors();
    const Matrix f = v.adjoint() * s.rho_f.matrix() * v;
    const Matrix i = v.adjoint() * s.rho_i.matrix() * v;
    return f.transpose().cwiseProduct(i);
}

const GaussianProbe *closed_form_gaussian(const MeasurementSetup &s) {
    if (!s.grid.gaussian_closed_form) return nullptr;
    return std::get_if<GaussianProbe>(&s.probe);
}

// w(a, a') = M(a, a') exp(i lambda q_bar (a - a') - lambda^2 dQ^2 (a - a')^2 / 2).
Matrix gaussian_weights(const MeasurementSetup &s, const GaussianProbe &g) {
    const Matrix m = selection_weights(s);
    const RealVector &a = s.A.eigenvalues();
    Matrix w(m.rows(), m.cols());
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            const double d = s.lambda * (a(r) - a(c));
            w(r, c) = m(r, c) * std::exp(kI * d * g.q_bar - 0.5 * d * d * g.delta_Q * g.delta_Q);
        }
    }
    return w;
}

// Z^w(lambda q_m, lambda q_m') on the grid: E M E^dagger with E(m, a) = exp(i lambda q_m a).
Matrix grid_weak_charfunc(const MeasurementSetup &s, const QGrid &grid) {
    const RealVector &a = s.A.eigenvalues();
    Matrix e(grid.size(), a.size());
    for (Eigen::Index c = 0; c < a.size(); ++c) {
        for (int m = 0; m < grid.size(); ++m) e(m, c) = std::exp(kI * s.lambda * grid.q(m) * a(c));
    }
    return e * selection_weights(s) * e.adjoint();
}

double require_postselection(double n) {
    if (!(n > kZeroPostselectionTol)) {
        std::ostringstream os;
        os << "post-selection probability N = " << n << " vanishes";
        fail(ErrorCode::ZeroPostselection, os.str());
    }
    return n;
}

void check_tail(const RealVector &weights, const RealVector &values, int j, const char *what) {
    if (j == 0) return;
    const Eigen::Index n = weights.size();
    const Eigen::Index edge = 2;
    double total = 0.0;
    double tail = 0.0;
    for (Eigen::Index k = 0; k < n; ++k) {
        const double term = std::abs(weights(k) * std::pow(values(k), j));
        total += term;
        if (k < edge || k >= n - edge) tail += term;
    }
    if (total > 0.0 && tail > kTailTol * total) {
        std::ostringstream os;
        os << what << " moment of order " << j << " has tail fraction " << tail / total
           << "; refine the grid";
        fail(ErrorCode::GridResolutionInsufficient, os.str());
    }
}

// Zeroes entries at the level of the summation round-off, which p^j weights
// would otherwise amplify at the far edges of the grid.
RealVector clean_roundoff(RealVector m) {
    const double floor = 4.0 * static_cast<double>(m.size()) *
                         std::numeric_limits<double>::epsilon() * m.cwiseAbs().maxCoeff();
    for (Eigen::Index k = 0; k < m.size(); ++k) {
        if (std::abs(m(k)) <= floor) m(k) = 0.0;
    }
    return m;
}

struct DiscreteSpectrum {
    RealVector values;
    std::vector<std::vector<Eigen::Index>> groups;
};

DiscreteSpectrum merge_spectrum(const RealVector &ev) {
    DiscreteSpectrum d;
    std::vector<double> values;
    for (Eigen::Index i = 0; i < ev.size(); ++i) {
        if (!values.empty() &&
            std::abs(ev(i) - values.back()) <= 1e-9 * std::max(1.0, std::abs(ev(i)))) {
            d.groups.back().push_back(i);
            continue;
        }
        values.push_back(ev(i));
        d.groups.push_back({i});
    }
    d.values = Eigen::Map<RealVector>(values.data(), static_cast<Eigen::Index>(values.size()));
    return d;
}

// Conditional q kernel on the engine grid, unnormalized (trace N).
Matrix joint_q_kernel(const MeasurementSetup &s, const GridProbe &gp) {
    return gp.kernel.cwiseProduct(grid_weak_charfunc(s, gp.grid));
}

struct GridOutcome {
    ConditionalDistribution dist;
    RealVector masses;  // unnormalized, sum N
};

GridOutcome grid_outcome(const MeasurementSetup &s, const ProbeObservable &obs) {
    const GridProbe gp = resolve_grid_probe(s, obs);
    const Matrix joint = joint_q_kernel(s, gp);
    const double n = joint.trace().real();
    GridOutcome out;
    out.dist.normalization = n;
    const QGrid &grid = gp.grid;
    if (std::holds_alternative<PositionQ>(obs)) {
        out.dist.support = grid.q_values();
        out.masses = clean_roundoff(joint.diagonal().real());
        out.dist.cell_width = grid.dq();
    } else if (std::holds_alternative<MomentumP>(obs)) {
        out.dist.support = grid.p_values();
        out.masses = clean_roundoff(p_diagonal(grid, joint).real());
        out.dist.cell_width = grid.dp();
    } else {
        const auto &go = std::get<GridObservable>(obs);
        const Matrix &v = go.eigenvectors();
        const RealVector per_vector =
            v.conjugate().cwiseProduct(joint * v).colwise().sum().real().transpose();
        const DiscreteSpectrum spec = merge_spectrum(go.eigenvalues());
        out.dist.support = spec.values;
        out.masses.resize(spec.values.size());
        for (size_t g = 0; g < spec.groups.size(); ++g) {
            double sum = 0.0;
            for (Eigen::Index i : spec.groups[g]) sum += per_vector(i);
            out.masses(static_cast<Eigen::Index>(g)) = sum;
        }
        out.dist.cell_width = 1.0;
        out.dist.discrete = true;
    }
    return out;
}

bool gaussian_p_path(const MeasurementSetup &s, const ProbeObservable &obs) {
    return closed_form_gaussian(s) != nullptr && std::holds_alternative<MomentumP>(obs);
}

bool gaussian_q_path(const MeasurementSetup &s, const ProbeObservable &obs) {
    return closed_form_gaussian(s) != nullptr && std::holds_alternative<PositionQ>(obs);
}

// Unnormalized closed-form density of p for a Gaussian probe.
double gaussian_p_density(const MeasurementSetup &s, const GaussianProbe &g, const Matrix &w,
                          double p) {
    const RealVector &a = s.A.eigenvalues();
    const double norm = 1.0 / (std::sqrt(2.0 * std::numbers::pi) * g.delta_P);
    double sum = 0.0;
    for (Eigen::Index c = 0; c < w.cols(); ++c) {
        for (Eigen::Index r = 0; r < w.rows(); ++r) {
            const double x = (p - 0.5 * s.lambda * (a(r) + a(c))) / g.delta_P;
            sum += w(r, c).real() * norm * std::exp(-0.5 * x * x);
        }
    }
    return sum;
}

// Unnormalized closed-form density of q for a Gaussian probe.
double gaussian_q_density(const MeasurementSetup &s, const GaussianProbe &g, const Matrix &m,
                          double q) {
    const RealVector &a = s.A.eigenvalues();
    const double x = (q - g.q_bar) / g.delta_Q;
    const double marginal = std::exp(-0.5 * x * x) / (std::sqrt(2.0 * std::numbers::pi) * g.delta_Q);
    Complex z = 0.0;
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            z += m(r, c) * std::exp(kI * s.lambda * q * (a(r) - a(c)));
        }
    }
    return marginal * z.real();
}

} // namespace

MeasurementSetup make_setup(double lambda, DensityMatrix rho_i, DensityMatrix rho_f,
                            SystemObservable a, ProbeState probe, GridOptions grid) {
    if (!std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "lambda must be finite");
    if (rho_i.dim() != rho_f.dim() || rho_i.dim() != a.dim()) {
        fail(ErrorCode::DimMismatch, "rho_i, rho_f and A must share a dimension");
    }
    if (grid.n_q < 0 || grid.span < 0.0) {
        fail(ErrorCode::InvalidArgument, "grid size and span must be non-negative");
    }
    return MeasurementSetup{lambda, std::move(rho_i), std::move(rho_f), std::move(a),
                            std::move(probe), grid};
}

Matrix GridObservable::exp_i(double chi) const {
    Vector phases(eigenvalues().size());
    for (Eigen::Index i = 0; i < phases.size(); ++i) phases(i) = std::exp(kI * chi * eigenvalues()(i));
    return eigenvectors() * phases.asDiagonal() * eigenvectors().adjoint();
}

GridObservable make_grid_observable(const QGrid &grid, const Matrix &m) {
    if (m.rows() != grid.size() || m.cols() != grid.size()) {
        fail(ErrorCode::DimMismatch, "observable does not match the grid size");
    }
    const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    if (hermitian_defect(m) > kHermitianTol * scale) {
        fail(ErrorCode::NonHermitian, "probe observable is not Hermitian");
    }
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    auto data = std::make_shared<GridObservable::Data>();
    data->grid = grid;
    data->matrix = herm;
    data->values = es.eigenvalues();
    data->vectors = es.eigenvectors();
    return GridObservable(std::move(data));
}

GridObservable harmonic_number_operator(const QGrid &grid, double omega) {
    if (!(omega > 0.0)) fail(ErrorCode::InvalidArgument, "omega must be positive");
    const Matrix p2 = momentum_operator(grid, MomentumFunction::power(2));
    const RealVector q = grid.q_values();
    Matrix h = p2 / (2.0 * omega);
    for (int m = 0; m < grid.size(); ++m) h(m, m) += 0.5 * omega * q(m) * q(m) - 0.5;
    return make_grid_observable(grid, h);
}

QGrid default_grid(const MeasurementSetup &s) {
    double delta_Q = 1.0;
    double delta_P = 0.5;
    double center = 0.0;
    if (const auto *g = std::get_if<GaussianProbe>(&s.probe)) {
        delta_Q = g->delta_Q;
        delta_P = g->delta_P;
        center = g->q_bar;
    } else {
        return std::get<GridProbe>(s.probe).grid;
    }
    const double span = s.grid.span > 0.0 ? s.grid.span : 24.0 * delta_Q;
    int n = s.grid.n_q;
    if (n == 0) {
        const double shift = std::abs(s.lambda) * s.A.max_abs_eigenvalue();
        n = std::max(256, next_power_of_two(span * (shift + 12.0 * delta_P) / std::numbers::pi));
    }
    return QGrid::centered(n, center, span);
}

GridProbe resolve_grid_probe(const MeasurementSetup &s, const ProbeObservable &obs) {
    const auto *go = std::get_if<GridObservable>(&obs);
    if (const auto *gp = std::get_if<GridProbe>(&s.probe)) {
        if (go != nullptr && go->grid().size() != gp->grid.size()) {
            fail(ErrorCode::DimMismatch, "observable and probe live on different grids");
        }
        return *gp;
    }
    const auto &g = std::get<GaussianProbe>(s.probe);
    if (go != nullptr) return sample_on_grid(g, go->grid());
    return sample_on_grid(g, default_grid(s));
}

double normalization(const MeasurementSetup &s) {
    if (const auto *g = closed_form_gaussian(s)) return gaussian_weights(s, *g).sum().real();
    const GridProbe gp = resolve_grid_probe(s);
    const Matrix z = grid_weak_charfunc(s, gp.grid);
    return gp.kernel.diagonal().cwiseProduct(z.diagonal()).sum().real();
}

double interference_ratio(const MeasurementSetup &s) {
    const RealVector &a = s.A.eigenvalues();
    double coherence = 0.5;
    if (const auto *g = std::get_if<GaussianProbe>(&s.probe)) {
        coherence = g->coherence_scale();
    } else {
        coherence = 0.5 / std::sqrt(std::max(1e-300, q_moment(s.probe, 2, q_moment(s.probe, 1))));
    }
    return std::abs(s.lambda) * (a.maxCoeff() - a.minCoeff()) / coherence;
}

ConditionalKernel conditional_probe_state(const MeasurementSetup &s, Quadrature rep) {
    const GridProbe gp = resolve_grid_probe(s);
    Matrix joint = joint_q_kernel(s, gp);
    const double n = require_postselection(joint.trace().real());
    joint /= n;
    ConditionalKernel out;
    out.grid = gp.grid;
    out.rep = rep;
    out.normalization = n;
    if (rep == Quadrature::Q) {
        out.kernel = std::move(joint);
    } else {
        const Matrix u = dft_matrix(gp.grid);
        out.kernel = u * joint * u.adjoint();
    }
    return out;
}

RealVector ConditionalDistribution::cumulative() const {
    RealVector c(pdf.size());
    double acc = 0.0;
    for (Eigen::Index i = 0; i < pdf.size(); ++i) {
        acc += pdf(i) * cell_width;
        c(i) = acc;
    }
    return c;
}

ConditionalDistribution joint_distribution(const MeasurementSetup &s, const ProbeObservable &obs) {
    if (gaussian_p_path(s, obs) || gaussian_q_path(s, obs)) {
        const auto &g = *closed_form_gaussian(s);
        const QGrid grid = default_grid(s);
        ConditionalDistribution d;
        const bool is_p = std::holds_alternative<MomentumP>(obs);
        d.support = is_p ? grid.p_values() : grid.q_values();
        d.cell_width = is_p ? grid.dp() : grid.dq();
        d.pdf.resize(d.support.size());
        const Matrix w = is_p ? gaussian_weights(s, g) : selection_weights(s);
        for (Eigen::Index k = 0; k < d.support.size(); ++k) {
            const double o = d.support(k);
            d.pdf(k) = is_p ? gaussian_p_density(s, g, w, o) : gaussian_q_density(s, g, w, o);
        }
        d.normalization = normalization(s);
        return d;
    }
    GridOutcome out = grid_outcome(s, obs);
    out.dist.pdf = out.masses / out.dist.cell_width;
    return out.dist;
}

ConditionalDistribution conditional_pdf(const MeasurementSetup &s, const ProbeObservable &obs) {
    ConditionalDistribution d = joint_distribution(s, obs);
    d.pdf /= require_postselection(d.normalization);
    return d;
}

Complex conditional_charfunc(const MeasurementSetup &s, const ProbeObservable &obs, double chi) {
    if (gaussian_p_path(s, obs)) {
        const auto &g = *closed_form_gaussian(s);
        const Matrix w = gaussian_weights(s, g);
        const RealVector &a = s.A.eigenvalues();
        Complex z = 0.0;
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                z += w(r, c) * std::exp(kI * chi * s.lambda * 0.5 * (a(r) + a(c)));
            }
        }
        const double n = require_postselection(w.sum().real());
        return z * std::exp(-0.5 * chi * chi * g.delta_P * g.delta_P) / n;
    }
    if (gaussian_q_path(s, obs)) {
        const auto &g = *closed_form_gaussian(s);
        const Matrix m = selection_weights(s);
        const RealVector &a = s.A.eigenvalues();
        Complex z = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                const double kappa = chi + s.lambda * (a(r) - a(c));
                z += m(r, c) * gaussian_power_charfunc(g.q_bar, g.delta_Q, kappa, 0);
            }
        }
        return z / require_postselection(normalization(s));
    }
    const GridOutcome out = grid_outcome(s, obs);
    const double n = require_postselection(out.dist.normalization);
    Complex z = 0.0;
    for (Eigen::Index k = 0; k < out.masses.size(); ++k) {
        z += out.masses(k) * std::exp(kI * chi * out.dist.support(k));
    }
    return z / n;
}

RealVector joint_masses(const MeasurementSetup &s, const ProbeObservable &obs) {
    return joint_distribution(s, obs).masses();
}

double joint_prob(const MeasurementSetup &s, const ProbeObservable &obs, int bin) {
    const RealVector m = joint_masses(s, obs);
    if (bin < 0 || bin >= m.size()) fail(ErrorCode::InvalidArgument, "outcome bin out of range");
    return m(bin);
}

double exact_moment(const MeasurementSetup &s, const ProbeObservable &obs, int j) {
    if (j < 0) fail(ErrorCode::InvalidArgument, "moment order must be >= 0");
    if (j == 0) return 1.0;
    if (gaussian_p_path(s, obs)) {
        // p = p' + lambda (a + a') / 2 with p' ~ N(0, dP^2) inside every branch.
        const auto &g = *closed_form_gaussian(s);
        const Matrix w = gaussian_weights(s, g);
        const RealVector &a = s.A.eigenvalues();
        Complex sum = 0.0;
        for (Eigen::Index c = 0; c < w.cols(); ++c) {
            for (Eigen::Index r = 0; r < w.rows(); ++r) {
                sum += w(r, c) *
                       gaussian_power_charfunc(0.5 * s.lambda * (a(r) + a(c)), g.delta_P, 0.0, j);
            }
        }
        return sum.real() / require_postselection(w.sum().real());
    }
    if (gaussian_q_path(s, obs)) {
        const auto &g = *closed_form_gaussian(s);
        const Matrix m = selection_weights(s);
        const RealVector &a = s.A.eigenvalues();
        Complex sum = 0.0;
        for (Eigen::Index c = 0; c < m.cols(); ++c) {
            for (Eigen::Index r = 0; r < m.rows(); ++r) {
                sum += m(r, c) *
                       gaussian_power_charfunc(g.q_bar, g.delta_Q, s.lambda * (a(r) - a(c)), j);
            }
        }
        return sum.real() / require_postselection(normalization(s));
    }
    const GridOutcome out = grid_outcome(s, obs);
    const double n = require_postselection(out.dist.normalization);
    if (!out.dist.discrete) {
        check_tail(out.masses, out.dist.support, j,
                   std::holds_alternative<MomentumP>(obs) ? "p" : "q");
    }
    double sum = 0.0;
    for (Eigen::Index k = 0; k < out.masses.size(); ++k) {
        sum += out.masses(k) * std::pow(out.dist.support(k), j);
    }
    return sum / n;
}

} // namespace weakfcs
