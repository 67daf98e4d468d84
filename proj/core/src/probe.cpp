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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr int kMaxQuasiOrder = 8;

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

bool is_power_of_two(int n) {
    return n > 0 && (n & (n - 1)) == 0;
}

// E[(c + X)^n] with X ~ N(0, sigma^2), c complex.
Complex shifted_gaussian_power(Complex c, double sigma, int n) {
    Complex sum = 0.0;
    for (int r = 0; r <= n; r += 2) {
        sum += binomial(n, r) * std::pow(c, n - r) * gaussian_moment(sigma, r);
    }
    return sum;
}

// E[f(p)] for p ~ N(0, sigma^2).
Complex gaussian_p_average(const MomentumFunction &f, double sigma) {
    const double chi = f.chi();
    const Complex shift = kI * chi * sigma * sigma;
    Complex sum = 0.0;
    const auto &c = f.coefficients();
    for (size_t m = 0; m < c.size(); ++m) {
        if (c[m] == 0.0) continue;
        sum += c[m] * shifted_gaussian_power(shift, sigma, static_cast<int>(m));
    }
    return std::exp(-0.5 * chi * chi * sigma * sigma) * sum;
}

double edge_ratio(const Matrix &kernel) {
    const Eigen::Index n = kernel.rows();
    const double peak = kernel.cwiseAbs().maxCoeff();
    double edge = 0.0;
    edge = std::max(edge, kernel.row(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, kernel.row(n - 1).cwiseAbs().maxCoeff());
    edge = std::max(edge, kernel.col(0).cwiseAbs().maxCoeff());
    edge = std::max(edge, kernel.col(n - 1).cwiseAbs().maxCoeff());
    return peak > 0.0 ? edge / peak : INFINITY;
}

void require_order(int j) {
    if (j < 0 || j > kMaxQuasiOrder) {
        fail(ErrorCode::InvalidArgument, "quasi-average order must lie in [0, 8]");
    }
}

Matrix weyl_weighted(const GridProbe &g, int j, double q_offset) {
    const int n = g.grid.size();
    Matrix m = g.kernel;
    if (j == 0) return m;
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            const double mid = 0.5 * (g.grid.q(a) + g.grid.q(b)) - q_offset;
            m(a, b) *= std::pow(mid, j);
        }
    }
    return m;
}

} // namespace

GaussianProbe make_gaussian_probe(double q_bar, double delta_Q, double delta_P) {
    if (!std::isfinite(q_bar)) fail(ErrorCode::InvalidArgument, "q_bar must be finite");
    if (!(delta_Q > 0.0) || !std::isfinite(delta_Q)) {
        fail(ErrorCode::InvalidArgument, "delta_Q must be positive");
    }
    if (!(delta_P > 0.0) || !std::isfinite(delta_P)) {
        fail(ErrorCode::InvalidArgument, "delta_P must be positive");
    }
    const double coherence = 0.5 / delta_Q;
    if (coherence > delta_P * (1.0 + 1e-12)) {
        std::ostringstream os;
        os << "1/(2 delta_Q) = " << coherence << " exceeds delta_P = " << delta_P
           << "; the Wigner function would be unphysical";
        fail(ErrorCode::InvalidArgument, os.str());
    }
    return GaussianProbe{q_bar, delta_Q, delta_P};
}

GaussianProbe pure_gaussian_probe(double q_bar, double delta_Q) {
    return make_gaussian_probe(q_bar, delta_Q, 0.5 / delta_Q);
}

QGrid::QGrid(int n, double q_min, double dq) : n_(n), q_min_(q_min), dq_(dq) {
    if (n < 2) fail(ErrorCode::InvalidArgument, "grid needs at least two points");
    if (!(dq > 0.0)) fail(ErrorCode::InvalidArgument, "grid spacing must be positive");
}

QGrid QGrid::centered(int n, double center, double span) {
    if (!(span > 0.0)) fail(ErrorCode::InvalidArgument, "grid span must be positive");
    const double dq = span / n;
    return QGrid(n, center - 0.5 * (n - 1) * dq, dq);
}

double QGrid::dp() const {
    return 2.0 * std::numbers::pi / (n_ * dq_);
}

RealVector QGrid::q_values() const {
    RealVector v(n_);
    for (int m = 0; m < n_; ++m) v(m) = q(m);
    return v;
}

RealVector QGrid::p_values() const {
    RealVector v(n_);
    for (int k = 0; k < n_; ++k) v(k) = p(k);
    return v;
}

GridProbe make_grid_probe(QGrid grid, Matrix kernel) {
    const int n = grid.size();
    if (kernel.rows() != n || kernel.cols() != n) {
        fail(ErrorCode::DimMismatch, "kernel size does not match the grid");
    }
    const double defect = hermitian_defect(kernel);
    if (defect > kHermitianTol) fail(ErrorCode::NonHermitian, "probe kernel is not Hermitian");
    const double tr = kernel.trace().real();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream os;
        os << "probe kernel diagonal sums to " << tr;
        fail(ErrorCode::NonUnitTrace, os.str());
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (kernel + kernel.adjoint()),
                                             Eigen::EigenvaluesOnly);
    if (es.eigenvalues().minCoeff() < -kPsdTol) {
        fail(ErrorCode::NotPositive, "probe kernel has a negative eigenvalue");
    }
    if (edge_ratio(kernel) >= kEdgeTol) {
        fail(ErrorCode::SpanTooSmall, "probe kernel does not decay at the grid edges");
    }
    return GridProbe{grid, std::move(kernel)};
}

namespace {

Matrix gaussian_kernel(const GaussianProbe &probe, const QGrid &grid) {
    const int n = grid.size();
    const double norm = grid.dq() / (std::sqrt(2.0 * std::numbers::pi) * probe.delta_Q);
    Matrix k(n, n);
    for (int b = 0; b < n; ++b) {
        for (int a = 0; a < n; ++a) {
            const double mid = 0.5 * (grid.q(a) + grid.q(b)) - probe.q_bar;
            const double diff = grid.q(a) - grid.q(b);
            k(a, b) = norm * std::exp(-mid * mid / (2.0 * probe.delta_Q * probe.delta_Q) -
                                      0.5 * probe.delta_P * probe.delta_P * diff * diff);
        }
    }
    return k;
}

void check_momentum_room(const GaussianProbe &probe, const QGrid &grid) {
    const double p_edge = std::numbers::pi / grid.dq();
    const double z = p_edge / probe.delta_P;
    if (std::exp(-0.5 * z * z) >= kEdgeTol) {
        std::ostringstream os;
        os << "momentum grid half-width " << p_edge << " cannot hold delta_P = " << probe.delta_P
           << "; increase n_q";
        fail(ErrorCode::GridResolutionInsufficient, os.str());
    }
}

} // namespace

GridProbe to_grid(const GaussianProbe &probe, int n_q, double span) {
    if (n_q < 64 || !is_power_of_two(n_q)) {
        fail(ErrorCode::InvalidArgument, "n_q must be a power of two >= 64");
    }
    if (!(span >= 8.0 * probe.delta_Q)) {
        fail(ErrorCode::SpanTooSmall, "span must cover at least 8 standard deviations of q");
    }
    return sample_on_grid(probe, QGrid::centered(n_q, probe.q_bar, span));
}

GridProbe sample_on_grid(const GaussianProbe &probe, const QGrid &grid) {
    Matrix kernel = gaussian_kernel(probe, grid);
    if (edge_ratio(kernel) >= kEdgeTol) {
        std::ostringstream os;
        os << "span " << grid.span() << " leaves the Gaussian kernel above " << kEdgeTol
           << " of its peak at the grid edge";
        fail(ErrorCode::SpanTooSmall, os.str());
    }
    check_momentum_room(probe, grid);
    return GridProbe{grid, std::move(kernel)};
}

GridProbe gaussian_mixture_grid(const QGrid &grid, std::span<const double> weights,
                                std::span<const GaussianProbe> components) {
    if (weights.size() != components.size() || weights.empty()) {
        fail(ErrorCode::InvalidArgument, "mixture needs one weight per component");
    }
    Matrix kernel = Matrix::Zero(grid.size(), grid.size());
    for (size_t i = 0; i < weights.size(); ++i) {
        if (weights[i] < 0.0) fail(ErrorCode::InvalidArgument, "negative mixture weight");
        check_momentum_room(components[i], grid);
        kernel += weights[i] * gaussian_kernel(components[i], grid);
    }
    return make_grid_probe(grid, std::move(kernel));
}

Matrix dft_matrix(const QGrid &grid) {
    const int n = grid.size();
    Matrix u(n, n);
    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    for (int m = 0; m < n; ++m) {
        for (int k = 0; k < n; ++k) {
            u(k, m) = scale * std::exp(-kI * grid.p(k) * grid.q(m));
        }
    }
    return u;
}

PGridProbe p_representation(const GridProbe &probe) {
    const Matrix u = dft_matrix(probe.grid);
    return PGridProbe{probe.grid, u * probe.kernel * u.adjoint()};
}

GridProbe q_representation(const PGridProbe &probe) {
    const Matrix u = dft_matrix(probe.grid);
    return GridProbe{probe.grid, u.adjoint() * probe.kernel * u};
}

namespace {

// c_d = sum_m M(m + d, m) for d in [-(n-1), n-1], stored at index d + n - 1.
std::vector<Complex> diagonal_sums(const Matrix &m) {
    const Eigen::Index n = m.rows();
    std::vector<Complex> c(static_cast<size_t>(2 * n - 1), Complex(0.0));
    for (Eigen::Index col = 0; col < n; ++col) {
        for (Eigen::Index row = 0; row < n; ++row) {
            c[static_cast<size_t>(row - col + n - 1)] += m(row, col);
        }
    }
    return c;
}

} // namespace

Vector p_diagonal(const QGrid &grid, const Matrix &m) {
    const int n = grid.size();
    if (m.rows() != n || m.cols() != n) fail(ErrorCode::DimMismatch, "operator/grid size mismatch");
    const auto c = diagonal_sums(m);
    // p_k d dq = 2 pi (k - n/2) d / n, so the phases are n-th roots of unity.
    std::vector<Complex> roots(static_cast<size_t>(n));
    for (int r = 0; r < n; ++r) {
        roots[static_cast<size_t>(r)] = std::polar(1.0, -2.0 * std::numbers::pi * r / n);
    }
    Vector out(n);
    for (int k = 0; k < n; ++k) {
        const long long kk = k - n / 2;
        Complex sum = 0.0;
        for (int d = -(n - 1); d <= n - 1; ++d) {
            long long r = (kk * d) % n;
            if (r < 0) r += n;
            sum += c[static_cast<size_t>(d + n - 1)] * roots[static_cast<size_t>(r)];
        }
        out(k) = sum / static_cast<double>(n);
    }
    return out;
}

Complex p_density_at(const QGrid &grid, const Matrix &m, double p) {
    const int n = grid.size();
    if (m.rows() != n || m.cols() != n) fail(ErrorCode::DimMismatch, "operator/grid size mismatch");
    const auto c = diagonal_sums(m);
    Complex sum = 0.0;
    for (int d = -(n - 1); d <= n - 1; ++d) {
        sum += c[static_cast<size_t>(d + n - 1)] * std::polar(1.0, -p * d * grid.dq());
    }
    return sum * grid.dq() / (2.0 * std::numbers::pi);
}

MomentumFunction MomentumFunction::power(int m) {
    if (m < 0) fail(ErrorCode::InvalidArgument, "negative power");
    MomentumFunction f;
    f.coeffs_.assign(static_cast<size_t>(m + 1), Complex(0.0));
    f.coeffs_.back() = 1.0;
    return f;
}

MomentumFunction MomentumFunction::plane_wave(double chi) {
    return plane_wave_power(chi, 0);
}

MomentumFunction MomentumFunction::plane_wave_power(double chi, int m) {
    MomentumFunction f = power(m);
    f.chi_ = chi;
    return f;
}

Complex MomentumFunction::operator()(double p) const {
    Complex poly = 0.0;
    for (size_t m = coeffs_.size(); m-- > 0;) poly = poly * p + coeffs_[m];
    return poly * std::exp(kI * chi_ * p);
}

MomentumFunction MomentumFunction::derivative() const {
    // (e^{i chi p} sum c_m p^m)' = e^{i chi p} sum (i chi c_m + (m+1) c_{m+1}) p^m
    MomentumFunction d;
    d.chi_ = chi_;
    d.coeffs_.assign(coeffs_.size(), Complex(0.0));
    for (size_t m = 0; m < coeffs_.size(); ++m) {
        d.coeffs_[m] += kI * chi_ * coeffs_[m];
        if (m + 1 < coeffs_.size()) d.coeffs_[m] += static_cast<double>(m + 1) * coeffs_[m + 1];
    }
    return d;
}

MomentumFunction MomentumFunction::operator*(Complex s) const {
    MomentumFunction r = *this;
    for (auto &c : r.coeffs_) c *= s;
    return r;
}

MomentumFunction MomentumFunction::operator+(const MomentumFunction &o) const {
    if (o.chi_ != chi_) fail(ErrorCode::InvalidArgument, "adding functions with different chi");
    MomentumFunction r = *this;
    if (o.coeffs_.size() > r.coeffs_.size()) r.coeffs_.resize(o.coeffs_.size(), Complex(0.0));
    for (size_t m = 0; m < o.coeffs_.size(); ++m) r.coeffs_[m] += o.coeffs_[m];
    return r;
}

Matrix momentum_operator(const QGrid &grid, const MomentumFunction &f) {
    const Matrix u = dft_matrix(grid);
    Vector values(grid.size());
    for (int k = 0; k < grid.size(); ++k) values(k) = f(grid.p(k));
    return u.adjoint() * values.asDiagonal() * u;
}

Matrix position_operator(const QGrid &grid) {
    return grid.q_values().cast<Complex>().asDiagonal();
}

Complex quasi_average(const ProbeState &probe, const MomentumOperand &f, int j, double q_offset) {
    require_order(j);
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) {
        const auto *fn = std::get_if<MomentumFunction>(&f);
        if (fn == nullptr) {
            fail(ErrorCode::UnsupportedFunction,
                 "a Gaussian probe supports only analytic functions p^m exp(i chi p)");
        }
        // The Gaussian Wigner function factorizes, so the quasi-average does too.
        const Complex p_part = gaussian_p_average(*fn, g->delta_P);
        const Complex q_part = shifted_gaussian_power(g->q_bar - q_offset, g->delta_Q, j);
        return p_part * q_part;
    }
    const auto &grid_probe = std::get<GridProbe>(probe);
    const Matrix weighted = weyl_weighted(grid_probe, j, q_offset);
    if (const auto *fn = std::get_if<MomentumFunction>(&f)) {
        const Vector diag = p_diagonal(grid_probe.grid, weighted);
        Complex sum = 0.0;
        for (int k = 0; k < grid_probe.grid.size(); ++k) sum += (*fn)(grid_probe.grid.p(k)) * diag(k);
        return sum;
    }
    const Matrix &fm = std::get<Matrix>(f);
    if (fm.rows() != weighted.rows() || fm.cols() != weighted.cols()) {
        fail(ErrorCode::DimMismatch, "operator does not match the probe grid");
    }
    return (fm.array() * weighted.transpose().array()).sum();
}

Complex initial_charfunc(const ProbeState &probe, Quadrature which, double chi, int weight_power,
                         double q_offset) {
    require_order(weight_power);
    if (which == Quadrature::P) {
        return quasi_average(probe, MomentumFunction::plane_wave(chi), weight_power, q_offset);
    }
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) {
        return gaussian_power_charfunc(g->q_bar - q_offset, g->delta_Q, chi, weight_power) *
               std::exp(kI * chi * q_offset);
    }
    const auto &gp = std::get<GridProbe>(probe);
    Complex sum = 0.0;
    for (int m = 0; m < gp.grid.size(); ++m) {
        const double q = gp.grid.q(m);
        sum += gp.kernel(m, m) * std::pow(q - q_offset, weight_power) * std::exp(kI * chi * q);
    }
    return sum;
}

Complex gaussian_power_charfunc(double mean, double sigma, double kappa, int n) {
    const double s2 = sigma * sigma;
    return std::exp(kI * kappa * mean - 0.5 * kappa * kappa * s2) *
           shifted_gaussian_power(mean + kI * kappa * s2, sigma, n);
}

double gaussian_moment(double sigma, int j) {
    if (j < 0) fail(ErrorCode::InvalidArgument, "negative moment order");
    if (j % 2 == 1) return 0.0;
    if (j > 300) return std::exp(log_gaussian_even_moment(sigma, j));
    double r = 1.0;
    for (int i = j - 1; i > 0; i -= 2) r *= i * sigma * sigma;
    return r;
}

double log_gaussian_even_moment(double sigma, int j) {
    if (j < 0 || j % 2 != 0) fail(ErrorCode::InvalidArgument, "log moment needs even order");
    // (j-1)!! = j! / (2^{j/2} (j/2)!)
    return std::lgamma(j + 1.0) - 0.5 * j * std::log(2.0) - std::lgamma(0.5 * j + 1.0) +
           j * std::log(sigma);
}

double q_moment(const ProbeState &probe, int n, double offset) {
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) {
        return shifted_gaussian_power(g->q_bar - offset, g->delta_Q, n).real();
    }
    const auto &gp = std::get<GridProbe>(probe);
    double sum = 0.0;
    for (int m = 0; m < gp.grid.size(); ++m) {
        sum += gp.kernel(m, m).real() * std::pow(gp.grid.q(m) - offset, n);
    }
    return sum;
}

double p_moment(const ProbeState &probe, int n) {
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) return gaussian_moment(g->delta_P, n);
    const auto &gp = std::get<GridProbe>(probe);
    const Vector diag = p_diagonal(gp.grid, gp.kernel);
    double sum = 0.0;
    for (int k = 0; k < gp.grid.size(); ++k) sum += diag(k).real() * std::pow(gp.grid.p(k), n);
    return sum;
}

double q_star(const ProbeState &probe) {
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) return g->q_bar;
    const auto &gp = std::get<GridProbe>(probe);
    Eigen::Index best = 0;
    gp.kernel.diagonal().real().maxCoeff(&best);
    return gp.grid.q(static_cast<int>(best));
}

double p_spread(const ProbeState &probe) {
    const double mean = p_moment(probe, 1);
    return std::sqrt(std::max(0.0, p_moment(probe, 2) - mean * mean));
}

} // namespace weakfcs
