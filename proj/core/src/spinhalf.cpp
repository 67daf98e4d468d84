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

#include "weakfcs/spinhalf.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>
#include <vector>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

constexpr double kUnitTol = 1e-12;

double dot(const Vec3 &a, const Vec3 &b) { return a[0] * b[0] + a[1] * b[1] + a[2] * b[2]; }

Vec3 cross(const Vec3 &a, const Vec3 &b) {
    return {a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]};
}

double log_sum_exp(const std::vector<double> &xs) {
    if (xs.empty()) return -std::numeric_limits<double>::infinity();
    const double m = *std::max_element(xs.begin(), xs.end());
    if (!std::isfinite(m)) return m;
    double s = 0.0;
    for (double x : xs) s += std::exp(x - m);
    return m + std::log(s);
}

double gaussian_density(double x, double sigma) {
    return std::exp(-0.5 * x * x / (sigma * sigma)) / (std::sqrt(2.0 * std::numbers::pi) * sigma);
}

// log of C(j,2k) bar{p^{j-2k}} l^{2k} / bar{p^j} for k = 1 .. j/2.
std::vector<double> log_even_ratios(int j, double l, double dp) {
    std::vector<double> out;
    const double step = 2.0 * std::log(std::abs(l) / dp);
    double acc = 0.0;
    for (int k = 1; 2 * k <= j; ++k) {
        acc += std::log(static_cast<double>(j - 2 * k + 2)) -
               std::log(2.0 * k * (2.0 * k - 1.0)) + step;
        out.push_back(acc);
    }
    return out;
}

// log of C(j,2k) bar{p^{2k}} |l|^{j-2k} for k = 0 .. (j-1)/2, j odd.
std::vector<double> log_odd_terms(int j, double l, double dp) {
    std::vector<double> out;
    const double step = 2.0 * std::log(dp / std::abs(l));
    double acc = j * std::log(std::abs(l));
    out.push_back(acc);
    for (int k = 1; 2 * k < j; ++k) {
        acc += std::log(static_cast<double>(j - 2 * k + 2)) +
               std::log(static_cast<double>(j - 2 * k + 1)) - std::log(2.0 * k) + step;
        out.push_back(acc);
    }
    return out;
}

void check_order(int j) {
    if (j < 0 || j > 1000) fail(ErrorCode::InvalidArgument, "moment order must lie in [0, 1000]");
}

// N2 of the expansion in lambda.
double spin_n2(const SpinSetup &s, const SpinWeakValues &w) {
    const double qb = s.probe.q_bar;
    const double q2 = qb * qb + s.probe.delta_Q * s.probe.delta_Q;
    return w.alpha0 + 2.0 * s.lambda * qb * w.alpha1.imag() +
           s.lambda * s.lambda * q2 * (w.alpha11 - w.alpha0);
}

ConditionalDistribution gaussian_spin_pdf(const SpinSetup &s, const GaussianProbe &g) {
    SpinSetup sg = s;
    sg.probe = g;
    const SpinWeakValues w = spin_weak_values(sg);
    const double n = spin_normalization(sg);
    if (n <= kZeroPostselectionTol) fail(ErrorCode::ZeroPostselection, "N vanishes");
    const double l = s.lambda;
    const double damp = std::exp(-0.5 * l * l / (g.coherence_scale() * g.coherence_scale()));
    const double cross_term = std::cos(2.0 * l * g.q_bar) * (w.alpha0 - w.alpha11) +
                              2.0 * std::sin(2.0 * l * g.q_bar) * w.alpha1.imag();
    const QGrid grid = default_grid(to_measurement_setup(sg));

    ConditionalDistribution d;
    d.support = grid.p_values();
    d.cell_width = grid.dp();
    d.normalization = n;
    d.pdf.resize(d.support.size());
    for (Eigen::Index k = 0; k < d.support.size(); ++k) {
        const double p = d.support(k);
        double sum = 0.0;
        for (int sigma : {-1, 1}) {
            sum += (w.alpha0 + w.alpha11 + 2.0 * sigma * w.alpha1.real()) *
                   gaussian_density(p - l * sigma, g.delta_P);
            sum += cross_term * gaussian_density(p, g.delta_P) * damp;
        }
        d.pdf(k) = sum / (4.0 * n);
    }
    return d;
}

ConditionalDistribution grid_spin_pdf(const SpinSetup &s, const GridProbe &gp) {
    const SpinWeakValues w = spin_weak_values(s);
    const QGrid &grid = gp.grid;
    const int nq = grid.size();
    const double l = s.lambda;

    double n = 0.0;
    for (int m = 0; m < nq; ++m) {
        const double c = std::cos(2.0 * l * grid.q(m));
        const double sn = std::sin(2.0 * l * grid.q(m));
        n += gp.kernel(m, m).real() *
             (0.5 * (1.0 + c) * w.alpha0 + sn * w.alpha1.imag() + 0.5 * (1.0 - c) * w.alpha11);
    }
    if (n <= kZeroPostselectionTol) fail(ErrorCode::ZeroPostselection, "N vanishes");

    // rho0(p1, p2) = (dq / 2 pi) u(p1)^H K u(p2), u(p)_m = exp(i p q_m).
    auto wave = [&](double p) {
        Vector u(nq);
        for (int m = 0; m < nq; ++m) u(m) = std::polar(1.0, p * grid.q(m));
        return u;
    };
    const double scale = grid.dq() / (2.0 * std::numbers::pi);
    const Complex im1(0.0, 2.0 * w.alpha1.imag());

    ConditionalDistribution d;
    d.support = grid.p_values();
    d.cell_width = grid.dp();
    d.normalization = n;
    d.pdf.resize(nq);
    for (int k = 0; k < nq; ++k) {
        const double p = d.support(k);
        const Vector um = wave(p - l);
        const Vector up = wave(p + l);
        const Vector km = gp.kernel * um;
        const Vector kp = gp.kernel * up;
        const double mm = scale * um.dot(km).real();
        const double pp = scale * up.dot(kp).real();
        const Complex pm = scale * up.dot(km);
        const Complex mp = scale * um.dot(kp);
        double sum = (w.alpha0 + w.alpha11 + 2.0 * w.alpha1.real()) * mm +
                     (w.alpha0 + w.alpha11 - 2.0 * w.alpha1.real()) * pp;
        sum += ((w.alpha0 - w.alpha11 + im1) * pm + (w.alpha0 - w.alpha11 - im1) * mp).real();
        d.pdf(k) = sum / (4.0 * n);
    }
    return d;
}

} // namespace

SpinSetup make_spin_setup(const Vec3 &n_i, const Vec3 &n_f, const Vec3 &n, double lambda,
                          const GaussianProbe &probe) {
    if (std::abs(std::sqrt(dot(n, n)) - 1.0) > kUnitTol) {
        fail(ErrorCode::InvalidArgument, "measured direction must be a unit vector");
    }
    if (dot(n_i, n_i) > 1.0 + kUnitTol || dot(n_f, n_f) > 1.0 + kUnitTol) {
        fail(ErrorCode::InvalidArgument, "polarizations must satisfy |n| <= 1");
    }
    if (!std::isfinite(lambda)) fail(ErrorCode::InvalidArgument, "lambda must be finite");
    return SpinSetup{n_i, n_f, n, lambda, probe};
}

SpinSetup coplanar_setup(double theta, double lambda, const GaussianProbe &probe) {
    return make_spin_setup({0.0, 0.0, 1.0}, {std::sin(theta), 0.0, std::cos(theta)},
                           {1.0, 0.0, 0.0}, lambda, probe);
}

MeasurementSetup to_measurement_setup(const SpinSetup &s, GridOptions grid) {
    return make_setup(s.lambda, validate_density(bloch_density(s.n_i)),
                      validate_density(bloch_density(s.n_f)),
                      spectral_decompose(spin_component(s.n)), s.probe, grid);
}

SpinWeakValues spin_weak_values(const SpinSetup &s) {
    const double c = dot(s.n_i, s.n_f);
    const Vec3 x = cross(s.n_f, s.n_i);
    SpinWeakValues w;
    w.alpha0 = 0.5 * (1.0 + c);
    w.alpha1 = 0.5 * Complex(dot(s.n, s.n_i) + dot(s.n, s.n_f), dot(s.n, x));
    w.alpha11 = 0.5 * (1.0 - c + 2.0 * dot(s.n, s.n_i) * dot(s.n, s.n_f));
    return w;
}

double spin_normalization(const SpinSetup &s) {
    const SpinWeakValues w = spin_weak_values(s);
    const double l = s.lambda;
    const double dp = s.probe.coherence_scale();
    const double damp = std::exp(-0.5 * l * l / (dp * dp));
    const double c = std::cos(2.0 * l * s.probe.q_bar) * damp;
    const double sn = std::sin(2.0 * l * s.probe.q_bar) * damp;
    return 0.5 * (1.0 + c) * w.alpha0 + sn * w.alpha1.imag() + 0.5 * (1.0 - c) * w.alpha11;
}

ConditionalDistribution spin_pdf(const SpinSetup &s) { return gaussian_spin_pdf(s, s.probe); }

ConditionalDistribution spin_pdf(const SpinSetup &s, const ProbeState &probe) {
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) return gaussian_spin_pdf(s, *g);
    return grid_spin_pdf(s, std::get<GridProbe>(probe));
}

double spin_exact_moment(const SpinSetup &s, int j) {
    check_order(j);
    if (j == 0) return 1.0;
    const double dp = s.probe.delta_P;
    const SpinWeakValues w = spin_weak_values(s);
    const double n = spin_normalization(s);
    if (n <= kZeroPostselectionTol) fail(ErrorCode::ZeroPostselection, "N vanishes");
    if (j % 2 == 0) {
        const double base = log_gaussian_even_moment(dp, j);
        if (s.lambda == 0.0) return std::exp(base);
        const double coef = (w.alpha0 + w.alpha11) / (2.0 * n);
        const double rest = log_sum_exp(log_even_ratios(j, s.lambda, dp));
        return std::exp(base) * (1.0 + coef * std::exp(rest));
    }
    if (s.lambda == 0.0) return 0.0;
    const double sign = s.lambda > 0.0 ? 1.0 : -1.0;
    return sign * w.alpha1.real() / n * std::exp(log_sum_exp(log_odd_terms(j, s.lambda, dp)));
}

double spin_scaled_moment(const SpinSetup &s, int j) {
    if (j < 2 || j % 2 != 0) fail(ErrorCode::InvalidArgument, "scaled moments need even j >= 2");
    check_order(j);
    if (s.lambda == 0.0) return 0.0;
    const SpinWeakValues w = spin_weak_values(s);
    const double n = spin_normalization(s);
    if (n <= kZeroPostselectionTol) fail(ErrorCode::ZeroPostselection, "N vanishes");
    const double rest = log_sum_exp(log_even_ratios(j, s.lambda, s.probe.delta_P));
    return (w.alpha0 + w.alpha11) / (2.0 * n * j) * std::exp(rest);
}

double spin_interp_moment(const SpinSetup &s, int j) {
    check_order(j);
    const double l = s.lambda;
    const double dp = s.probe.delta_P;
    const double n_star = l == 0.0 ? std::numeric_limits<double>::infinity() : dp * dp / (l * l);
    if (j > n_star) {
        std::ostringstream os;
        os << "moment order " << j << " exceeds the validity order n* = " << n_star;
        fail(ErrorCode::BeyondValidity, os.str());
    }
    if (j == 0) return 1.0;
    const SpinWeakValues w = spin_weak_values(s);
    const double n2 = spin_n2(s, w);
    if (j % 2 == 0) {
        const double lead = std::exp(log_gaussian_even_moment(dp, j));
        const double lower = std::exp(log_gaussian_even_moment(dp, j - 2));
        return lead + l * l * 0.5 * j * (j - 1) * lower * (w.alpha0 + w.alpha11) / (2.0 * n2);
    }
    return l * j * std::exp(log_gaussian_even_moment(dp, j - 1)) * w.alpha1.real() / n2;
}

ScalingPoint universal_scaling(const SpinSetup &s, int j) {
    ScalingPoint out;
    out.exact = spin_scaled_moment(s, j);
    const SpinWeakValues w = spin_weak_values(s);
    const double dp = s.probe.delta_P;
    const double l = s.lambda;
    out.predicted = (w.alpha0 + w.alpha11) * l * l / (4.0 * dp * dp * spin_normalization(s));
    const double coh = s.probe.coherence_scale();
    out.plateau = coh * coh / (dp * dp);
    out.n_star = l == 0.0 ? std::numeric_limits<double>::infinity() : dp * dp / (l * l);
    return out;
}

} // namespace weakfcs
