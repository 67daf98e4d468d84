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

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

constexpr Complex kI{0.0, 1.0};
constexpr double kGuardTol = 1e-10;

double binomial(int n, int k) {
    if (k < 0 || k > n) return 0.0;
    double r = 1.0;
    for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
    return r;
}

double log_binomial(int n, int k) {
    return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

/// Probe averages of F between powers of q' = q - offset.
struct Sandwich {
    Complex f;    // <F>
    Complex qf;   // <q'F>
    Complex fq;   // <Fq'>
    Complex qfq;  // <q'Fq'>
    Complex q2f;  // <q'^2 F>
    Complex fq2;  // <F q'^2>
};

Sandwich unit_sandwich(const ProbeState &probe, double offset) {
    const double m1 = q_moment(probe, 1, offset);
    const double m2 = q_moment(probe, 2, offset);
    return Sandwich{1.0, m1, m1, m2, m2, m2};
}

Sandwich commuting_sandwich(Complex g0, Complex g1, Complex g2) {
    return Sandwich{g0, g1, g1, g2, g2, g2};
}

// F = exp(i chi q).
Sandwich position_wave_sandwich(const ProbeState &probe, double chi, double offset) {
    return commuting_sandwich(initial_charfunc(probe, Quadrature::Q, chi, 0, offset),
                              initial_charfunc(probe, Quadrature::Q, chi, 1, offset),
                              initial_charfunc(probe, Quadrature::Q, chi, 2, offset));
}

// F = q.
Sandwich position_sandwich(const ProbeState &probe, double offset) {
    auto g = [&](int n) {
        return q_moment(probe, n + 1, offset) + offset * q_moment(probe, n, offset);
    };
    return commuting_sandwich(g(0), g(1), g(2));
}

// F = f(p), through the Weyl-ordered quasi-averages S_n = bar{f (q')^n}:
//   q'f = S1 + i f'/2,  f q' = S1 - i f'/2,  q'f q' = S2 + f''/4,
//   q'^2 f = S2 + i S1[f'] - f''/4,  f q'^2 = S2 - i S1[f'] - f''/4.
Sandwich momentum_sandwich(const ProbeState &probe, const MomentumFunction &f, double offset) {
    const MomentumFunction d1 = f.derivative();
    const MomentumFunction d2 = d1.derivative();
    const Complex s0 = quasi_average(probe, f, 0, offset);
    const Complex s1 = quasi_average(probe, f, 1, offset);
    const Complex s2 = quasi_average(probe, f, 2, offset);
    const Complex f1 = quasi_average(probe, d1, 0, offset);
    const Complex f2 = quasi_average(probe, d2, 0, offset);
    const Complex s1d = quasi_average(probe, d1, 1, offset);
    Sandwich w;
    w.f = s0;
    w.qf = s1 + 0.5 * kI * f1;
    w.fq = s1 - 0.5 * kI * f1;
    w.qfq = s2 + 0.25 * f2;
    w.q2f = s2 + kI * s1d - 0.25 * f2;
    w.fq2 = s2 - kI * s1d - 0.25 * f2;
    return w;
}

// Explicit operator on the probe grid: Tr{Q'^a F Q'^b K} = u_a^T (F o K^T) u_b.
Sandwich matrix_sandwich(const GridProbe &gp, const Matrix &f, double offset) {
    if (f.rows() != gp.grid.size()) fail(ErrorCode::DimMismatch, "operator/probe grid mismatch");
    const Matrix g = f.cwiseProduct(gp.kernel.transpose());
    const int n = gp.grid.size();
    Vector u0 = Vector::Ones(n);
    Vector u1(n);
    Vector u2(n);
    for (int m = 0; m < n; ++m) {
        const double q = gp.grid.q(m) - offset;
        u1(m) = q;
        u2(m) = q * q;
    }
    auto x = [&](const Vector &a, const Vector &b) { return (a.transpose() * g * b)(0, 0); };
    return Sandwich{x(u0, u0), x(u1, u0), x(u0, u1), x(u1, u1), x(u2, u0), x(u0, u2)};
}

GridProbe probe_on_grid(const ProbeState &probe, const QGrid &grid) {
    if (const auto *gp = std::get_if<GridProbe>(&probe)) {
        if (gp->grid.size() != grid.size()) {
            fail(ErrorCode::DimMismatch, "observable and probe live on different grids");
        }
        return *gp;
    }
    return sample_on_grid(std::get<GaussianProbe>(probe), grid);
}

// Sandwich of exp(i chi O).
Sandwich wave_sandwich(const ProbeState &probe, const ProbeObservable &obs, double chi,
                       double offset) {
    if (std::holds_alternative<PositionQ>(obs)) return position_wave_sandwich(probe, chi, offset);
    if (std::holds_alternative<MomentumP>(obs)) {
        return momentum_sandwich(probe, MomentumFunction::plane_wave(chi), offset);
    }
    const auto &go = std::get<GridObservable>(obs);
    return matrix_sandwich(probe_on_grid(probe, go.grid()), go.exp_i(chi), offset);
}

// Sandwich of O itself.
Sandwich linear_sandwich(const ProbeState &probe, const ProbeObservable &obs, double offset) {
    if (std::holds_alternative<PositionQ>(obs)) return position_sandwich(probe, offset);
    if (std::holds_alternative<MomentumP>(obs)) {
        return momentum_sandwich(probe, MomentumFunction::power(1), offset);
    }
    const auto &go = std::get<GridObservable>(obs);
    return matrix_sandwich(probe_on_grid(probe, go.grid()), go.matrix(), offset);
}

struct Coefficients {
    Complex a0;
    double re1 = 0.0;
    double im1 = 0.0;
    double a11 = 0.0;
    double re2 = 0.0;
    double im2 = 0.0;
};

Coefficients normal_coefficients(const WeakValueTable &t) {
    return Coefficients{t.alpha0(),          t.alpha1().real(), t.alpha1().imag(),
                        t.alpha11().real(), t.alpha2().real(), t.alpha2().imag()};
}

Coefficients canonical_coefficients(const WeakValueTable &t, double eps_orth) {
    const CanonicalWeakValues c = canonical_from_table(t, eps_orth);
    return Coefficients{1.0, c.A_w.real(), c.A_w.imag(), c.B_w, c.C_w.real(), c.C_w.imag()};
}

Complex polynomial(const Sandwich &w, const Coefficients &c, double lambda, bool keep_alpha2) {
    Complex num = w.f * c.a0;
    num += lambda * (-kI * (w.qf - w.fq) * c.re1 + (w.qf + w.fq) * c.im1);
    Complex second = w.qfq * c.a11;
    if (keep_alpha2) {
        second += -0.5 * (w.q2f + w.fq2) * c.re2 - 0.5 * kI * (w.q2f - w.fq2) * c.im2;
    }
    return num + lambda * lambda * second;
}

// The first-order probe coefficients or <qFq> vanish: alpha2 carries the
// leading correction and must stay in the numerator.
bool alpha2_needed(const Sandwich &w) {
    const double scale = std::max({std::abs(w.f), std::abs(w.qf), std::abs(w.fq), std::abs(w.qfq),
                                   std::abs(w.q2f), std::abs(w.fq2)});
    const double tol = kGuardTol * scale;
    const bool first_order_vanishes = std::abs(w.qf - w.fq) <= tol && std::abs(w.qf + w.fq) <= tol;
    return first_order_vanishes || std::abs(w.qfq) <= tol;
}

enum class Alpha2Policy { Guard, Drop };

Complex expand(const Sandwich &w, const Sandwich &unit, const ExpansionPoint &ep, double lambda,
               ExpansionVariant v, Alpha2Policy policy, const PerturbOptions &opts) {
    const bool keep = policy == Alpha2Policy::Guard && alpha2_needed(w);
    switch (v) {
    case ExpansionVariant::Full2ndOrder: {
        const Coefficients c = normal_coefficients(ep.table);
        return polynomial(w, c, lambda, true) / polynomial(unit, c, lambda, true);
    }
    case ExpansionVariant::Interpolating: {
        const Coefficients c = normal_coefficients(ep.table);
        return polynomial(w, c, lambda, keep) / polynomial(unit, c, lambda, false);
    }
    case ExpansionVariant::ABOnly: {
        const Coefficients c = canonical_coefficients(ep.table, opts.eps_orth);
        return polynomial(w, c, lambda, keep) / polynomial(unit, c, lambda, false);
    }
    }
    return Complex(std::numeric_limits<double>::quiet_NaN());
}

double momentum_spread(const ProbeState &probe) {
    if (const auto *g = std::get_if<GaussianProbe>(&probe)) return g->delta_P;
    return p_spread(probe);
}

} // namespace

ExpansionPoint expansion_point(const MeasurementSetup &s, const PerturbOptions &opts) {
    ExpansionPoint ep;
    ep.q_star = q_star(s.probe);
    const double shift = std::abs(s.lambda * ep.q_star) * s.A.max_abs_eigenvalue();
    ep.shifted = shift > opts.large_lambda_qstar;
    ep.q_offset = ep.shifted ? ep.q_star : 0.0;
    ep.table = weak_value_table(s.rho_i, s.rho_f, s.A, 2, 0.0,
                                ep.shifted ? s.lambda * ep.q_star : 0.0);
    return ep;
}

std::vector<double> n_series(const MeasurementSetup &s, int n_max) {
    if (n_max < 0 || n_max > 12) fail(ErrorCode::InvalidArgument, "n_max must lie in [0, 12]");
    const WeakValueTable t = weak_value_table(s.rho_i, s.rho_f, s.A, n_max);
    std::vector<double> sums;
    Complex acc = 0.0;
    double factorial = 1.0;
    for (int n = 0; n <= n_max; ++n) {
        if (n > 0) factorial *= n;
        Complex inner = 0.0;
        for (int j = 0; j <= n; ++j) {
            inner += ((j % 2 == 0) ? 1.0 : -1.0) * binomial(n, j) * t(j, n - j);
        }
        acc += std::pow(kI * s.lambda, n) / factorial * q_moment(s.probe, n) * inner;
        sums.push_back(acc.real());
    }
    return sums;
}

Denominators denominators(const MeasurementSetup &s, const PerturbOptions &opts) {
    const ExpansionPoint ep = expansion_point(s, opts);
    const Sandwich unit = unit_sandwich(s.probe, ep.q_offset);
    const Coefficients c = normal_coefficients(ep.table);
    Denominators d;
    d.n2 = polynomial(unit, c, s.lambda, true).real();
    d.n2_prime = polynomial(unit, c, s.lambda, false).real();
    const double a0 = ep.table.alpha0().real();
    if (std::abs(a0) >= opts.eps_orth) d.n2_ab = d.n2_prime / a0;
    return d;
}

double ab_denominator(const MeasurementSetup &s, const PerturbOptions &opts) {
    const ExpansionPoint ep = expansion_point(s, opts);
    const Coefficients c = canonical_coefficients(ep.table, opts.eps_orth);
    return polynomial(unit_sandwich(s.probe, ep.q_offset), c, s.lambda, false).real();
}

Complex charfunc_q(const MeasurementSetup &s, double chi, ExpansionVariant v,
                   const PerturbOptions &opts) {
    const ExpansionPoint ep = expansion_point(s, opts);
    return expand(position_wave_sandwich(s.probe, chi, ep.q_offset),
                  unit_sandwich(s.probe, ep.q_offset), ep, s.lambda, v, Alpha2Policy::Drop, opts);
}

MomentEstimate moment_p_gaussian(const MeasurementSetup &s, int j, ExpansionVariant v,
                                 const PerturbOptions &opts) {
    if (!std::holds_alternative<GaussianProbe>(s.probe)) {
        fail(ErrorCode::InvalidArgument, "moment_p_gaussian needs a Gaussian probe");
    }
    if (j < 0) fail(ErrorCode::InvalidArgument, "moment order must be >= 0");
    MomentEstimate est;
    est.validity_n_star = validity_order(s);
    if (j > est.validity_n_star) {
        std::ostringstream os;
        os << "moment order " << j << " exceeds the validity order n* = " << est.validity_n_star;
        fail(ErrorCode::BeyondValidity, os.str());
    }
    if (j == 0) {
        est.value = 1.0;
        return est;
    }
    const ExpansionPoint ep = expansion_point(s, opts);
    est.value = expand(momentum_sandwich(s.probe, MomentumFunction::power(j), ep.q_offset),
                       unit_sandwich(s.probe, ep.q_offset), ep, s.lambda, v, Alpha2Policy::Guard,
                       opts)
                    .real();
    return est;
}

MomentEstimate moment_p_general(const MeasurementSetup &s, int j, const PerturbOptions &opts) {
    if (j < 0 || j > 8) fail(ErrorCode::InvalidArgument, "moment order must lie in [0, 8]");
    MomentEstimate est;
    est.validity_n_star = validity_order(s);
    if (j == 0) {
        est.value = 1.0;
        return est;
    }
    const ExpansionPoint ep = expansion_point(s, opts);
    est.value = expand(momentum_sandwich(s.probe, MomentumFunction::power(j), ep.q_offset),
                       unit_sandwich(s.probe, ep.q_offset), ep, s.lambda,
                       ExpansionVariant::Full2ndOrder, Alpha2Policy::Guard, opts)
                    .real();
    return est;
}

Complex charfunc_p(const MeasurementSetup &s, double chi, CharfuncForm form,
                   const PerturbOptions &opts) {
    if (form == CharfuncForm::Strict2nd) return charfunc_obs(s, MomentumP{}, chi, opts);
    const ExpansionPoint ep = expansion_point(s, opts);
    const double offset = ep.q_offset;
    const MomentumFunction wave = MomentumFunction::plane_wave(chi);
    const Complex s0 = quasi_average(s.probe, wave, 0, offset);
    const Complex s1 = quasi_average(s.probe, wave, 1, offset);
    const Complex s2 = quasi_average(s.probe, wave, 2, offset);
    const WeakValueTable tz = weak_value_table(s.rho_i, s.rho_f, s.A, 2, 0.5 * s.lambda * chi,
                                               ep.shifted ? s.lambda * ep.q_star : 0.0);
    const double l = s.lambda;
    const Complex num = s0 * tz.alpha0() + 2.0 * l * s1 * tz.im_alpha1() +
                        l * l * s2 * (tz.alpha11() - tz.re_alpha2());
    const Complex den = polynomial(unit_sandwich(s.probe, offset), normal_coefficients(ep.table),
                                   l, true);
    return num / den;
}

Complex charfunc_obs(const MeasurementSetup &s, const ProbeObservable &obs, double chi,
                     const PerturbOptions &opts) {
    const ExpansionPoint ep = expansion_point(s, opts);
    return expand(wave_sandwich(s.probe, obs, chi, ep.q_offset),
                  unit_sandwich(s.probe, ep.q_offset), ep, s.lambda,
                  ExpansionVariant::Full2ndOrder, Alpha2Policy::Drop, opts);
}

double expectation_obs(const MeasurementSetup &s, const ProbeObservable &obs, ExpansionVariant v,
                       const PerturbOptions &opts) {
    const ExpansionPoint ep = expansion_point(s, opts);
    return expand(linear_sandwich(s.probe, obs, ep.q_offset), unit_sandwich(s.probe, ep.q_offset),
                  ep, s.lambda, v, Alpha2Policy::Guard, opts)
        .real();
}

Complex orthogonal_limit(const ProbeState &probe, const ProbeObservable &obs, double chi) {
    const double q2 = q_moment(probe, 2);
    if (!(q2 > 1e-300)) fail(ErrorCode::ZeroQVariance, "<q^2> of the probe vanishes");
    return wave_sandwich(probe, obs, chi, 0.0).qfq / q2;
}

double validity_order(const MeasurementSetup &s) {
    const double l = std::abs(s.lambda) * s.A.max_abs_eigenvalue();
    if (l == 0.0) return std::numeric_limits<double>::infinity();
    const double dp = momentum_spread(s.probe);
    return dp * dp / (l * l);
}

std::array<double, 3> nstar_diagnostics(const MeasurementSetup &s, int j) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (j < 2) return {nan, nan, nan};
    const double l = std::abs(s.lambda) * s.A.max_abs_eigenvalue();
    std::array<double, 3> out{0.0, 0.0, 0.0};
    if (const auto *g = std::get_if<GaussianProbe>(&s.probe)) {
        // Gaussian quasi-averages factorize, so all three families share the
        // p-part ratio; only a vanishing q-part changes them.
        if ((j - 2) % 2 != 0) return {nan, nan, nan};
        double worst = 0.0;
        for (int k = 3; k <= j; ++k) {
            if ((j - k) % 2 != 0) continue;
            const double lr = log_binomial(j, k) - log_binomial(j, 2) + (k - 2) * std::log(l) +
                              log_gaussian_even_moment(g->delta_P, j - k) -
                              log_gaussian_even_moment(g->delta_P, j - 2);
            worst = std::max(worst, std::exp(lr));
        }
        for (int n = 0; n < 3; ++n) {
            out[static_cast<size_t>(n)] = std::abs(q_moment(s.probe, n)) > 0.0 ? worst : nan;
        }
        return out;
    }
    for (int n = 0; n < 3; ++n) {
        auto x = [&](int m) {
            return std::abs(quasi_average(s.probe, MomentumFunction::power(m), n));
        };
        const double ref = binomial(j, 2) * l * l * x(j - 2);
        if (!(ref > 0.0)) {
            out[static_cast<size_t>(n)] = nan;
            continue;
        }
        double worst = 0.0;
        for (int k = 3; k <= j; ++k) {
            worst = std::max(worst, binomial(j, k) * std::pow(l, k) * x(j - k) / ref);
        }
        out[static_cast<size_t>(n)] = worst;
    }
    return out;
}

} // namespace weakfcs
