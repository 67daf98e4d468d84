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

#include "weakfcs_cli/commands.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <iostream>
#include <limits>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "weakfcs/error.hpp"
#include "weakfcs/format.hpp"
#include "weakfcs/mc.hpp"

#ifndef WEAKFCS_VERSION
#define WEAKFCS_VERSION "0.0.0"
#endif

namespace weakfcs::cli {

namespace {

using nlohmann::json;

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

json complex_json(Complex z) { return json::array({z.real(), z.imag()}); }

json number_or_null(double x) { return std::isfinite(x) ? json(x) : json(nullptr); }

void write_csv_preamble(std::ostream &out, const RunConfig &cfg) {
    out << "# weakfcs " << version() << '\n';
    out << "# config: " << cfg.resolved.dump() << '\n';
}

void write_json(std::ostream &out, const RunConfig &cfg, json result) {
    json doc;
    doc["tool"] = "weakfcs";
    doc["version"] = version();
    doc["config"] = cfg.resolved;
    doc["result"] = std::move(result);
    out << doc.dump(2) << '\n';
}

// Runs f(i) for i in [0, n) on up to `jobs` threads. Each index owns its slot
// in the caller's output, so the result does not depend on scheduling.
void parallel_for(size_t n, int jobs, const std::function<void(size_t)> &f) {
    const size_t workers = std::clamp<size_t>(static_cast<size_t>(std::max(jobs, 1)), 1, n);
    if (workers <= 1) {
        for (size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::vector<std::thread> pool;
    std::vector<std::exception_ptr> errors(workers);
    for (size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            try {
                for (size_t i = w; i < n; i += workers) f(i);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        });
    }
    for (auto &t : pool) t.join();
    for (auto &e : errors) {
        if (e) std::rethrow_exception(e);
    }
}

double or_nan(const std::function<double()> &f) {
    try {
        return f();
    } catch (const Error &e) {
        switch (e.code()) {
        case ErrorCode::BeyondValidity:
        case ErrorCode::OrthogonalStates:
        case ErrorCode::DegenerateSelection:
            return kNaN;
        default:
            throw;
        }
    }
}

SpinSetup spin_at(const RunConfig &cfg, double theta) {
    return coplanar_setup(theta, cfg.lambda, std::get<GaussianProbe>(cfg.probe));
}

void run_weak_values(const RunConfig &cfg, std::ostream &out) {
    const MeasurementSetup s = build_setup(cfg);
    const WeakValueTable t = weak_value_table(s.rho_i, s.rho_f, s.A, 2);
    json r;
    r["alpha0"] = t.alpha0().real();
    r["alpha1"] = complex_json(t.alpha1());
    r["alpha11"] = t.alpha11().real();
    r["alpha2"] = complex_json(t.alpha2());
    try {
        const CanonicalWeakValues c = canonical_from_table(t, cfg.thresholds.eps_orth);
        r["Aw"] = complex_json(c.A_w);
        r["Bw"] = c.B_w;
        r["Cw"] = complex_json(c.C_w);
    } catch (const Error &e) {
        r["Aw"] = r["Bw"] = r["Cw"] = nullptr;
        r["canonical_error"] = std::string(to_string(e.code()));
    }
    const Denominators d = denominators(s, cfg.thresholds);
    r["N"] = normalization(s);
    r["N2"] = d.n2;
    r["N2_prime"] = d.n2_prime;
    r["n_star"] = number_or_null(validity_order(s));
    r["interference_ratio"] = interference_ratio(s);
    write_json(out, cfg, r);
}

void run_pdf(const RunConfig &cfg, std::ostream &out) {
    const MeasurementSetup s = build_setup(cfg);
    const ConditionalDistribution d = conditional_pdf(s, build_observable(cfg, s));
    const RealVector cdf = d.cumulative();
    write_csv_preamble(out, cfg);
    out << "o,pdf,cumulative\n";
    for (Eigen::Index k = 0; k < d.support.size(); ++k) {
        out << format_double(d.support(k)) << ',' << format_double(d.pdf(k)) << ','
            << format_double(cdf(k)) << '\n';
    }
}

void run_charfunc(const RunConfig &cfg, std::ostream &out, int jobs) {
    const MeasurementSetup s = build_setup(cfg);
    const ProbeObservable obs = build_observable(cfg, s);
    std::vector<Complex> exact(cfg.chi.size());
    std::vector<Complex> approx(cfg.chi.size());
    parallel_for(cfg.chi.size(), jobs, [&](size_t i) {
        const double chi = cfg.chi[i];
        exact[i] = conditional_charfunc(s, obs, chi);
        switch (cfg.observable) {
        case ObservableKind::Q:
            approx[i] = charfunc_q(s, chi, cfg.variant, cfg.thresholds);
            break;
        case ObservableKind::P:
            approx[i] = charfunc_p(s, chi, CharfuncForm::Resummed, cfg.thresholds);
            break;
        case ObservableKind::Number:
            approx[i] = charfunc_obs(s, obs, chi, cfg.thresholds);
            break;
        }
    });
    write_csv_preamble(out, cfg);
    out << "chi,re_exact,im_exact,re_expansion,im_expansion\n";
    for (size_t i = 0; i < cfg.chi.size(); ++i) {
        out << format_double(cfg.chi[i]) << ',' << format_double(exact[i].real()) << ','
            << format_double(exact[i].imag()) << ',' << format_double(approx[i].real()) << ','
            << format_double(approx[i].imag()) << '\n';
    }
}

void run_moments(const RunConfig &cfg, std::ostream &out) {
    const MeasurementSetup s = build_setup(cfg);
    const ProbeObservable obs = build_observable(cfg, s);
    const bool gaussian = std::holds_alternative<GaussianProbe>(s.probe);
    json list = json::array();
    for (int j : cfg.orders) {
        json row;
        row["j"] = j;
        row["exact"] = number_or_null(exact_moment(s, obs, j));
        double approx = kNaN;
        if (cfg.observable == ObservableKind::P && gaussian) {
            approx = or_nan([&] { return moment_p_gaussian(s, j, cfg.variant, cfg.thresholds).value; });
        } else if (cfg.observable == ObservableKind::P && j <= 8) {
            approx = or_nan([&] { return moment_p_general(s, j, cfg.thresholds).value; });
        } else if (cfg.observable == ObservableKind::Number && j == 1) {
            approx = or_nan([&] { return expectation_obs(s, obs, cfg.variant, cfg.thresholds); });
        }
        row["expansion"] = number_or_null(approx);
        list.push_back(row);
    }
    json r;
    r["moments"] = list;
    r["n_star"] = number_or_null(validity_order(s));
    r["N"] = normalization(s);
    write_json(out, cfg, r);
}

void run_sweep(const RunConfig &cfg, std::ostream &out, int jobs) {
    const double dp = std::get<GaussianProbe>(cfg.probe).delta_P;
    struct Row {
        double exact, full, simple, ab;
    };
    const size_t n_orders = cfg.orders.size();
    std::vector<Row> rows(cfg.thetas.size() * n_orders);
    parallel_for(cfg.thetas.size(), jobs, [&](size_t i) {
        const SpinSetup spin = spin_at(cfg, cfg.thetas[i]);
        const MeasurementSetup s = to_measurement_setup(spin, cfg.grid);
        for (size_t o = 0; o < n_orders; ++o) {
            const int j = cfg.orders[o];
            auto approx = [&](ExpansionVariant v) {
                return or_nan([&] { return moment_p_gaussian(s, j, v, cfg.thresholds).value; });
            };
            Row r{spin_exact_moment(spin, j), approx(ExpansionVariant::Full2ndOrder),
                  approx(ExpansionVariant::Interpolating), approx(ExpansionVariant::ABOnly)};
            if (cfg.quantity == SweepQuantity::Excess) {
                const double base = gaussian_moment(dp, j);
                r.exact = j * spin_scaled_moment(spin, j);
                r.full = (r.full - base) / base;
                r.simple = (r.simple - base) / base;
                r.ab = (r.ab - base) / base;
            }
            rows[i * n_orders + o] = r;
        }
    });
    write_csv_preamble(out, cfg);
    out << "theta,j,exact,interp_full,interp_simple,interp_AB\n";
    for (size_t i = 0; i < cfg.thetas.size(); ++i) {
        for (size_t o = 0; o < n_orders; ++o) {
            const Row &r = rows[i * n_orders + o];
            out << format_double(cfg.thetas[i]) << ',' << cfg.orders[o] << ','
                << format_double(r.exact) << ',' << format_double(r.full) << ','
                << format_double(r.simple) << ',' << format_double(r.ab) << '\n';
        }
    }
}

void run_scaling(const RunConfig &cfg, std::ostream &out, int jobs) {
    for (int j : cfg.orders) {
        if (j < 2 || j % 2 != 0) fail(ErrorCode::ConfigError, "field 'orders': scaling needs even orders >= 2");
    }
    const size_t n_orders = cfg.orders.size();
    std::vector<ScalingPoint> rows(cfg.thetas.size() * n_orders);
    parallel_for(cfg.thetas.size(), jobs, [&](size_t i) {
        const SpinSetup spin = spin_at(cfg, cfg.thetas[i]);
        for (size_t o = 0; o < n_orders; ++o) {
            rows[i * n_orders + o] = universal_scaling(spin, cfg.orders[o]);
        }
    });
    write_csv_preamble(out, cfg);
    out << "theta,j,exact,predicted,plateau,n_star\n";
    for (size_t i = 0; i < cfg.thetas.size(); ++i) {
        for (size_t o = 0; o < n_orders; ++o) {
            const ScalingPoint &p = rows[i * n_orders + o];
            out << format_double(cfg.thetas[i]) << ',' << cfg.orders[o] << ','
                << format_double(p.exact) << ',' << format_double(p.predicted) << ','
                << format_double(p.plateau) << ',' << format_double(p.n_star) << '\n';
        }
    }
}

SystemObservable postselection_observable(const RunConfig &cfg) {
    if (cfg.mc.postselection) return spectral_decompose(*cfg.mc.postselection);
    const Vec3 &nf = std::get<SpinSystem>(cfg.system).n_f;
    const double norm = std::sqrt(nf[0] * nf[0] + nf[1] * nf[1] + nf[2] * nf[2]);
    if (norm == 0.0) {
        fail(ErrorCode::ConfigError, "field 'mc.postselection': n_f = 0 defines no axis; give a matrix");
    }
    return spectral_decompose(spin_component({nf[0] / norm, nf[1] / norm, nf[2] / norm}));
}

void run_mc(const RunConfig &cfg, std::ostream &out, int jobs) {
    const MeasurementSetup setup = build_setup(cfg);
    const ProbeObservable obs = build_observable(cfg, setup);
    ProtocolConfig p{setup,          obs,         postselection_observable(cfg),
                     cfg.mc.w,       cfg.mc.n_shots, cfg.mc.seed,
                     jobs,           cfg.mc.max_moment};
    try {
        validate(p);
    } catch (const Error &e) {
        fail(ErrorCode::ConfigError, std::string("field 'mc': ") + e.what());
    }
    const EnsembleResult r = ensemble(p);

    json res;
    res["total"] = r.total;
    res["accepted"] = r.accepted;
    res["acceptance"] = r.acceptance();
    res["acceptance_se"] = r.acceptance_se();
    double w_total = 0.0;
    for (double x : p.w) w_total += x;
    json moments = json::array();
    if (w_total > 0.0 && r.accepted > 0) {
        MeasurementSetup eff = p.setup;
        eff.rho_f = effective_postselection(p.postselection, p.w);
        res["expected_acceptance"] = w_total * normalization(eff);
        const RealVector expected = conditional_pdf(eff, p.obs).masses();
        const BinomialCheck b = binomial_bin_test(r, expected);
        res["binomial"] = {{"min_p_value", b.min_p_value},
                           {"threshold", b.threshold},
                           {"failures", b.failures}};
        const ChiSquareCheck c = chi_square_test(r, expected);
        res["chi_square"] = {{"statistic", c.statistic}, {"dof", c.dof}, {"p_value", c.p_value}};
        for (const MomentSample &m : r.moments) {
            moments.push_back({{"j", m.j},
                               {"mean", number_or_null(m.mean)},
                               {"standard_error", number_or_null(m.standard_error)},
                               {"exact", number_or_null(exact_moment(eff, p.obs, m.j))}});
        }
    } else {
        res["expected_acceptance"] = 0.0;
    }
    res["moments"] = moments;
    json hist = json::array();
    const double half = r.discrete ? 0.0 : 0.5 * r.cell_width;
    for (size_t k = 0; k < r.counts.size(); ++k) {
        const double o = r.support(static_cast<Eigen::Index>(k));
        hist.push_back({o - half, o + half, r.counts[k]});
    }
    res["histogram"] = hist;
    write_json(out, cfg, res);
}

} // namespace

const char *version() { return WEAKFCS_VERSION; }

void run(const RunConfig &cfg, std::ostream &out, int jobs) {
    switch (cfg.command) {
    case Command::WeakValues:
        return run_weak_values(cfg, out);
    case Command::Pdf:
        return run_pdf(cfg, out);
    case Command::Charfunc:
        return run_charfunc(cfg, out, jobs);
    case Command::Moments:
        return run_moments(cfg, out);
    case Command::Sweep:
        return run_sweep(cfg, out, jobs);
    case Command::Scaling:
        return run_scaling(cfg, out, jobs);
    case Command::Mc:
        return run_mc(cfg, out, jobs);
    }
}

int main_with_args(int argc, const char *const *argv, std::istream &in, std::ostream &out,
                   std::ostream &err) {
    CLI::App app{"Full counting statistics of weak measurements with pre- and post-selection",
                 "weakfcs"};
    std::string config_path;
    std::string preset;
    std::string out_path;
    int jobs = 1;
    std::optional<std::uint64_t> seed;
    std::string variant;
    bool list_presets = false;
    app.add_option("--config", config_path, "JSON run configuration ('-' or absent: stdin)");
    app.add_option("--preset", preset, "built-in configuration")->excludes("--config");
    app.add_option("--out", out_path, "artifact path (default: stdout)");
    app.add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);
    app.add_option("--seed", seed, "Monte Carlo seed override");
    app.add_option("--variant", variant, "expansion variant override")
        ->check(CLI::IsMember({"full2", "interp", "ab"}));
    app.add_flag("--list-presets", list_presets, "print the preset names and exit");
    app.set_version_flag("--version", std::string(version()));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitConfig;
    }

    if (list_presets) {
        for (const auto &name : preset_names()) out << name << '\n';
        return kExitOk;
    }

    try {
        std::string text;
        if (!preset.empty()) {
            const auto found = preset_text(preset);
            if (!found) fail(ErrorCode::ConfigError, "unknown preset '" + preset + "'");
            text = *found;
        } else if (!config_path.empty() && config_path != "-") {
            std::ifstream f(config_path);
            if (!f) fail(ErrorCode::ConfigError, "cannot read " + config_path);
            std::ostringstream ss;
            ss << f.rdbuf();
            text = ss.str();
        } else {
            std::ostringstream ss;
            ss << in.rdbuf();
            text = ss.str();
        }

        nlohmann::json doc;
        try {
            doc = nlohmann::json::parse(text);
        } catch (const nlohmann::json::parse_error &e) {
            fail(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
        }
        if (!doc.is_object()) fail(ErrorCode::ConfigError, "configuration must be a JSON object");
        if (!variant.empty()) doc["variant"] = variant;
        if (seed) doc["mc"]["seed"] = *seed;
        const RunConfig cfg = parse_config(doc);

        std::ostringstream artifact;
        run(cfg, artifact, jobs);
        if (out_path.empty()) {
            out << artifact.str();
        } else {
            std::ofstream f(out_path, std::ios::binary);
            if (!f) fail(ErrorCode::ConfigError, "cannot write " + out_path);
            f << artifact.str();
        }
        return kExitOk;
    } catch (const Error &e) {
        err << "weakfcs: " << e.what() << '\n';
        return e.code() == ErrorCode::ConfigError ? kExitConfig : kExitNumerical;
    }
}

} // namespace weakfcs::cli
