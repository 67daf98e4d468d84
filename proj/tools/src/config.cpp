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

#include "weakfcs_cli/config.hpp"

#include <cmath>
#include <set>

#include "weakfcs/error.hpp"

namespace weakfcs::cli {

namespace {

using nlohmann::json;

[[noreturn]] void config_error(const std::string &path, const std::string &what) {
    fail(ErrorCode::ConfigError, "field '" + path + "': " + what);
}

// Reads one JSON object, records the value actually used for every field in
// `out` and rejects keys nobody asked for.
class Fields {
  public:
    Fields(const json &in, json &out, std::string path)
        : in_(in), out_(out), path_(std::move(path)) {
        if (!in_.is_object()) config_error(where(), "expected an object");
        out_ = json::object();
    }

    bool has(const std::string &key) const { return in_.contains(key); }

    double number(const std::string &key, std::optional<double> fallback = std::nullopt) {
        const json *v = find(key, fallback.has_value());
        double x = 0.0;
        if (v == nullptr) {
            x = *fallback;
        } else if (!v->is_number()) {
            config_error(where(key), "expected a number");
        } else {
            x = v->get<double>();
        }
        if (!std::isfinite(x)) config_error(where(key), "must be finite");
        out_[key] = x;
        return x;
    }

    std::int64_t integer(const std::string &key, std::optional<std::int64_t> fallback = {}) {
        const json *v = find(key, fallback.has_value());
        std::int64_t x = 0;
        if (v == nullptr) {
            x = *fallback;
        } else if (!v->is_number_integer()) {
            config_error(where(key), "expected an integer");
        } else {
            x = v->get<std::int64_t>();
        }
        out_[key] = x;
        return x;
    }

    std::uint64_t unsigned_integer(const std::string &key, std::uint64_t fallback) {
        const json *v = find(key, true);
        std::uint64_t x = fallback;
        if (v != nullptr) {
            if (!v->is_number_unsigned()) config_error(where(key), "expected a non-negative integer");
            x = v->get<std::uint64_t>();
        }
        out_[key] = x;
        return x;
    }

    bool boolean(const std::string &key, bool fallback) {
        const json *v = find(key, true);
        bool x = fallback;
        if (v != nullptr) {
            if (!v->is_boolean()) config_error(where(key), "expected true or false");
            x = v->get<bool>();
        }
        out_[key] = x;
        return x;
    }

    std::string text(const std::string &key, std::optional<std::string> fallback = {}) {
        const json *v = find(key, fallback.has_value());
        std::string x;
        if (v == nullptr) {
            x = *fallback;
        } else if (!v->is_string()) {
            config_error(where(key), "expected a string");
        } else {
            x = v->get<std::string>();
        }
        out_[key] = x;
        return x;
    }

    std::vector<double> numbers(const std::string &key) {
        const json &v = *find(key, false);
        if (!v.is_array()) config_error(where(key), "expected an array of numbers");
        std::vector<double> xs;
        for (const json &e : v) {
            if (!e.is_number()) config_error(where(key), "expected an array of numbers");
            xs.push_back(e.get<double>());
        }
        out_[key] = xs;
        return xs;
    }

    Vec3 vec3(const std::string &key, std::optional<Vec3> fallback = {}) {
        if (!has(key) && fallback) {
            out_[key] = *fallback;
            used_.insert(key);
            return *fallback;
        }
        const std::vector<double> xs = numbers(key);
        if (xs.size() != 3) config_error(where(key), "expected three components");
        return {xs[0], xs[1], xs[2]};
    }

    /// A list, or a {start, stop, count} range.
    std::vector<double> grid(const std::string &key) {
        const json &v = *find(key, false);
        if (v.is_array()) return numbers(key);
        json resolved;
        Fields r(v, resolved, where(key));
        const double start = r.number("start");
        const double stop = r.number("stop");
        const std::int64_t count = r.integer("count");
        r.finish();
        out_[key] = resolved;
        if (count < 0) config_error(where(key) + ".count", "must be >= 0");
        std::vector<double> xs;
        for (std::int64_t i = 0; i < count; ++i) {
            xs.push_back(count == 1 ? start
                                    : start + (stop - start) * static_cast<double>(i) /
                                                  static_cast<double>(count - 1));
        }
        return xs;
    }

    Matrix matrix(const std::string &key) {
        const json &v = *find(key, false);
        if (!v.is_array() || v.empty()) config_error(where(key), "expected a square matrix");
        const auto n = static_cast<Eigen::Index>(v.size());
        Matrix m(n, n);
        json rows = json::array();
        for (Eigen::Index r = 0; r < n; ++r) {
            const json &row = v[static_cast<size_t>(r)];
            if (!row.is_array() || static_cast<Eigen::Index>(row.size()) != n) {
                config_error(where(key), "expected a square matrix");
            }
            json out_row = json::array();
            for (Eigen::Index c = 0; c < n; ++c) {
                const json &e = row[static_cast<size_t>(c)];
                Complex z;
                if (e.is_number()) {
                    z = e.get<double>();
                } else if (e.is_array() && e.size() == 2 && e[0].is_number() && e[1].is_number()) {
                    z = Complex(e[0].get<double>(), e[1].get<double>());
                } else {
                    config_error(where(key), "entries must be numbers or [re, im] pairs");
                }
                m(r, c) = z;
                out_row.push_back({z.real(), z.imag()});
            }
            rows.push_back(out_row);
        }
        out_[key] = rows;
        return m;
    }

    const json &raw_in(const std::string &key) const { return in_.at(key); }
    json &raw_out(const std::string &key) {
        used_.insert(key);
        return out_[key];
    }

    Fields child(const std::string &key) {
        used_.insert(key);
        static const json kEmpty = json::object();
        return Fields(has(key) ? in_.at(key) : kEmpty, out_[key], where(key));
    }

    void finish() const {
        for (const auto &item : in_.items()) {
            if (used_.count(item.key()) == 0) config_error(where(item.key()), "unknown field");
        }
    }

    std::string where(const std::string &key = "") const {
        if (key.empty()) return path_.empty() ? "<root>" : path_;
        return path_.empty() ? key : path_ + "." + key;
    }

  private:
    const json *find(const std::string &key, bool optional) {
        used_.insert(key);
        if (!in_.contains(key)) {
            if (optional) return nullptr;
            config_error(where(key), "missing");
        }
        return &in_.at(key);
    }

    const json &in_;
    json &out_;
    std::string path_;
    std::set<std::string> used_;
};

Command parse_command(const std::string &name, const std::string &path) {
    if (name == "weak-values") return Command::WeakValues;
    if (name == "pdf") return Command::Pdf;
    if (name == "charfunc") return Command::Charfunc;
    if (name == "moments") return Command::Moments;
    if (name == "sweep") return Command::Sweep;
    if (name == "scaling") return Command::Scaling;
    if (name == "mc") return Command::Mc;
    config_error(path, "unknown command '" + name + "'");
}

GaussianProbe parse_gaussian(Fields f) {
    const double q_bar = f.number("q_bar", 0.0);
    const double delta_Q = f.number("delta_Q", 1.0);
    const double delta_P = f.number("delta_P", 0.5 / delta_Q);
    f.finish();
    try {
        return make_gaussian_probe(q_bar, delta_Q, delta_P);
    } catch (const Error &e) {
        config_error(f.where(), e.what());
    }
}

void parse_system(Fields f, RunConfig &cfg) {
    if (f.has("spin") == f.has("matrix")) {
        config_error(f.where(), "give exactly one of 'spin' or 'matrix'");
    }
    if (f.has("spin")) {
        Fields s = f.child("spin");
        SpinSystem sys;
        sys.n_i = s.vec3("n_i", Vec3{0.0, 0.0, 1.0});
        sys.n_f = s.vec3("n_f", Vec3{0.0, 0.0, 1.0});
        sys.n = s.vec3("n", Vec3{1.0, 0.0, 0.0});
        s.finish();
        cfg.system = sys;
    } else {
        Fields m = f.child("matrix");
        MatrixSystem sys{m.matrix("rho_i"), m.matrix("rho_f"), m.matrix("A")};
        m.finish();
        cfg.system = sys;
    }
    f.finish();
}

void parse_probe(Fields f, RunConfig &cfg) {
    if (f.has("gaussian") == f.has("mixture")) {
        config_error(f.where(), "give exactly one of 'gaussian' or 'mixture'");
    }
    if (f.has("gaussian")) {
        cfg.probe = parse_gaussian(f.child("gaussian"));
    } else {
        Fields m = f.child("mixture");
        MixtureProbe mix;
        mix.weights = m.numbers("weights");
        mix.n_q = static_cast<int>(m.integer("n_q", 256));
        mix.span = m.number("span", 0.0);
        // The components array is read by hand; every entry is a gaussian block.
        if (!m.has("components")) config_error(m.where("components"), "missing");
        json &resolved_list = m.raw_out("components");
        resolved_list = json::array();
        const json &list = m.raw_in("components");
        if (!list.is_array()) config_error(m.where("components"), "expected an array");
        for (size_t i = 0; i < list.size(); ++i) {
            resolved_list.push_back(json::object());
            mix.components.push_back(parse_gaussian(
                Fields(list[i], resolved_list.back(), m.where("components") + "[" +
                                                          std::to_string(i) + "]")));
        }
        m.finish();
        if (mix.weights.size() != mix.components.size()) {
            config_error(m.where("weights"), "needs one weight per component");
        }
        double total = 0.0;
        for (double w : mix.weights) {
            if (w < 0.0) config_error(m.where("weights"), "weights must be >= 0");
            total += w;
        }
        if (!(total > 0.0)) config_error(m.where("weights"), "weights must not all vanish");
        cfg.probe = mix;
    }
    f.finish();
}

std::vector<int> read_orders(Fields &f) {
    std::vector<int> orders;
    for (double j : f.numbers("orders")) {
        if (!(j >= 0.0 && j <= 1000.0 && j == std::floor(j))) {
            config_error(f.where("orders"), "orders must be integers in [0, 1000]");
        }
        orders.push_back(static_cast<int>(j));
    }
    if (orders.empty()) config_error(f.where("orders"), "empty list");
    f.raw_out("orders") = orders;
    return orders;
}

} // namespace

ExpansionVariant parse_variant(const std::string &name) {
    if (name == "full2") return ExpansionVariant::Full2ndOrder;
    if (name == "interp") return ExpansionVariant::Interpolating;
    if (name == "ab") return ExpansionVariant::ABOnly;
    fail(ErrorCode::ConfigError, "unknown variant '" + name + "' (expected full2, interp or ab)");
}

std::string variant_name(ExpansionVariant v) {
    switch (v) {
    case ExpansionVariant::Full2ndOrder:
        return "full2";
    case ExpansionVariant::Interpolating:
        return "interp";
    case ExpansionVariant::ABOnly:
        return "ab";
    }
    return "full2";
}

RunConfig parse_config(const json &doc) {
    RunConfig cfg;
    Fields root(doc, cfg.resolved, "");
    cfg.command = parse_command(root.text("command"), "command");
    cfg.lambda = root.number("lambda");
    parse_system(root.child("system"), cfg);
    parse_probe(root.child("probe"), cfg);

    {
        Fields g = root.child("grid");
        cfg.grid.n_q = static_cast<int>(g.integer("n_q", 0));
        cfg.grid.span = g.number("span", 0.0);
        cfg.grid.gaussian_closed_form = g.boolean("gaussian_closed_form", true);
        g.finish();
    }
    {
        Fields o = root.child("observable");
        const std::string kind = o.text("kind", std::string("p"));
        if (kind == "p") {
            cfg.observable = ObservableKind::P;
        } else if (kind == "q") {
            cfg.observable = ObservableKind::Q;
        } else if (kind == "number") {
            cfg.observable = ObservableKind::Number;
            cfg.omega = o.number("omega", 1.0);
        } else {
            config_error(o.where("kind"), "expected p, q or number");
        }
        o.finish();
    }
    try {
        cfg.variant = parse_variant(root.text("variant", std::string("full2")));
    } catch (const Error &e) {
        config_error("variant", e.what());
    }
    {
        Fields t = root.child("thresholds");
        cfg.thresholds.large_lambda_qstar = t.number("large_lambda_qstar", 0.2);
        cfg.thresholds.eps_orth = t.number("eps_orth", kOrthTol);
        t.finish();
    }

    switch (cfg.command) {
    case Command::Charfunc:
        cfg.chi = root.grid("chi");
        if (cfg.chi.empty()) config_error("chi", "empty grid");
        break;
    case Command::Moments:
        cfg.orders = read_orders(root);
        break;
    case Command::Sweep:
    case Command::Scaling: {
        if (!std::holds_alternative<SpinSystem>(cfg.system)) {
            config_error("system", "sweeps need a spin system");
        }
        if (!std::holds_alternative<GaussianProbe>(cfg.probe)) {
            config_error("probe", "sweeps need a Gaussian probe");
        }
        cfg.thetas = root.grid("theta");
        if (cfg.thetas.empty()) config_error("theta", "empty grid");
        cfg.orders = read_orders(root);
        if (cfg.command == Command::Sweep) {
            const std::string q = root.text("quantity", std::string("moment"));
            if (q == "moment") {
                cfg.quantity = SweepQuantity::Moment;
            } else if (q == "excess") {
                cfg.quantity = SweepQuantity::Excess;
                for (int j : cfg.orders) {
                    if (j < 2 || j % 2 != 0) config_error("orders", "excess needs even orders >= 2");
                }
            } else {
                config_error("quantity", "expected moment or excess");
            }
        }
        break;
    }
    case Command::Mc: {
        Fields m = root.child("mc");
        cfg.mc.n_shots = m.integer("n_shots", 100000);
        if (cfg.mc.n_shots < 1) config_error("mc.n_shots", "must be >= 1");
        cfg.mc.seed = m.unsigned_integer("seed", 1);
        cfg.mc.max_moment = static_cast<int>(m.integer("max_moment", 4));
        if (m.has("postselection")) cfg.mc.postselection = m.matrix("postselection");
        if (!cfg.mc.postselection && !std::holds_alternative<SpinSystem>(cfg.system)) {
            config_error("mc.postselection", "required for matrix systems");
        }
        cfg.mc.w = m.numbers("w");
        m.finish();
        break;
    }
    default:
        break;
    }
    root.finish();
    return cfg;
}

RunConfig parse_config_text(const std::string &text) {
    json doc;
    try {
        doc = json::parse(text);
    } catch (const json::parse_error &e) {
        fail(ErrorCode::ConfigError, std::string("invalid JSON: ") + e.what());
    }
    return parse_config(doc);
}

MeasurementSetup build_setup(const RunConfig &cfg) {
    try {
        ProbeState probe;
        if (const auto *g = std::get_if<GaussianProbe>(&cfg.probe)) {
            probe = *g;
        } else {
            const auto &mix = std::get<MixtureProbe>(cfg.probe);
            double spread = 0.0;
            double center = 0.0;
            double wsum = 0.0;
            for (size_t i = 0; i < mix.weights.size(); ++i) {
                center += mix.weights[i] * mix.components[i].q_bar;
                wsum += mix.weights[i];
            }
            center /= wsum;
            for (const auto &c : mix.components) {
                spread = std::max(spread, std::abs(c.q_bar - center) + 12.0 * c.delta_Q);
            }
            const double span = mix.span > 0.0 ? mix.span : 2.0 * spread;
            probe = gaussian_mixture_grid(QGrid::centered(mix.n_q, center, span), mix.weights,
                                          mix.components);
        }
        if (const auto *s = std::get_if<SpinSystem>(&cfg.system)) {
            return make_setup(cfg.lambda, validate_density(bloch_density(s->n_i)),
                              validate_density(bloch_density(s->n_f)),
                              spectral_decompose(spin_component(s->n)), probe, cfg.grid);
        }
        const auto &m = std::get<MatrixSystem>(cfg.system);
        return make_setup(cfg.lambda, validate_density(m.rho_i), validate_density(m.rho_f),
                          spectral_decompose(m.A), probe, cfg.grid);
    } catch (const Error &e) {
        if (e.code() == ErrorCode::ConfigError) throw;
        fail(ErrorCode::ConfigError, std::string("invalid setup: ") + e.what());
    }
}

ProbeObservable build_observable(const RunConfig &cfg, const MeasurementSetup &s) {
    switch (cfg.observable) {
    case ObservableKind::P:
        return MomentumP{};
    case ObservableKind::Q:
        return PositionQ{};
    case ObservableKind::Number:
        return harmonic_number_operator(resolve_grid_probe(s).grid, cfg.omega);
    }
    return MomentumP{};
}

} // namespace weakfcs::cli
