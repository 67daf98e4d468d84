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

// Run configuration of the weakfcs command-line tool.
//
// A run is described by one JSON document. Parsing fills in every default and
// keeps the result as `resolved`, which artifacts embed verbatim so that a run
// can be repeated from its own output.

#pragma once

#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <json.hpp>

#include "weakfcs/exact.hpp"
#include "weakfcs/perturb.hpp"
#include "weakfcs/spinhalf.hpp"

namespace weakfcs::cli {

enum class Command { WeakValues, Pdf, Charfunc, Moments, Sweep, Scaling, Mc };

struct SpinSystem {
    Vec3 n_i{0.0, 0.0, 1.0};
    Vec3 n_f{0.0, 0.0, 1.0};
    Vec3 n{1.0, 0.0, 0.0};
};

struct MatrixSystem {
    Matrix rho_i;
    Matrix rho_f;
    Matrix A;
};

struct MixtureProbe {
    std::vector<double> weights;
    std::vector<GaussianProbe> components;
    int n_q = 256;
    double span = 0.0;
};

enum class ObservableKind { P, Q, Number };

enum class SweepQuantity { Moment, Excess };

struct McSpec {
    std::int64_t n_shots = 100000;
    std::uint64_t seed = 1;
    /// Acceptance per eigenvector of the post-selection observable, ascending.
    std::vector<double> w;
    /// Post-selection observable; the n_f spin component for spin systems.
    std::optional<Matrix> postselection;
    int max_moment = 4;
};

struct RunConfig {
    Command command = Command::WeakValues;
    double lambda = 0.0;
    std::variant<SpinSystem, MatrixSystem> system;
    std::variant<GaussianProbe, MixtureProbe> probe;
    GridOptions grid;
    ObservableKind observable = ObservableKind::P;
    double omega = 1.0;
    ExpansionVariant variant = ExpansionVariant::Full2ndOrder;
    PerturbOptions thresholds;
    std::vector<double> chi;
    std::vector<int> orders;
    std::vector<double> thetas;
    SweepQuantity quantity = SweepQuantity::Moment;
    McSpec mc;

    /// Input with every default filled in.
    nlohmann::json resolved;
};

/// Throws Error(ConfigError) naming the offending field.
RunConfig parse_config(const nlohmann::json &doc);
/// Parses text first; syntax errors report line and column.
RunConfig parse_config_text(const std::string &text);

/// Built-in presets: fig2a, fig2b, fig3, fig4.
std::optional<std::string> preset_text(const std::string &name);
std::vector<std::string> preset_names();

ExpansionVariant parse_variant(const std::string &name);
std::string variant_name(ExpansionVariant v);

/// Setups of a run. Sweeps override the post-selection with the coplanar
/// geometry at each angle.
MeasurementSetup build_setup(const RunConfig &cfg);
ProbeObservable build_observable(const RunConfig &cfg, const MeasurementSetup &s);

} // namespace weakfcs::cli
