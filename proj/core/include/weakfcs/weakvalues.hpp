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
 * Weak characteristic function and the normal / canonical weak values.
 *
 *   Z^w(mu, nu)      = Tr{rho_f e^{i mu A} rho_i e^{-i nu A}}
 *   alpha_{j,k}(z)   = Tr{A^j rho_f A^k e^{i(z + l) A} rho_i e^{i(z - l) A}}
 *
 * with l = lambda q* the optional shift of the expansion point.
 */

#pragma once

#include "weakfcs/hilbert.hpp"

namespace weakfcs {

inline constexpr double kOrthTol = 1e-12;

Complex weak_charfunc(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                      const SystemObservable &a, double mu, double nu);

Complex normal_weak_value(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                          const SystemObservable &a, int j, int k, double z = 0.0,
                          double lambda_qstar = 0.0);

/// alpha_{j,k} for 0 <= j, k <= max_order at one expansion point.
struct WeakValueTable {
    int max_order = 0;
    double z = 0.0;
    double lambda_qstar = 0.0;
    Matrix alpha;

    Complex operator()(int j, int k) const { return alpha(j, k); }

    Complex alpha0() const { return alpha(0, 0); }
    Complex alpha1() const { return alpha(1, 0); }
    Complex alpha11() const { return alpha(1, 1); }
    Complex alpha2() const { return alpha(2, 0); }

    /// (alpha_{1,0} - alpha_{0,1}) / 2i. Equals Im(alpha1) when the table is
    /// Hermitian (z = 0) and continues it analytically otherwise.
    Complex im_alpha1() const;
    /// (alpha_{2,0} + alpha_{0,2}) / 2, the matching continuation of Re(alpha2).
    Complex re_alpha2() const;
};

/// Throws DimMismatch when the operands do not share a dimension.
WeakValueTable weak_value_table(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                                const SystemObservable &a, int max_order, double z = 0.0,
                                double lambda_qstar = 0.0);

struct CanonicalWeakValues {
    Complex A_w;
    double B_w = 0.0;
    Complex C_w;
    double alpha0 = 0.0;
};

/// Canonical values from an existing table; same errors as canonical_values.
CanonicalWeakValues canonical_from_table(const WeakValueTable &t, double eps_orth = kOrthTol);

/// A^w = alpha1/alpha0, B^w = alpha11/alpha0, C^w = alpha2/alpha0.
/// Throws DegenerateSelection when every alpha_{j,k} (j, k <= 2) vanishes and
/// OrthogonalStates when only alpha0 does.
CanonicalWeakValues canonical_values(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                                     const SystemObservable &a, double z = 0.0,
                                     double lambda_qstar = 0.0, double eps_orth = kOrthTol);

} // namespace weakfcs
