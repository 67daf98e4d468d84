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

#include "weakfcs/weakvalues.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <vector>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

void check_dims(const DensityMatrix &rho_i, const DensityMatrix &rho_f, const SystemObservable &a) {
    if (rho_i.dim() != rho_f.dim() || rho_i.dim() != a.dim()) {
        std::ostringstream os;
        os << "dimensions differ: rho_i " << rho_i.dim() << ", rho_f " << rho_f.dim()
           << ", A " << a.dim();
        fail(ErrorCode::DimMismatch, os.str());
    }
}

// e^{i(z+l)A} rho_i e^{i(z-l)A}
Matrix dressed_initial(const DensityMatrix &rho_i, const SystemObservable &a, double z, double l) {
    if (z == 0.0 && l == 0.0) return rho_i.matrix();
    return a.exp_i(z + l) * rho_i.matrix() * a.exp_i(z - l);
}

} // namespace

Complex weak_charfunc(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                      const SystemObservable &a, double mu, double nu) {
    check_dims(rho_i, rho_f, a);
    return trace_product_of(rho_f.matrix(), a.exp_i(mu), rho_i.matrix(), a.exp_i(-nu));
}

Complex normal_weak_value(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                          const SystemObservable &a, int j, int k, double z,
                          double lambda_qstar) {
    check_dims(rho_i, rho_f, a);
    if (j < 0 || k < 0) fail(ErrorCode::InvalidArgument, "weak-value orders must be >= 0");
    return trace_product_of(a.power(j), rho_f.matrix(), a.power(k),
                            dressed_initial(rho_i, a, z, lambda_qstar));
}

Complex WeakValueTable::im_alpha1() const {
    return (alpha(1, 0) - alpha(0, 1)) / Complex(0.0, 2.0);
}

Complex WeakValueTable::re_alpha2() const {
    return 0.5 * (alpha(2, 0) + alpha(0, 2));
}

WeakValueTable weak_value_table(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                                const SystemObservable &a, int max_order, double z,
                                double lambda_qstar) {
    check_dims(rho_i, rho_f, a);
    if (max_order < 0) fail(ErrorCode::InvalidArgument, "max_order must be >= 0");
    const int order = std::max(max_order, 2);
    std::vector<Matrix> powers;
    powers.reserve(static_cast<size_t>(order + 1));
    powers.push_back(identity(a.dim()));
    for (int i = 1; i <= order; ++i) powers.push_back(powers.back() * a.matrix());

    const Matrix dressed = dressed_initial(rho_i, a, z, lambda_qstar);
    WeakValueTable t;
    t.max_order = order;
    t.z = z;
    t.lambda_qstar = lambda_qstar;
    t.alpha.resize(order + 1, order + 1);
    for (int k = 0; k <= order; ++k) {
        // Tr{A^j X} with X = rho_f A^k dressed.
        const Matrix x = rho_f.matrix() * powers[static_cast<size_t>(k)] * dressed;
        for (int j = 0; j <= order; ++j) {
            t.alpha(j, k) = (powers[static_cast<size_t>(j)].array() * x.transpose().array()).sum();
        }
    }
    return t;
}

CanonicalWeakValues canonical_values(const DensityMatrix &rho_i, const DensityMatrix &rho_f,
                                     const SystemObservable &a, double z, double lambda_qstar,
                                     double eps_orth) {
    return canonical_from_table(weak_value_table(rho_i, rho_f, a, 2, z, lambda_qstar), eps_orth);
}

CanonicalWeakValues canonical_from_table(const WeakValueTable &t, double eps_orth) {
    const Complex a0 = t.alpha0();
    if (std::abs(a0) < eps_orth) {
        if (t.alpha.topLeftCorner(3, 3).cwiseAbs().maxCoeff() < eps_orth) {
            fail(ErrorCode::DegenerateSelection,
                 "every weak value vanishes: the selection lies in a degenerate eigenspace of A");
        }
        std::ostringstream os;
        os << "|alpha0| = " << std::abs(a0) << " is below " << eps_orth
           << "; the canonical weak value diverges";
        fail(ErrorCode::OrthogonalStates, os.str());
    }
    CanonicalWeakValues c;
    c.alpha0 = a0.real();
    c.A_w = t.alpha1() / a0;
    c.B_w = (t.alpha11() / a0).real();
    c.C_w = t.alpha2() / a0;
    return c;
}

} // namespace weakfcs
