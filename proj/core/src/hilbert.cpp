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

#include "weakfcs/hilbert.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>
#include <vector>

#include <Eigen/Eigenvalues>

#include "weakfcs/error.hpp"

namespace weakfcs {

namespace {

void require_square(const Matrix &m, const char *what) {
    if (m.rows() != m.cols() || m.rows() == 0) {
        std::ostringstream os;
        os << what << " must be a non-empty square matrix, got " << m.rows() << "x" << m.cols();
        fail(ErrorCode::DimMismatch, os.str());
    }
}

// First component with non-negligible modulus is made real and positive.
void fix_phase(Eigen::Ref<Vector> v) {
    for (Eigen::Index i = 0; i < v.size(); ++i) {
        if (std::abs(v(i)) > 1e-12) {
            v *= std::conj(v(i)) / std::abs(v(i));
            v(i) = Complex(v(i).real(), 0.0);
            return;
        }
    }
}

bool lexicographic_less(const Vector &a, const Vector &b) {
    for (Eigen::Index i = 0; i < a.size(); ++i) {
        if (std::abs(a(i).real() - b(i).real()) > 1e-12) return a(i).real() > b(i).real();
        if (std::abs(a(i).imag() - b(i).imag()) > 1e-12) return a(i).imag() > b(i).imag();
    }
    return false;
}

} // namespace

double hermitian_defect(const Matrix &m) {
    if (m.rows() != m.cols()) return INFINITY;
    return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

double DensityMatrix::purity() const {
    return (m_ * m_).trace().real();
}

DensityMatrix validate_density(const Matrix &m) {
    require_square(m, "density matrix");
    if (m.rows() > kMaxSystemDim) {
        fail(ErrorCode::DimMismatch, "density matrix dimension exceeds 64");
    }
    if (!m.allFinite()) fail(ErrorCode::NonHermitian, "density matrix has non-finite entries");
    const double defect = hermitian_defect(m);
    if (defect > kHermitianTol) {
        std::ostringstream os;
        os << "density matrix asymmetry " << defect << " exceeds " << kHermitianTol;
        fail(ErrorCode::NonHermitian, os.str());
    }
    const Complex tr = m.trace();
    if (std::abs(tr - 1.0) > kTraceTol) {
        std::ostringstream os;
        os << "density matrix trace " << tr.real() << " differs from 1";
        fail(ErrorCode::NonUnitTrace, os.str());
    }
    const Matrix herm = 0.5 * (m + m.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm, Eigen::EigenvaluesOnly);
    const double smallest = es.eigenvalues().minCoeff();
    if (smallest < -kPsdTol) {
        std::ostringstream os;
        os << "density matrix has negative eigenvalue " << smallest;
        fail(ErrorCode::NotPositive, os.str());
    }
    return DensityMatrix(m);
}

DensityMatrix pure_state(const Vector &psi) {
    const double norm = psi.norm();
    if (!(norm > 0.0)) fail(ErrorCode::InvalidArgument, "state vector has zero norm");
    const Vector u = psi / norm;
    Matrix rho = u * u.adjoint();
    rho = 0.5 * (rho + rho.adjoint());
    return validate_density(rho);
}

double SystemObservable::max_abs_eigenvalue() const {
    return values_.cwiseAbs().maxCoeff();
}

Matrix SystemObservable::exp_i(Complex z) const {
    Vector phases(values_.size());
    for (Eigen::Index i = 0; i < values_.size(); ++i) {
        phases(i) = std::exp(Complex(0.0, 1.0) * z * values_(i));
    }
    return vectors_ * phases.asDiagonal() * vectors_.adjoint();
}

Matrix SystemObservable::power(int k) const {
    if (k < 0) fail(ErrorCode::InvalidArgument, "negative observable power");
    Matrix result = identity(dim());
    for (int i = 0; i < k; ++i) result = result * m_;
    return result;
}

Matrix SystemObservable::projector(Eigen::Index index) const {
    const Vector v = vectors_.col(index);
    return v * v.adjoint();
}

SystemObservable spectral_decompose(const Matrix &h) {
    require_square(h, "observable");
    const double defect = hermitian_defect(h);
    if (!(defect <= kHermitianTol)) {
        std::ostringstream os;
        os << "observable asymmetry " << defect << " exceeds " << kHermitianTol;
        fail(ErrorCode::NonHermitian, os.str());
    }
    const Matrix herm = 0.5 * (h + h.adjoint());
    Eigen::SelfAdjointEigenSolver<Matrix> es(herm);
    RealVector values = es.eigenvalues();
    Matrix vectors = es.eigenvectors();
    for (Eigen::Index c = 0; c < vectors.cols(); ++c) fix_phase(vectors.col(c));

    std::vector<Eigen::Index> order(static_cast<size_t>(values.size()));
    std::iota(order.begin(), order.end(), Eigen::Index{0});
    std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        if (std::abs(values(a) - values(b)) > kHermitianTol) return values(a) < values(b);
        return lexicographic_less(vectors.col(a), vectors.col(b));
    });
    RealVector sorted_values(values.size());
    Matrix sorted_vectors(vectors.rows(), vectors.cols());
    for (size_t i = 0; i < order.size(); ++i) {
        sorted_values(static_cast<Eigen::Index>(i)) = values(order[i]);
        sorted_vectors.col(static_cast<Eigen::Index>(i)) = vectors.col(order[i]);
    }
    return SystemObservable(h, std::move(sorted_values), std::move(sorted_vectors));
}

Complex trace_product(std::span<const Matrix> ms) {
    if (ms.empty()) fail(ErrorCode::InvalidArgument, "trace_product of an empty list");
    const Eigen::Index dim = ms.front().rows();
    for (const auto &m : ms) {
        if (m.rows() != dim || m.cols() != dim) {
            fail(ErrorCode::DimMismatch, "trace_product operands must be square with equal size");
        }
    }
    if (ms.size() == 1) return ms.front().trace();
    Matrix acc = ms.front();
    for (size_t i = 1; i + 1 < ms.size(); ++i) acc = acc * ms[i];
    // Tr(X Y) = sum_ij X_ij Y_ji, without forming the last product.
    return (acc.array() * ms.back().transpose().array()).sum();
}

Matrix identity(Eigen::Index dim) {
    return Matrix::Identity(dim, dim);
}

Matrix pauli_x() {
    Matrix m(2, 2);
    m << 0.0, 1.0, 1.0, 0.0;
    return m;
}

Matrix pauli_y() {
    Matrix m(2, 2);
    m << 0.0, Complex(0.0, -1.0), Complex(0.0, 1.0), 0.0;
    return m;
}

Matrix pauli_z() {
    Matrix m(2, 2);
    m << 1.0, 0.0, 0.0, -1.0;
    return m;
}

Matrix spin_component(const Vec3 &n) {
    return n[0] * pauli_x() + n[1] * pauli_y() + n[2] * pauli_z();
}

Matrix bloch_density(const Vec3 &n) {
    return 0.5 * (identity(2) + spin_component(n));
}

} // namespace weakfcs
