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
 * Dense linear algebra on the (small) system Hilbert space: validated density
 * matrices, Hermitian observables with cached spectra, and trace products.
 */

#pragma once

#include <array>
#include <complex>
#include <span>

#include <Eigen/Dense>

namespace weakfcs {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;
using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;
using Vec3 = std::array<double, 3>;

inline constexpr double kHermitianTol = 1e-10;
inline constexpr double kTraceTol = 1e-10;
inline constexpr double kPsdTol = 1e-10;
inline constexpr Eigen::Index kMaxSystemDim = 64;

/// Largest |m(i,j) - conj(m(j,i))| over the matrix.
double hermitian_defect(const Matrix &m);

/// Unit-trace, Hermitian, positive semidefinite matrix. Only obtainable
/// through validate_density / pure_state, so holding one is proof of validity.
class DensityMatrix {
  public:
    const Matrix &matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }
    double purity() const;

  private:
    explicit DensityMatrix(Matrix m) : m_(std::move(m)) {}
    friend DensityMatrix validate_density(const Matrix &m);

    Matrix m_;
};

/// Checks the density-matrix invariants; never renormalizes.
/// Throws NonHermitian, NonUnitTrace or NotPositive.
DensityMatrix validate_density(const Matrix &m);

/// |psi><psi| / <psi|psi>.
DensityMatrix pure_state(const Vector &psi);

class SystemObservable {
  public:
    const Matrix &matrix() const noexcept { return m_; }
    Eigen::Index dim() const noexcept { return m_.rows(); }

    /// Ascending eigenvalues.
    const RealVector &eigenvalues() const noexcept { return values_; }
    /// Orthonormal eigenvectors as columns, phase-fixed.
    const Matrix &eigenvectors() const noexcept { return vectors_; }

    double max_abs_eigenvalue() const;

    /// exp(i z A), exact through the spectral decomposition.
    Matrix exp_i(Complex z) const;
    Matrix power(int k) const;
    Matrix projector(Eigen::Index index) const;

  private:
    SystemObservable(Matrix m, RealVector values, Matrix vectors)
        : m_(std::move(m)), values_(std::move(values)), vectors_(std::move(vectors)) {}
    friend SystemObservable spectral_decompose(const Matrix &h);

    Matrix m_;
    RealVector values_;
    Matrix vectors_;
};

/// Throws NonHermitian when the asymmetry exceeds kHermitianTol.
SystemObservable spectral_decompose(const Matrix &h);

/// Tr(m_1 m_2 ... m_n). Throws DimMismatch on non-square or unequal sizes.
Complex trace_product(std::span<const Matrix> ms);

template <typename... Ms>
Complex trace_product_of(const Ms &...ms) {
    const std::array<Matrix, sizeof...(Ms)> list{Matrix(ms)...};
    return trace_product(std::span<const Matrix>(list));
}

Matrix identity(Eigen::Index dim);
Matrix pauli_x();
Matrix pauli_y();
Matrix pauli_z();

/// n . sigma
Matrix spin_component(const Vec3 &n);
/// (1 + n . sigma) / 2, |n| <= 1.
Matrix bloch_density(const Vec3 &n);

} // namespace weakfcs
