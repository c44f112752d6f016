// Copyright 2026 The syncsub Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <complex>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "syncsub/common.hpp"

namespace syncsub {

using cplx = std::complex<double>;
using ComplexMatrix = Eigen::MatrixXcd;
using StateVector = Eigen::VectorXcd;

//------------------------------------------------------------------------------
// Basic checks and constructors
//------------------------------------------------------------------------------

[[nodiscard]] inline bool all_finite(const ComplexMatrix& m) {
  return m.allFinite();
}

inline void require_square_finite(const ComplexMatrix& m, std::string_view what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw DimensionError(std::string(what) + ": expected a nonempty square matrix, got " +
                         std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  if (!all_finite(m)) {
    throw InvariantError(std::string(what) + ": matrix has non-finite entries");
  }
}

[[nodiscard]] inline ComplexMatrix identity(Eigen::Index dim) {
  return ComplexMatrix::Identity(dim, dim);
}

[[nodiscard]] inline ComplexMatrix diagonal(const std::vector<double>& values) {
  ComplexMatrix m = ComplexMatrix::Zero(static_cast<Eigen::Index>(values.size()),
                                        static_cast<Eigen::Index>(values.size()));
  for (std::size_t i = 0; i < values.size(); ++i) {
    m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(i)) = values[i];
  }
  return m;
}

namespace pauli {
inline ComplexMatrix I() { return identity(2); }
inline ComplexMatrix X() {
  ComplexMatrix m(2, 2);
  m << 0.0, 1.0, 1.0, 0.0;
  return m;
}
inline ComplexMatrix Y() {
  ComplexMatrix m(2, 2);
  m << 0.0, cplx(0.0, -1.0), cplx(0.0, 1.0), 0.0;
  return m;
}
inline ComplexMatrix Z() {
  ComplexMatrix m(2, 2);
  m << 1.0, 0.0, 0.0, -1.0;
  return m;
}
}  // namespace pauli

//------------------------------------------------------------------------------
// Core operations on raw matrices
//------------------------------------------------------------------------------

/// Kronecker product. Row index of the result is i_A * rows(B) + i_B, so
/// block (i, j) equals A(i, j) * B. Accepts rectangular operands so that
/// product states u (x) v can be formed from column vectors.
[[nodiscard]] inline ComplexMatrix tensor_product(const ComplexMatrix& a,
                                                  const ComplexMatrix& b) {
  ComplexMatrix out(a.rows() * b.rows(), a.cols() * b.cols());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    for (Eigen::Index j = 0; j < a.cols(); ++j) {
      out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    }
  }
  return out;
}

/// [A, B] = AB - BA.
[[nodiscard]] inline ComplexMatrix commutator(const ComplexMatrix& a,
                                              const ComplexMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols()) {
    throw DimensionError("commutator: operands must be square and of equal dimension (" +
                         std::to_string(a.rows()) + " vs " + std::to_string(b.rows()) + ")");
  }
  return a * b - b * a;
}

/// Spectral norm (largest singular value). Zero for empty matrices.
[[nodiscard]] inline double operator_norm(const ComplexMatrix& a) {
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<ComplexMatrix> svd(a);
  return svd.singularValues()(0);
}

/// Multiplies the column by a phase so that its largest-magnitude entry is
/// real and positive. Near-ties resolve to the lowest index.
inline void fix_column_phase(Eigen::Ref<StateVector> v) {
  if (v.size() == 0) return;
  const double peak = v.cwiseAbs().maxCoeff();
  if (peak == 0.0) return;
  Eigen::Index pick = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::abs(v(i)) >= peak * (1.0 - 1e-10)) {
      pick = i;
      break;
    }
  }
  const cplx phase = std::conj(v(pick)) / std::abs(v(pick));
  v *= phase;
  v(pick) = cplx(v(pick).real(), 0.0);
}

//------------------------------------------------------------------------------
// Strong operator types
//------------------------------------------------------------------------------

/// Self-adjoint operator. Construction checks ||M - M^dag|| against
/// herm_tol * max(1, ||M||) and stores the exactly symmetrized matrix.
class HermitianOperator {
 public:
  explicit HermitianOperator(const ComplexMatrix& m, double herm_tol = Tolerances{}.herm_tol) {
    require_square_finite(m, "HermitianOperator");
    const double skew = operator_norm(m - m.adjoint());
    if (skew > herm_tol * std::max(1.0, operator_norm(m))) {
      throw InvariantError("HermitianOperator: ||M - M^dag|| = " + std::to_string(skew) +
                           " exceeds tolerance");
    }
    matrix_ = 0.5 * (m + m.adjoint());
  }

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
};

/// Unitary matrix; construction checks ||U^dag U - I|| <= unitary_tol * dim.
class UnitaryMatrix {
 public:
  explicit UnitaryMatrix(ComplexMatrix m, double unitary_tol = Tolerances{}.unitary_tol)
      : matrix_(std::move(m)) {
    require_square_finite(matrix_, "UnitaryMatrix");
    const double dev = unitarity_defect(matrix_);
    if (dev > unitary_tol * static_cast<double>(matrix_.rows())) {
      throw InvariantError("UnitaryMatrix: ||U^dag U - I|| = " + std::to_string(dev) +
                           " exceeds tolerance");
    }
  }

  static UnitaryMatrix identity(Eigen::Index dim) { return UnitaryMatrix(syncsub::identity(dim)); }

  [[nodiscard]] static double unitarity_defect(const ComplexMatrix& m) {
    return operator_norm(m.adjoint() * m - syncsub::identity(m.rows()));
  }

  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_; }
  [[nodiscard]] Eigen::Index dim() const { return matrix_.rows(); }

 private:
  ComplexMatrix matrix_;
};

/// Eigen-decomposition of a Hermitian operator: ascending eigenvalues,
/// eigenvectors as columns of a unitary.
struct Spectrum {
  std::vector<double> eigenvalues;
  UnitaryMatrix eigenvectors;
};

/// Orthonormal basis (ambient_dim x k) of a subspace.
class Subspace {
 public:
  Subspace(Eigen::Index ambient_dim, ComplexMatrix basis, double tol_used)
      : ambient_dim_(ambient_dim), basis_(std::move(basis)), tol_used_(tol_used) {
    if (ambient_dim_ <= 0 || basis_.rows() != ambient_dim_) {
      throw DimensionError("Subspace: basis rows must equal the ambient dimension");
    }
    if (basis_.cols() > 0) {
      const double dev = operator_norm(basis_.adjoint() * basis_ -
                                       ComplexMatrix::Identity(basis_.cols(), basis_.cols()));
      if (dev > 1e-10) {
        throw InvariantError("Subspace: basis columns are not orthonormal (defect " +
                             std::to_string(dev) + ")");
      }
    }
  }

  [[nodiscard]] Eigen::Index ambient_dim() const { return ambient_dim_; }
  [[nodiscard]] Eigen::Index dim() const { return basis_.cols(); }
  [[nodiscard]] const ComplexMatrix& basis() const { return basis_; }
  [[nodiscard]] double tol_used() const { return tol_used_; }

 private:
  Eigen::Index ambient_dim_;
  ComplexMatrix basis_;
  double tol_used_;
};

//------------------------------------------------------------------------------
// Spectral operations
//------------------------------------------------------------------------------

[[nodiscard]] inline Spectrum hermitian_eig(const HermitianOperator& h,
                                            const Tolerances& tol = {}) {
  const ComplexMatrix& m = h.matrix();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> solver(m);
  if (solver.info() != Eigen::Success) {
    throw NumericalError("hermitian_eig: eigen-solver did not converge");
  }
  ComplexMatrix vecs = solver.eigenvectors();
  for (Eigen::Index j = 0; j < vecs.cols(); ++j) fix_column_phase(vecs.col(j));

  const Eigen::VectorXd& vals = solver.eigenvalues();
  std::vector<double> eigenvalues(vals.data(), vals.data() + vals.size());

  const ComplexMatrix recon = vecs * vals.cast<cplx>().asDiagonal() * vecs.adjoint();
  const double err = operator_norm(recon - m);
  if (err > tol.recon_tol * std::max(1.0, operator_norm(m))) {
    throw NumericalError("hermitian_eig: reconstruction error " + std::to_string(err));
  }
  return Spectrum{std::move(eigenvalues), UnitaryMatrix(std::move(vecs), tol.unitary_tol)};
}

/// exp(-i H t) assembled from a precomputed spectrum.
[[nodiscard]] inline ComplexMatrix evolve_matrix(const Spectrum& spec, double t) {
  const ComplexMatrix& v = spec.eigenvectors.matrix();
  StateVector phases(v.cols());
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    phases(j) = std::polar(1.0, -spec.eigenvalues[static_cast<std::size_t>(j)] * t);
  }
  return v * phases.asDiagonal() * v.adjoint();
}

/// U(t) = exp(-i H t) via the Hermitian eigendecomposition.
[[nodiscard]] inline UnitaryMatrix evolve(const HermitianOperator& h, double t,
                                          const Tolerances& tol = {}) {
  if (!std::isfinite(t)) throw InvariantError("evolve: time must be finite");
  return UnitaryMatrix(evolve_matrix(hermitian_eig(h, tol), t), tol.unitary_tol);
}

//------------------------------------------------------------------------------
// Subspaces
//------------------------------------------------------------------------------

/// Deterministic orthonormal basis for ran(P), P an orthogonal projector of
/// the given rank: column-pivoted QR of P, leading columns of Q, phase-fixed.
[[nodiscard]] inline ComplexMatrix range_basis(const ComplexMatrix& proj, Eigen::Index rank) {
  const Eigen::Index n = proj.rows();
  if (rank == 0) return ComplexMatrix(n, 0);
  Eigen::ColPivHouseholderQR<ComplexMatrix> qr(proj);
  ComplexMatrix q = qr.householderQ();
  ComplexMatrix basis = q.leftCols(rank);
  for (Eigen::Index j = 0; j < rank; ++j) fix_column_phase(basis.col(j));
  return basis;
}

/// Orthonormal basis of ker(A): right-singular vectors whose singular value
/// is <= tol * sigma_max (or <= abs_tol when sigma_max < 1e-300).
[[nodiscard]] inline Subspace null_space(const ComplexMatrix& a, double tol,
                                         double abs_tol = Tolerances{}.kernel_abs_tol) {
  require_square_finite(a, "null_space");
  if (!(tol > 0.0)) throw InvariantError("null_space: tol must be positive");
  const Eigen::Index n = a.cols();
  Eigen::JacobiSVD<ComplexMatrix> svd(a, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sigma_max = sv(0);
  const double threshold = sigma_max < 1e-300 ? abs_tol : tol * sigma_max;

  std::vector<Eigen::Index> cols;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (sv(j) <= threshold) cols.push_back(j);
  }
  const auto k = static_cast<Eigen::Index>(cols.size());
  ComplexMatrix raw(n, k);
  for (Eigen::Index j = 0; j < k; ++j) raw.col(j) = svd.matrixV().col(cols[j]);
  ComplexMatrix basis = range_basis(raw * raw.adjoint(), k);
  return Subspace(n, std::move(basis), threshold);
}

/// Orthogonal projector B B^dag onto the subspace.
[[nodiscard]] inline HermitianOperator projector(const Subspace& s) {
  return HermitianOperator(s.basis() * s.basis().adjoint());
}

/// ||(I - P) M P||: how much of ran(P) the map M sends outside ran(P).
[[nodiscard]] inline double leakage(const ComplexMatrix& proj, const ComplexMatrix& m) {
  return operator_norm((identity(proj.rows()) - proj) * m * proj);
}

/// Sine of the largest principal angle between two subspaces of equal
/// dimension; 1 when the dimensions differ.
[[nodiscard]] inline double subspace_distance(const Subspace& a, const Subspace& b) {
  if (a.ambient_dim() != b.ambient_dim()) {
    throw DimensionError("subspace_distance: ambient dimensions differ");
  }
  if (a.dim() != b.dim()) return 1.0;
  if (a.dim() == 0) return 0.0;
  const ComplexMatrix pa = a.basis() * a.basis().adjoint();
  return operator_norm(b.basis() - pa * b.basis());
}

//------------------------------------------------------------------------------
// Random operators
//------------------------------------------------------------------------------

[[nodiscard]] inline ComplexMatrix random_complex(Eigen::Index rows, Eigen::Index cols,
                                                  CounterRng& rng) {
  ComplexMatrix m(rows, cols);
  for (Eigen::Index j = 0; j < cols; ++j) {
    for (Eigen::Index i = 0; i < rows; ++i) {
      const double re = rng.normal();
      m(i, j) = cplx(re, rng.normal());
    }
  }
  return m;
}

/// GUE-distributed Hermitian matrix.
[[nodiscard]] inline ComplexMatrix random_hermitian(Eigen::Index dim, CounterRng& rng) {
  const ComplexMatrix g = random_complex(dim, dim, rng);
  return 0.5 * (g + g.adjoint());
}

/// Haar-distributed unitary (QR of a Ginibre matrix with the R-diagonal
/// phases divided out).
[[nodiscard]] inline ComplexMatrix random_unitary(Eigen::Index dim, CounterRng& rng) {
  const ComplexMatrix g = random_complex(dim, dim, rng);
  Eigen::HouseholderQR<ComplexMatrix> qr(g);
  ComplexMatrix q = qr.householderQ();
  const ComplexMatrix r = qr.matrixQR().triangularView<Eigen::Upper>();
  for (Eigen::Index j = 0; j < dim; ++j) {
    const double mag = std::abs(r(j, j));
    if (mag > 0.0) q.col(j) *= r(j, j) / mag;
  }
  return q;
}

/// Random unit vector.
[[nodiscard]] inline StateVector random_state(Eigen::Index dim, CounterRng& rng) {
  StateVector v = random_complex(dim, 1, rng);
  return v / v.norm();
}

}  // namespace syncsub
