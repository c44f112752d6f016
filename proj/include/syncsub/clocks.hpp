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
#include <cstdint>
#include <numeric>
#include <string>
#include <string_view>
#include <vector>

#include "syncsub/opcore.hpp"

namespace syncsub {

/// Clock observable T = basis * diag(labels) * basis^dag. The columns of the
/// basis are the clock states; the labels are their time values.
class ClockObservable {
 public:
  ClockObservable(std::vector<double> labels, UnitaryMatrix basis,
                  const Tolerances& tol = {})
      : labels_(std::move(labels)), basis_(std::move(basis)) {
    if (labels_.empty()) throw InvariantError("ClockObservable: labels must be nonempty");
    for (double l : labels_) {
      if (!std::isfinite(l)) throw InvariantError("ClockObservable: labels must be finite");
    }
    if (basis_.dim() != static_cast<Eigen::Index>(labels_.size())) {
      throw DimensionError("ClockObservable: basis dimension " + std::to_string(basis_.dim()) +
                           " does not match " + std::to_string(labels_.size()) + " labels");
    }
    std::vector<double> sorted = labels_;
    std::sort(sorted.begin(), sorted.end());
    non_degenerate_ = true;
    for (std::size_t i = 1; i < sorted.size(); ++i) {
      if (sorted[i] - sorted[i - 1] <= tol.label_sep) non_degenerate_ = false;
    }
    trivial_ = sorted.back() - sorted.front() <= tol.label_sep;
    const ComplexMatrix& v = basis_.matrix();
    Eigen::VectorXd d(static_cast<Eigen::Index>(labels_.size()));
    for (std::size_t i = 0; i < labels_.size(); ++i) d(static_cast<Eigen::Index>(i)) = labels_[i];
    matrix_ = HermitianOperator(v * d.cast<cplx>().asDiagonal() * v.adjoint(), tol.herm_tol);
  }

  [[nodiscard]] Eigen::Index dim() const { return basis_.dim(); }
  [[nodiscard]] const std::vector<double>& labels() const { return labels_; }
  [[nodiscard]] const UnitaryMatrix& basis() const { return basis_; }
  [[nodiscard]] const HermitianOperator& op() const { return matrix_; }
  [[nodiscard]] const ComplexMatrix& matrix() const { return matrix_.matrix(); }
  /// All labels pairwise more than label_sep apart.
  [[nodiscard]] bool non_degenerate() const { return non_degenerate_; }
  /// All labels equal: T is a multiple of the identity and carries no timing.
  [[nodiscard]] bool trivial() const { return trivial_; }

 private:
  std::vector<double> labels_;
  UnitaryMatrix basis_;
  HermitianOperator matrix_{ComplexMatrix::Zero(1, 1)};
  bool non_degenerate_ = true;
  bool trivial_ = false;
};

/// Clock in the standard basis.
[[nodiscard]] inline ClockObservable make_clock(const std::vector<double>& labels,
                                                const Tolerances& tol = {}) {
  if (labels.empty()) throw InvariantError("make_clock: labels must be nonempty");
  return ClockObservable(labels,
                         UnitaryMatrix::identity(static_cast<Eigen::Index>(labels.size())), tol);
}

/// Clock whose states are the eigenvectors of a Hermitian operator and whose
/// labels are its eigenvalues.
[[nodiscard]] inline ClockObservable clock_of(const HermitianOperator& t,
                                              const Tolerances& tol = {}) {
  Spectrum s = hermitian_eig(t, tol);
  return ClockObservable(std::move(s.eigenvalues), std::move(s.eigenvectors), tol);
}

//------------------------------------------------------------------------------
// Commutant block structure
//------------------------------------------------------------------------------

struct ClockBlock {
  double eigenvalue;
  HermitianOperator projector;
  Eigen::Index dim;
  /// Clock states spanning the block (columns of the clock basis).
  ComplexMatrix states;
};

struct BlockStructure {
  std::vector<ClockBlock> blocks;
};

/// One block per distinct label; labels closer than label_sep (chained over
/// the sorted label list) share a block. Blocks are ordered by eigenvalue.
[[nodiscard]] inline BlockStructure block_structure(const ClockObservable& t,
                                                    const Tolerances& tol = {}) {
  const auto& labels = t.labels();
  std::vector<std::size_t> order(labels.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return labels[a] < labels[b]; });

  std::vector<std::vector<std::size_t>> groups;
  for (std::size_t k = 0; k < order.size(); ++k) {
    if (k == 0 || labels[order[k]] - labels[order[k - 1]] > tol.label_sep) groups.emplace_back();
    groups.back().push_back(order[k]);
  }

  const ComplexMatrix& v = t.basis().matrix();
  BlockStructure out;
  for (const auto& g : groups) {
    ComplexMatrix states(t.dim(), static_cast<Eigen::Index>(g.size()));
    double mean = 0.0;
    // Keep original column order inside a block so projectors are reproducible.
    std::vector<std::size_t> cols = g;
    std::sort(cols.begin(), cols.end());
    for (std::size_t j = 0; j < cols.size(); ++j) {
      states.col(static_cast<Eigen::Index>(j)) = v.col(static_cast<Eigen::Index>(cols[j]));
      mean += labels[cols[j]];
    }
    mean /= static_cast<double>(cols.size());
    out.blocks.push_back(ClockBlock{mean, HermitianOperator(states * states.adjoint()),
                                    static_cast<Eigen::Index>(cols.size()), std::move(states)});
  }
  return out;
}

//------------------------------------------------------------------------------
// Compatibility
//------------------------------------------------------------------------------

enum class CompatibilityClass { diagonal, block_diagonal, incompatible };

[[nodiscard]] inline std::string_view to_string(CompatibilityClass c) {
  switch (c) {
    case CompatibilityClass::diagonal:
      return "diagonal";
    case CompatibilityClass::block_diagonal:
      return "block_diagonal";
    case CompatibilityClass::incompatible:
      return "incompatible";
  }
  return "unknown";
}

struct CompatibilityVerdict {
  double residual = 0.0;        // ||[H, T]||
  CompatibilityClass klass = CompatibilityClass::incompatible;
  double off_block_mass = 0.0;  // ||H - sum_l P_l H P_l||
};

inline void require_same_dim(const HermitianOperator& h, const ClockObservable& t,
                             std::string_view what) {
  if (h.dim() != t.dim()) {
    throw DimensionError(std::string(what) + ": Hamiltonian dimension " +
                         std::to_string(h.dim()) + " does not match clock dimension " +
                         std::to_string(t.dim()));
  }
}

[[nodiscard]] inline double compatibility_residual(const HermitianOperator& h,
                                                   const ClockObservable& t) {
  require_same_dim(h, t, "compatibility_residual");
  return operator_norm(commutator(h.matrix(), t.matrix()));
}

/// Compresses H onto the commutant of T: sum over blocks of P H P.
[[nodiscard]] inline ComplexMatrix block_compress(const ComplexMatrix& h,
                                                  const BlockStructure& blocks) {
  ComplexMatrix out = ComplexMatrix::Zero(h.rows(), h.cols());
  for (const auto& b : blocks.blocks) {
    out += b.projector.matrix() * h * b.projector.matrix();
  }
  return out;
}

[[nodiscard]] inline CompatibilityVerdict classify_compatibility(const HermitianOperator& h,
                                                                 const ClockObservable& t,
                                                                 const Tolerances& tol = {}) {
  require_same_dim(h, t, "classify_compatibility");
  const ComplexMatrix& hm = h.matrix();
  const BlockStructure blocks = block_structure(t, tol);

  CompatibilityVerdict v;
  v.residual = operator_norm(commutator(hm, t.matrix()));
  v.off_block_mass = operator_norm(hm - block_compress(hm, blocks));

  const double h_norm = operator_norm(hm);
  const double t_norm = operator_norm(t.matrix());
  if (v.residual > tol.compat_tol * std::max(1.0, h_norm * t_norm)) {
    v.klass = CompatibilityClass::incompatible;
    return v;
  }
  const bool all_one_dim = std::all_of(blocks.blocks.begin(), blocks.blocks.end(),
                                       [](const ClockBlock& b) { return b.dim == 1; });
  const ComplexMatrix& basis = t.basis().matrix();
  const ComplexMatrix in_clock = basis.adjoint() * hm * basis;
  const ComplexMatrix off_diag = in_clock - ComplexMatrix(in_clock.diagonal().asDiagonal());
  const bool diag = operator_norm(off_diag) <= tol.compat_tol * std::max(1.0, h_norm);
  v.klass = (all_one_dim || diag) ? CompatibilityClass::diagonal
                                  : CompatibilityClass::block_diagonal;
  return v;
}

/// Random Hermitian element of the commutant of T: independent GUE blocks on
/// each eigenspace. Deterministic in the seed.
[[nodiscard]] inline HermitianOperator random_compatible(const ClockObservable& t,
                                                         std::uint64_t seed,
                                                         const Tolerances& tol = {}) {
  CounterRng rng(seed);
  const BlockStructure blocks = block_structure(t, tol);
  ComplexMatrix h = ComplexMatrix::Zero(t.dim(), t.dim());
  for (const auto& b : blocks.blocks) {
    const ComplexMatrix r = random_hermitian(b.dim, rng);
    h += b.states * r * b.states.adjoint();
  }
  return HermitianOperator(h, tol.herm_tol);
}

/// Canonical clock compatible with a given Hamiltonian. H's eigenvalues are
/// clustered (consecutive gaps <= gap_tol join a cluster) and the k-th
/// cluster's eigenspace gets label k. A scalar H yields the trivial clock,
/// reported through ClockObservable::trivial().
[[nodiscard]] inline ClockObservable clock_from_hamiltonian(const HermitianOperator& h,
                                                            double gap_tol,
                                                            const Tolerances& tol = {}) {
  if (!(gap_tol > 0.0)) throw InvariantError("clock_from_hamiltonian: gap_tol must be positive");
  Spectrum s = hermitian_eig(h, tol);
  std::vector<double> labels(s.eigenvalues.size());
  double cluster = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (i > 0 && s.eigenvalues[i] - s.eigenvalues[i - 1] > gap_tol) cluster += 1.0;
    labels[i] = cluster;
  }
  return ClockObservable(std::move(labels), std::move(s.eigenvectors), tol);
}

}  // namespace syncsub
