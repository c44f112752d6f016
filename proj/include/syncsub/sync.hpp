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
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "syncsub/clocks.hpp"

namespace syncsub {

/// Bipartite clock system: local clocks T_A, T_B and a joint Hamiltonian on
/// H_A (x) H_B. The clocks may have different dimensions.
class SyncSystem {
 public:
  SyncSystem(ClockObservable clock_a, ClockObservable clock_b, HermitianOperator hamiltonian)
      : clock_a_(std::move(clock_a)),
        clock_b_(std::move(clock_b)),
        hamiltonian_(std::move(hamiltonian)) {
    if (hamiltonian_.dim() != clock_a_.dim() * clock_b_.dim()) {
      throw DimensionError("SyncSystem: Hamiltonian dimension " +
                           std::to_string(hamiltonian_.dim()) + " != " +
                           std::to_string(clock_a_.dim()) + " * " +
                           std::to_string(clock_b_.dim()));
    }
  }

  /// H = H_A (x) I + I (x) H_B.
  static SyncSystem from_locals(ClockObservable clock_a, ClockObservable clock_b,
                                const HermitianOperator& h_a, const HermitianOperator& h_b,
                                const Tolerances& tol = {}) {
    if (h_a.dim() != clock_a.dim() || h_b.dim() != clock_b.dim()) {
      throw DimensionError("SyncSystem::from_locals: local Hamiltonians must match clock dims");
    }
    const ComplexMatrix left = tensor_product(h_a.matrix(), identity(h_b.dim()));
    const ComplexMatrix right = tensor_product(identity(h_a.dim()), h_b.matrix());
    const double cross = operator_norm(commutator(left, right));
    if (cross > 1e-12 * operator_norm(h_a.matrix()) * operator_norm(h_b.matrix())) {
      throw InvariantError("SyncSystem::from_locals: local terms do not commute");
    }
    return SyncSystem(std::move(clock_a), std::move(clock_b),
                      HermitianOperator(left + right, tol.herm_tol));
  }

  [[nodiscard]] const ClockObservable& clock_a() const { return clock_a_; }
  [[nodiscard]] const ClockObservable& clock_b() const { return clock_b_; }
  [[nodiscard]] const HermitianOperator& hamiltonian() const { return hamiltonian_; }
  [[nodiscard]] Eigen::Index dim() const { return hamiltonian_.dim(); }

 private:
  ClockObservable clock_a_;
  ClockObservable clock_b_;
  HermitianOperator hamiltonian_;
};

/// K = T_A (x) I - I (x) T_B.
[[nodiscard]] inline HermitianOperator sync_operator(const ClockObservable& t_a,
                                                     const ClockObservable& t_b) {
  return HermitianOperator(tensor_product(t_a.matrix(), identity(t_b.dim())) -
                           tensor_product(identity(t_a.dim()), t_b.matrix()));
}

struct SyncOperatorBundle {
  HermitianOperator k;
  Subspace kernel;
  HermitianOperator projector;
  /// Realized ||[H, K]||.
  double epsilon;
  /// Smallest singular value of K above the kernel threshold (infinity when
  /// K vanishes). ||(I - P) psi|| <= ||K psi|| / kernel_gap.
  double kernel_gap;
};

[[nodiscard]] inline SyncOperatorBundle sync_bundle(const SyncSystem& sys,
                                                    const Tolerances& tol = {}) {
  HermitianOperator k = sync_operator(sys.clock_a(), sys.clock_b());
  Subspace kernel = null_space(k.matrix(), tol.kernel_tol, tol.kernel_abs_tol);
  HermitianOperator proj = projector(kernel);
  const double eps = operator_norm(commutator(sys.hamiltonian().matrix(), k.matrix()));

  double gap = std::numeric_limits<double>::infinity();
  Eigen::JacobiSVD<ComplexMatrix> svd(k.matrix());
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i) {
    const double s = svd.singularValues()(i);
    if (s > kernel.tol_used()) gap = std::min(gap, s);
  }
  return SyncOperatorBundle{std::move(k), std::move(kernel), std::move(proj), eps, gap};
}

/// max_t ||(I - P) U(t) P||: leakage of the synchronization subspace.
[[nodiscard]] inline double preservation_residual(const SyncSystem& sys,
                                                  const SyncOperatorBundle& bundle,
                                                  std::span<const double> times,
                                                  const Tolerances& tol = {}) {
  const Spectrum spec = hermitian_eig(sys.hamiltonian(), tol);
  const ComplexMatrix& p = bundle.projector.matrix();
  double worst = 0.0;
  for (double t : times) {
    if (!std::isfinite(t)) throw InvariantError("preservation_residual: times must be finite");
    if (t == 0.0) continue;  // U(0) = I leaks nothing
    worst = std::max(worst, leakage(p, evolve_matrix(spec, t)));
  }
  return worst;
}

/// Largest elementwise difference between the sorted spectra of U(t)^dag A U(t)
/// and A.
[[nodiscard]] inline double spectrum_shift(const HermitianOperator& h,
                                           const HermitianOperator& a, double t,
                                           const Tolerances& tol = {}) {
  const ComplexMatrix u = evolve_matrix(hermitian_eig(h, tol), t);
  const Eigen::VectorXd before =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(a.matrix(), Eigen::EigenvaluesOnly)
          .eigenvalues();
  const ComplexMatrix rotated = u.adjoint() * a.matrix() * u;
  const Eigen::VectorXd after =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(0.5 * (rotated + rotated.adjoint()),
                                                   Eigen::EigenvaluesOnly)
          .eigenvalues();
  return (before - after).cwiseAbs().maxCoeff();
}

//------------------------------------------------------------------------------
// Drift under epsilon-compatible dynamics
//------------------------------------------------------------------------------

struct DriftReport {
  std::vector<double> times;
  std::vector<double> drift;     // ||K psi(t)||
  std::vector<double> fidelity;  // ||P psi(t)||^2
  std::vector<double> leakage;   // ||(I - P) psi(t)||^2
  double epsilon = 0.0;
  double bound_slack = 0.0;
  bool drift_bound_ok = true;     // drift <= eps |t| + slack everywhere
  bool fidelity_bound_ok = true;  // fidelity >= 1 - eps^2 t^2 - slack everywhere
  /// Largest excess over either bound (drift - eps|t|, 1 - eps^2 t^2 - F);
  /// nonpositive values mean both bounds hold without using the slack.
  double max_bound_excess = -std::numeric_limits<double>::infinity();

  [[nodiscard]] double drift_bound(std::size_t i) const { return epsilon * std::abs(times[i]); }
  [[nodiscard]] double fidelity_bound(std::size_t i) const {
    return 1.0 - epsilon * epsilon * times[i] * times[i];
  }
};

inline void require_kernel_state(const SyncOperatorBundle& bundle, const StateVector& psi0,
                                 const Tolerances& tol) {
  if (psi0.size() != bundle.k.dim()) {
    throw DimensionError("initial state has dimension " + std::to_string(psi0.size()) +
                         ", expected " + std::to_string(bundle.k.dim()));
  }
  if (!psi0.allFinite()) throw InvariantError("initial state has non-finite entries");
  if (std::abs(psi0.norm() - 1.0) > tol.norm_tol) {
    throw InvariantError("initial state is not normalized (norm " +
                         std::to_string(psi0.norm()) + ")");
  }
  const double off = (bundle.k.matrix() * psi0).norm();
  if (off > tol.init_tol) {
    throw InvariantError("initial state is outside the synchronization subspace (||K psi0|| = " +
                         std::to_string(off) + ")");
  }
}

[[nodiscard]] inline DriftReport drift_trace(const SyncSystem& sys,
                                             const SyncOperatorBundle& bundle,
                                             const StateVector& psi0,
                                             std::span<const double> times,
                                             const Tolerances& tol = {}) {
  require_kernel_state(bundle, psi0, tol);
  const Spectrum spec = hermitian_eig(sys.hamiltonian(), tol);
  const ComplexMatrix& v = spec.eigenvectors.matrix();
  const StateVector coeffs = v.adjoint() * psi0;
  const ComplexMatrix& k = bundle.k.matrix();
  const ComplexMatrix& p = bundle.projector.matrix();

  DriftReport r;
  r.epsilon = bundle.epsilon;
  r.bound_slack = tol.bound_slack;
  r.times.assign(times.begin(), times.end());
  StateVector phased(coeffs.size());
  for (std::size_t i = 0; i < r.times.size(); ++i) {
    const double t = r.times[i];
    if (!std::isfinite(t)) throw InvariantError("drift_trace: times must be finite");
    for (Eigen::Index j = 0; j < coeffs.size(); ++j) {
      phased(j) = std::polar(1.0, -spec.eigenvalues[static_cast<std::size_t>(j)] * t) * coeffs(j);
    }
    const StateVector psi = v * phased;
    const StateVector in_kernel = p * psi;
    const double drift = (k * psi).norm();
    const double fid = in_kernel.squaredNorm();
    r.drift.push_back(drift);
    r.fidelity.push_back(fid);
    r.leakage.push_back((psi - in_kernel).squaredNorm());

    const double drift_excess = drift - r.drift_bound(i);
    const double fid_excess = r.fidelity_bound(i) - fid;
    r.max_bound_excess = std::max({r.max_bound_excess, drift_excess, fid_excess});
    if (drift_excess > tol.bound_slack) r.drift_bound_ok = false;
    if (fid_excess > tol.bound_slack) r.fidelity_bound_ok = false;
  }
  return r;
}

[[nodiscard]] inline DriftReport drift_trace(const SyncSystem& sys, const StateVector& psi0,
                                             std::span<const double> times,
                                             const Tolerances& tol = {}) {
  return drift_trace(sys, sync_bundle(sys, tol), psi0, times, tol);
}

/// Time window |t| <= delta / epsilon over which drift stays below delta;
/// infinity when epsilon <= 1e-15.
[[nodiscard]] inline double stability_window(const SyncOperatorBundle& bundle, double delta) {
  if (!(delta > 0.0)) throw InvariantError("stability_window: delta must be positive");
  if (bundle.epsilon <= 1e-15) return std::numeric_limits<double>::infinity();
  return delta / bundle.epsilon;
}

/// Random unit vector in the synchronization subspace, deterministic in seed.
[[nodiscard]] inline StateVector sample_kernel_state(const SyncOperatorBundle& bundle,
                                                     std::uint64_t seed) {
  const Eigen::Index k = bundle.kernel.dim();
  if (k == 0) throw InvariantError("sample_kernel_state: synchronization subspace is trivial");
  CounterRng rng(seed);
  const StateVector c = random_complex(k, 1, rng);
  StateVector psi = bundle.kernel.basis() * c;
  return psi / psi.norm();
}

}  // namespace syncsub
