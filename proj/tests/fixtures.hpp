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

// Random system generators shared by the unit and acceptance suites.

#pragma once

#include <cstdint>
#include <vector>

#include "syncsub/sync.hpp"

namespace syncsub::fixtures {

/// Clock with integer labels drawn from [lo, hi] in a Haar-random basis.
/// Integer labels keep every nonzero eigenvalue of K at magnitude >= 1.
inline ClockObservable random_integer_clock(int dim, int lo, int hi, CounterRng& rng,
                                            std::optional<double> first_label = std::nullopt) {
  std::vector<double> labels(static_cast<std::size_t>(dim));
  for (auto& l : labels) l = rng.integer(lo, hi);
  if (first_label) labels[0] = *first_label;
  return ClockObservable(labels, UnitaryMatrix(random_unitary(dim, rng)));
}

/// H = H_A (x) I + I (x) H_B with each local term in its clock's commutant.
inline SyncSystem random_local_system(std::uint64_t seed, int min_dim = 2, int max_dim = 4) {
  CounterRng rng(seed);
  const int da = rng.integer(min_dim, max_dim);
  const int db = rng.integer(min_dim, max_dim);
  ClockObservable ta = random_integer_clock(da, 0, 2, rng);
  ClockObservable tb = random_integer_clock(db, 0, 2, rng);
  const HermitianOperator ha = random_compatible(ta, rng.next_u64());
  const HermitianOperator hb = random_compatible(tb, rng.next_u64());
  return SyncSystem::from_locals(std::move(ta), std::move(tb), ha, hb);
}

/// H = H0 + eps * V with [H0, K] = 0 and ||[V, K]|| = 1, so the realized
/// epsilon equals eps up to roundoff. The synchronization subspace is
/// nontrivial because the clocks share their first label.
inline SyncSystem random_eps_system(double eps, std::uint64_t seed, int max_dim = 6) {
  CounterRng rng(seed);
  const int da = rng.integer(2, max_dim);
  const int db = rng.integer(2, max_dim);
  ClockObservable ta = random_integer_clock(da, 0, 3, rng);
  ClockObservable tb = random_integer_clock(db, 0, 3, rng, ta.labels()[0]);
  const HermitianOperator k = sync_operator(ta, tb);
  const ComplexMatrix h0 = random_compatible(clock_of(k), rng.next_u64()).matrix();
  ComplexMatrix v = random_hermitian(k.dim(), rng);
  v /= operator_norm(commutator(v, k.matrix()));
  return SyncSystem(std::move(ta), std::move(tb), HermitianOperator(h0 + eps * v));
}

/// n points evenly spaced over [lo, hi], endpoints included.
inline std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
  return out;
}

}  // namespace syncsub::fixtures
