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

#include <cmath>
#include <cstdint>
#include <map>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace syncsub {

inline constexpr std::string_view kVersion = "0.3.0";

//------------------------------------------------------------------------------
// Errors
//------------------------------------------------------------------------------

/// Base of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes do not agree.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// A value violates a type invariant or an operation precondition.
class InvariantError : public Error {
 public:
  using Error::Error;
};

/// A computation produced a result outside its numerical guarantees.
class NumericalError : public Error {
 public:
  using Error::Error;
};

//------------------------------------------------------------------------------
// Tolerance policy
//------------------------------------------------------------------------------

/// Every threshold used by the library, in one place so the harness can
/// override them by name and record what was used.
struct Tolerances {
  double herm_tol = 1e-12;        // relative, ||M - M^dag|| / max(1, ||M||)
  double unitary_tol = 1e-12;     // ||U^dag U - I|| / dim
  double recon_tol = 1e-12;       // relative eigen-reconstruction error
  double kernel_tol = 1e-10;      // relative to sigma_max
  double kernel_abs_tol = 1e-12;  // used when sigma_max underflows
  double label_sep = 1e-9;        // absolute, merges clock labels
  double compat_tol = 1e-10;      // relative commutation threshold
  double bound_slack = 1e-9;      // absolute slack on drift/fidelity bounds
  double init_tol = 1e-8;         // ||K psi0|| allowed for kernel states
  double norm_tol = 1e-12;        // | ||psi0|| - 1 |
  double equivar_tol = 1e-10;
  double match_tol = 1e-9;
  double mult_round_tol = 1e-6;
  double schur_tol = 1e-9;

  /// Name/value view used for reports and `--tol name=value` overrides.
  [[nodiscard]] std::map<std::string, double> as_map() const {
    return {{"herm_tol", herm_tol},         {"unitary_tol", unitary_tol},
            {"recon_tol", recon_tol},       {"kernel_tol", kernel_tol},
            {"kernel_abs_tol", kernel_abs_tol}, {"label_sep", label_sep},
            {"compat_tol", compat_tol},     {"bound_slack", bound_slack},
            {"init_tol", init_tol},         {"norm_tol", norm_tol},
            {"equivar_tol", equivar_tol},   {"match_tol", match_tol},
            {"mult_round_tol", mult_round_tol}, {"schur_tol", schur_tol}};
  }

  /// Sets a tolerance by name. Throws InvariantError for unknown names or
  /// non-positive / non-finite values.
  void set(std::string_view name, double value) {
    if (!std::isfinite(value) || value <= 0.0) {
      throw InvariantError("tolerance '" + std::string(name) +
                           "' must be positive and finite");
    }
    double* slot = lookup(name);
    if (slot == nullptr) {
      throw InvariantError("unknown tolerance '" + std::string(name) + "'");
    }
    *slot = value;
  }

 private:
  double* lookup(std::string_view name) {
    if (name == "herm_tol") return &herm_tol;
    if (name == "unitary_tol") return &unitary_tol;
    if (name == "recon_tol") return &recon_tol;
    if (name == "kernel_tol") return &kernel_tol;
    if (name == "kernel_abs_tol") return &kernel_abs_tol;
    if (name == "label_sep") return &label_sep;
    if (name == "compat_tol") return &compat_tol;
    if (name == "bound_slack") return &bound_slack;
    if (name == "init_tol") return &init_tol;
    if (name == "norm_tol") return &norm_tol;
    if (name == "equivar_tol") return &equivar_tol;
    if (name == "match_tol") return &match_tol;
    if (name == "mult_round_tol") return &mult_round_tol;
    if (name == "schur_tol") return &schur_tol;
    return nullptr;
  }
};

//------------------------------------------------------------------------------
// Random numbers
//------------------------------------------------------------------------------

/// Counter-based generator: the n-th draw is splitmix64(seed + n * golden),
/// so a stream is fully determined by (seed, counter) on every platform.
/// Distributions are implemented here rather than via <random> because the
/// standard distributions are not specified bit-for-bit.
class CounterRng {
 public:
  static constexpr std::string_view kName = "splitmix64-counter/box-muller";

  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + (++counter_) * 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [lo, hi].
  int integer(int lo, int hi) {
    const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
    return lo + static_cast<int>(next_u64() % span);
  }

  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  [[nodiscard]] std::uint64_t seed() const { return seed_; }
  [[nodiscard]] std::uint64_t counter() const { return counter_; }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace syncsub
