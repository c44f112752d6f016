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

// Finite groups, their unitary representations, and the character-theoretic
// machinery used to build symmetry-protected synchronization subspaces.
//
// Groups are stored extensionally (multiplication table over element
// indices). Representations carry one matrix per element, so homomorphism
// checks can be exhaustive for the small groups this library targets.

#pragma once

#include <algorithm>
#include <cstdint>
#include <deque>
#include <map>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "syncsub/opcore.hpp"

namespace syncsub {

//------------------------------------------------------------------------------
// Groups
//------------------------------------------------------------------------------

class FiniteGroup {
 public:
  /// Validates the table (Latin square, identity, inverses, associativity for
  /// order <= 64) and computes conjugacy classes. Classes are ordered by
  /// their smallest element index; elements within a class ascend.
  FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> mult)
      : labels_(std::move(labels)), mult_(std::move(mult)) {
    const int n = order();
    if (n == 0) throw InvariantError("FiniteGroup: group must be nonempty");
    if (static_cast<int>(mult_.size()) != n) {
      throw InvariantError("FiniteGroup: multiplication table must be order x order");
    }
    for (const auto& row : mult_) {
      if (static_cast<int>(row.size()) != n) {
        throw InvariantError("FiniteGroup: multiplication table must be order x order");
      }
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      for (int v : row) {
        if (v < 0 || v >= n || seen[static_cast<std::size_t>(v)]) {
          throw InvariantError("FiniteGroup: multiplication table is not a Latin square");
        }
        seen[static_cast<std::size_t>(v)] = true;
      }
    }
    for (int j = 0; j < n; ++j) {
      std::vector<bool> seen(static_cast<std::size_t>(n), false);
      for (int i = 0; i < n; ++i) {
        const int v = mul(i, j);
        if (seen[static_cast<std::size_t>(v)]) {
          throw InvariantError("FiniteGroup: multiplication table is not a Latin square");
        }
        seen[static_cast<std::size_t>(v)] = true;
      }
    }

    identity_ = -1;
    for (int e = 0; e < n && identity_ < 0; ++e) {
      bool ok = true;
      for (int g = 0; g < n && ok; ++g) ok = mul(e, g) == g && mul(g, e) == g;
      if (ok) identity_ = e;
    }
    if (identity_ < 0) throw InvariantError("FiniteGroup: no identity element");

    inverse_.assign(static_cast<std::size_t>(n), -1);
    for (int g = 0; g < n; ++g) {
      for (int h = 0; h < n; ++h) {
        if (mul(g, h) == identity_) {
          if (mul(h, g) != identity_) throw InvariantError("FiniteGroup: inverses inconsistent");
          inverse_[static_cast<std::size_t>(g)] = h;
        }
      }
    }

    if (n <= 64) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          for (int c = 0; c < n; ++c) {
            if (mul(mul(a, b), c) != mul(a, mul(b, c))) {
              throw InvariantError("FiniteGroup: multiplication is not associative");
            }
          }
        }
      }
    }

    class_of_.assign(static_cast<std::size_t>(n), -1);
    for (int g = 0; g < n; ++g) {
      if (class_of_[static_cast<std::size_t>(g)] >= 0) continue;
      const int id = static_cast<int>(classes_.size());
      std::vector<int> cls;
      for (int x = 0; x < n; ++x) {
        const int c = mul(mul(x, g), inverse(x));
        if (class_of_[static_cast<std::size_t>(c)] < 0) {
          class_of_[static_cast<std::size_t>(c)] = id;
          cls.push_back(c);
        }
      }
      std::sort(cls.begin(), cls.end());
      classes_.push_back(std::move(cls));
    }
  }

  /// Same, but checks that the supplied classes agree with the computed ones
  /// and adopts the supplied class order.
  FiniteGroup(std::vector<std::string> labels, std::vector<std::vector<int>> mult,
              const std::vector<std::vector<int>>& classes)
      : FiniteGroup(std::move(labels), std::move(mult)) {
    std::vector<std::vector<int>> reordered;
    std::vector<bool> used(classes_.size(), false);
    std::vector<int> seen(static_cast<std::size_t>(order()), 0);
    for (auto cls : classes) {
      std::sort(cls.begin(), cls.end());
      for (int g : cls) {
        if (g < 0 || g >= order()) throw InvariantError("FiniteGroup: class index out of range");
        ++seen[static_cast<std::size_t>(g)];
      }
      auto it = std::find(classes_.begin(), classes_.end(), cls);
      if (it == classes_.end()) {
        throw InvariantError("FiniteGroup: supplied class is not closed under conjugation");
      }
      used[static_cast<std::size_t>(it - classes_.begin())] = true;
      reordered.push_back(cls);
    }
    if (std::any_of(seen.begin(), seen.end(), [](int c) { return c != 1; }) ||
        std::find(used.begin(), used.end(), false) != used.end()) {
      throw InvariantError("FiniteGroup: supplied classes do not partition the group");
    }
    classes_ = std::move(reordered);
    for (std::size_t c = 0; c < classes_.size(); ++c) {
      for (int g : classes_[c]) class_of_[static_cast<std::size_t>(g)] = static_cast<int>(c);
    }
  }

  [[nodiscard]] int order() const { return static_cast<int>(labels_.size()); }
  [[nodiscard]] int mul(int a, int b) const {
    return mult_[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)];
  }
  [[nodiscard]] int identity() const { return identity_; }
  [[nodiscard]] int inverse(int g) const { return inverse_[static_cast<std::size_t>(g)]; }
  [[nodiscard]] int class_of(int g) const { return class_of_[static_cast<std::size_t>(g)]; }
  [[nodiscard]] const std::vector<std::vector<int>>& classes() const { return classes_; }
  [[nodiscard]] int num_classes() const { return static_cast<int>(classes_.size()); }
  [[nodiscard]] const std::vector<std::string>& labels() const { return labels_; }
  [[nodiscard]] const std::vector<std::vector<int>>& mult_table() const { return mult_; }

  [[nodiscard]] std::optional<int> index_of(std::string_view label) const {
    for (int g = 0; g < order(); ++g) {
      if (labels_[static_cast<std::size_t>(g)] == label) return g;
    }
    return std::nullopt;
  }

 private:
  std::vector<std::string> labels_;
  std::vector<std::vector<int>> mult_;
  int identity_ = 0;
  std::vector<int> inverse_;
  std::vector<int> class_of_;
  std::vector<std::vector<int>> classes_;
};

//------------------------------------------------------------------------------
// Characters
//------------------------------------------------------------------------------

struct Irrep {
  std::string name;
  int dim = 1;
  std::vector<cplx> values;  // one per conjugacy class
};

struct CharacterTable {
  std::vector<Irrep> irreps;

  [[nodiscard]] cplx character(std::size_t irrep, const FiniteGroup& g, int element) const {
    return irreps[irrep].values[static_cast<std::size_t>(g.class_of(element))];
  }
};

/// Checks sum of d^2 = |G|, chi(e) = d, and row orthogonality to 1e-10.
inline void validate_characters(const CharacterTable& table, const FiniteGroup& g) {
  int dim_sq = 0;
  for (const auto& irr : table.irreps) {
    if (static_cast<int>(irr.values.size()) != g.num_classes()) {
      throw InvariantError("character table: irrep '" + irr.name + "' has " +
                           std::to_string(irr.values.size()) + " values for " +
                           std::to_string(g.num_classes()) + " classes");
    }
    if (irr.dim <= 0) throw InvariantError("character table: irrep dimension must be positive");
    const cplx at_e = irr.values[static_cast<std::size_t>(g.class_of(g.identity()))];
    if (std::abs(at_e - cplx(irr.dim, 0.0)) > 1e-10) {
      throw InvariantError("character table: chi(e) != dim for irrep '" + irr.name + "'");
    }
    dim_sq += irr.dim * irr.dim;
  }
  if (dim_sq != g.order()) {
    throw InvariantError("character table: sum of squared dimensions " + std::to_string(dim_sq) +
                         " != group order " + std::to_string(g.order()));
  }
  for (std::size_t a = 0; a < table.irreps.size(); ++a) {
    for (std::size_t b = 0; b < table.irreps.size(); ++b) {
      cplx s = 0.0;
      for (int x = 0; x < g.order(); ++x) {
        s += table.character(a, g, x) * std::conj(table.character(b, g, x));
      }
      s /= static_cast<double>(g.order());
      if (std::abs(s - cplx(a == b ? 1.0 : 0.0, 0.0)) > 1e-10) {
        throw InvariantError("character table: rows '" + table.irreps[a].name + "' and '" +
                             table.irreps[b].name + "' violate orthogonality");
      }
    }
  }
}

//------------------------------------------------------------------------------
// Built-in groups
//------------------------------------------------------------------------------

struct BuiltinGroup {
  FiniteGroup group;
  CharacterTable characters;
  /// Natural permutation action on points, one permutation per element.
  std::vector<std::vector<int>> action;
};

namespace detail {

using Perm = std::vector<int>;

inline Perm compose(const Perm& p, const Perm& q) {
  Perm r(q.size());
  for (std::size_t i = 0; i < q.size(); ++i) r[i] = p[static_cast<std::size_t>(q[i])];
  return r;
}

inline std::vector<std::vector<int>> table_of(const std::vector<Perm>& elems) {
  std::vector<std::vector<int>> mult(elems.size(), std::vector<int>(elems.size()));
  for (std::size_t a = 0; a < elems.size(); ++a) {
    for (std::size_t b = 0; b < elems.size(); ++b) {
      const Perm c = compose(elems[a], elems[b]);
      const auto it = std::find(elems.begin(), elems.end(), c);
      if (it == elems.end()) throw InvariantError("permutation set is not closed");
      mult[a][b] = static_cast<int>(it - elems.begin());
    }
  }
  return mult;
}

template <class CharFn>
CharacterTable tabulate(const FiniteGroup& g, const std::vector<std::string>& names,
                        const std::vector<int>& dims, CharFn chi) {
  CharacterTable t;
  for (std::size_t k = 0; k < names.size(); ++k) {
    Irrep irr{names[k], dims[k], {}};
    for (const auto& cls : g.classes()) {
      const cplx v = chi(k, cls.front());
      for (int x : cls) {
        if (std::abs(chi(k, x) - v) > 1e-12) {
          throw InvariantError("character is not a class function");
        }
      }
      irr.values.push_back(v);
    }
    t.irreps.push_back(std::move(irr));
  }
  validate_characters(t, g);
  return t;
}

inline BuiltinGroup cyclic(int n) {
  std::vector<Perm> elems;
  std::vector<std::string> labels;
  for (int k = 0; k < n; ++k) {
    Perm p(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) p[static_cast<std::size_t>(i)] = (i + k) % n;
    elems.push_back(std::move(p));
    labels.push_back(k == 0 ? "e" : (k == 1 ? "g" : "g" + std::to_string(k)));
  }
  FiniteGroup g(labels, table_of(elems));
  std::vector<std::string> names;
  for (int j = 0; j < n; ++j) names.push_back("chi" + std::to_string(j));
  auto chars = tabulate(g, names, std::vector<int>(static_cast<std::size_t>(n), 1),
                        [n](std::size_t j, int k) {
                          // exact values at the quarter turns keep Z2/Z4 tables real
                          const long jk = (static_cast<long>(j) * k) % n;
                          if ((4 * jk) % n == 0) {
                            static constexpr double re[] = {1.0, 0.0, -1.0, 0.0};
                            static constexpr double im[] = {0.0, 1.0, 0.0, -1.0};
                            const auto q = static_cast<std::size_t>((4 * jk) / n);
                            return cplx(re[q], im[q]);
                          }
                          return std::polar(1.0, 2.0 * std::numbers::pi *
                                                     static_cast<double>(jk) / n);
                        });
  return BuiltinGroup{std::move(g), std::move(chars), std::move(elems)};
}

inline BuiltinGroup klein_four() {
  // index = a + 2b for a^a b^b; product is xor of indices
  std::vector<Perm> elems = {{0, 1, 2, 3}, {1, 0, 3, 2}, {2, 3, 0, 1}, {3, 2, 1, 0}};
  FiniteGroup g({"e", "a", "b", "ab"}, table_of(elems));
  auto chars = tabulate(g, {"chi00", "chi10", "chi01", "chi11"}, {1, 1, 1, 1},
                        [](std::size_t k, int x) {
                          const int s = static_cast<int>(k) & 1;
                          const int t = (static_cast<int>(k) >> 1) & 1;
                          const int a = x & 1;
                          const int b = (x >> 1) & 1;
                          return cplx(((s * a + t * b) % 2 == 0) ? 1.0 : -1.0, 0.0);
                        });
  return BuiltinGroup{std::move(g), std::move(chars), std::move(elems)};
}

inline int fixed_points(const Perm& p) {
  int f = 0;
  for (std::size_t i = 0; i < p.size(); ++i) f += p[i] == static_cast<int>(i) ? 1 : 0;
  return f;
}

inline int parity(const Perm& p) {
  int inversions = 0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    for (std::size_t j = i + 1; j < p.size(); ++j) inversions += p[i] > p[j] ? 1 : 0;
  }
  return inversions % 2 == 0 ? 1 : -1;
}

inline BuiltinGroup symmetric3() {
  std::vector<Perm> elems;
  Perm p = {0, 1, 2};
  do {
    elems.push_back(p);
  } while (std::next_permutation(p.begin(), p.end()));
  std::vector<std::string> labels;
  for (const auto& e : elems) {
    labels.push_back(std::to_string(e[0]) + std::to_string(e[1]) + std::to_string(e[2]));
  }
  labels[0] = "e";
  FiniteGroup g(labels, table_of(elems));
  auto chars = tabulate(g, {"triv", "sign", "std"}, {1, 1, 2}, [&](std::size_t k, int x) {
    const Perm& q = elems[static_cast<std::size_t>(x)];
    if (k == 0) return cplx(1.0, 0.0);
    if (k == 1) return cplx(parity(q), 0.0);
    return cplx(fixed_points(q) - 1, 0.0);
  });
  return BuiltinGroup{std::move(g), std::move(chars), std::move(elems)};
}

inline BuiltinGroup dihedral4() {
  // symmetries of a square with vertices 0..3 in cyclic order
  const Perm r = {1, 2, 3, 0};
  const Perm s = {0, 3, 2, 1};  // reflection through vertices 0 and 2
  std::vector<Perm> elems;
  Perm rk = {0, 1, 2, 3};
  for (int k = 0; k < 4; ++k) {
    elems.push_back(rk);
    rk = compose(r, rk);
  }
  for (int k = 0; k < 4; ++k) elems.push_back(compose(elems[static_cast<std::size_t>(k)], s));
  FiniteGroup g({"e", "r", "r2", "r3", "s", "rs", "r2s", "r3s"}, table_of(elems));

  auto column = [&](int x) {
    const Perm& q = elems[static_cast<std::size_t>(x)];
    if (x < 4) return x == 0 ? 0 : (x == 2 ? 1 : 2);  // e, r2, {r, r3}
    return fixed_points(q) > 0 ? 3 : 4;              // vertex / edge reflections
  };
  static constexpr double table[5][5] = {{1, 1, 1, 1, 1},
                                         {1, 1, 1, -1, -1},
                                         {1, 1, -1, 1, -1},
                                         {1, 1, -1, -1, 1},
                                         {2, -2, 0, 0, 0}};
  auto chars = tabulate(g, {"A1", "A2", "B1", "B2", "E"}, {1, 1, 1, 1, 2},
                        [&](std::size_t k, int x) {
                          return cplx(table[k][static_cast<std::size_t>(column(x))], 0.0);
                        });
  return BuiltinGroup{std::move(g), std::move(chars), std::move(elems)};
}

}  // namespace detail

/// Built-in groups: "Z<n>" (n >= 1), "Z2xZ2", "S3", "D4".
[[nodiscard]] inline BuiltinGroup builtin_group(std::string_view name) {
  if (name == "Z2xZ2") return detail::klein_four();
  if (name == "S3") return detail::symmetric3();
  if (name == "D4") return detail::dihedral4();
  if (name.size() >= 2 && name[0] == 'Z' &&
      std::all_of(name.begin() + 1, name.end(), [](char c) { return c >= '0' && c <= '9'; })) {
    const int n = std::stoi(std::string(name.substr(1)));
    if (n < 1) throw InvariantError("builtin_group: Zn requires n >= 1");
    if (n > 256) throw InvariantError("builtin_group: Zn limited to n <= 256");
    return detail::cyclic(n);
  }
  throw InvariantError("builtin_group: unknown group '" + std::string(name) + "'");
}

//------------------------------------------------------------------------------
// Representations
//------------------------------------------------------------------------------

/// One matrix per group element. Construction checks shapes only; use
/// validate_representation for the homomorphism and unitarity invariants.
class Representation {
 public:
  Representation(FiniteGroup group, std::vector<ComplexMatrix> matrices)
      : group_(std::move(group)), matrices_(std::move(matrices)) {
    if (static_cast<int>(matrices_.size()) != group_.order()) {
      throw DimensionError("Representation: need one matrix per group element");
    }
    const Eigen::Index d = matrices_.front().rows();
    for (const auto& m : matrices_) {
      require_square_finite(m, "Representation");
      if (m.rows() != d) throw DimensionError("Representation: matrices differ in dimension");
    }
  }

  [[nodiscard]] const FiniteGroup& group() const { return group_; }
  [[nodiscard]] const ComplexMatrix& operator()(int g) const {
    return matrices_[static_cast<std::size_t>(g)];
  }
  [[nodiscard]] const std::vector<ComplexMatrix>& matrices() const { return matrices_; }
  [[nodiscard]] Eigen::Index dim() const { return matrices_.front().rows(); }

 private:
  FiniteGroup group_;
  std::vector<ComplexMatrix> matrices_;
};

[[nodiscard]] inline Representation trivial_representation(const FiniteGroup& g,
                                                           Eigen::Index dim) {
  return Representation(g, std::vector<ComplexMatrix>(static_cast<std::size_t>(g.order()),
                                                      identity(dim)));
}

/// Left-regular representation: rho(g) e_h = e_{gh}.
[[nodiscard]] inline Representation regular_representation(const FiniteGroup& g) {
  const int n = g.order();
  std::vector<ComplexMatrix> mats;
  for (int x = 0; x < n; ++x) {
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (int h = 0; h < n; ++h) m(g.mul(x, h), h) = 1.0;
    mats.push_back(std::move(m));
  }
  return Representation(g, std::move(mats));
}

/// rho(g) e_i = e_{action[g][i]}.
[[nodiscard]] inline Representation permutation_representation(
    const FiniteGroup& g, const std::vector<std::vector<int>>& action) {
  if (static_cast<int>(action.size()) != g.order()) {
    throw DimensionError("permutation_representation: need one permutation per element");
  }
  std::vector<ComplexMatrix> mats;
  for (const auto& p : action) {
    const auto n = static_cast<Eigen::Index>(p.size());
    ComplexMatrix m = ComplexMatrix::Zero(n, n);
    for (Eigen::Index i = 0; i < n; ++i) m(p[static_cast<std::size_t>(i)], i) = 1.0;
    mats.push_back(std::move(m));
  }
  return Representation(g, std::move(mats));
}

/// The 1-dimensional irrep itself, rho(g) = chi(g).
[[nodiscard]] inline Representation character_representation(const FiniteGroup& g,
                                                             const CharacterTable& chars,
                                                             std::string_view irrep) {
  for (std::size_t k = 0; k < chars.irreps.size(); ++k) {
    if (chars.irreps[k].name != irrep) continue;
    if (chars.irreps[k].dim != 1) {
      throw InvariantError("character_representation: irrep '" + std::string(irrep) +
                           "' is not one-dimensional");
    }
    std::vector<ComplexMatrix> mats;
    for (int x = 0; x < g.order(); ++x) {
      mats.push_back(ComplexMatrix::Constant(1, 1, chars.character(k, g, x)));
    }
    return Representation(g, std::move(mats));
  }
  throw InvariantError("character_representation: unknown irrep '" + std::string(irrep) + "'");
}

[[nodiscard]] inline Representation direct_sum(const Representation& a, const Representation& b) {
  if (a.group().mult_table() != b.group().mult_table()) {
    throw DimensionError("direct_sum: representations of different groups");
  }
  std::vector<ComplexMatrix> mats;
  for (int x = 0; x < a.group().order(); ++x) {
    ComplexMatrix m = ComplexMatrix::Zero(a.dim() + b.dim(), a.dim() + b.dim());
    m.topLeftCorner(a.dim(), a.dim()) = a(x);
    m.bottomRightCorner(b.dim(), b.dim()) = b(x);
    mats.push_back(std::move(m));
  }
  return Representation(a.group(), std::move(mats));
}

/// Joint action rho(g) = rho_A(g) (x) rho_B(g).
[[nodiscard]] inline Representation tensor_representation(const Representation& a,
                                                          const Representation& b) {
  if (a.group().mult_table() != b.group().mult_table()) {
    throw DimensionError("tensor_representation: representations of different groups");
  }
  std::vector<ComplexMatrix> mats;
  for (int x = 0; x < a.group().order(); ++x) mats.push_back(tensor_product(a(x), b(x)));
  return Representation(a.group(), std::move(mats));
}

/// Expands generator images over the whole group by closing under
/// rho(s g) = rho(s) rho(g). Consistency of the images is not checked here.
[[nodiscard]] inline Representation representation_from_generators(
    const FiniteGroup& g, const std::map<std::string, ComplexMatrix>& generators) {
  if (generators.empty()) throw InvariantError("representation_from_generators: no generators");
  std::vector<std::pair<int, ComplexMatrix>> gens;
  Eigen::Index dim = -1;
  for (const auto& [label, m] : generators) {
    const auto idx = g.index_of(label);
    if (!idx) throw InvariantError("representation_from_generators: unknown element '" + label + "'");
    require_square_finite(m, "representation_from_generators");
    if (dim >= 0 && m.rows() != dim) {
      throw DimensionError("representation_from_generators: generator dimensions differ");
    }
    dim = m.rows();
    gens.emplace_back(*idx, m);
  }
  std::vector<std::optional<ComplexMatrix>> mats(static_cast<std::size_t>(g.order()));
  mats[static_cast<std::size_t>(g.identity())] = identity(dim);
  std::deque<int> queue = {g.identity()};
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (const auto& [s, m] : gens) {
      const int y = g.mul(s, x);
      if (!mats[static_cast<std::size_t>(y)]) {
        mats[static_cast<std::size_t>(y)] = m * *mats[static_cast<std::size_t>(x)];
        queue.push_back(y);
      }
    }
  }
  std::vector<ComplexMatrix> out;
  for (auto& m : mats) {
    if (!m) throw InvariantError("representation_from_generators: generators do not generate the group");
    out.push_back(std::move(*m));
  }
  return Representation(g, std::move(out));
}

struct RepresentationValidation {
  double homomorphism_residual = 0.0;  // max ||rho(g)rho(h) - rho(gh)||
  double unitarity_residual = 0.0;     // max ||rho(g)^dag rho(g) - I||
  double identity_residual = 0.0;      // ||rho(e) - I||
  std::size_t pairs_checked = 0;
  bool homomorphism_ok = true;
  bool unitary_ok = true;
  bool identity_ok = true;

  [[nodiscard]] bool ok() const { return homomorphism_ok && unitary_ok && identity_ok; }
};

/// Exhaustive over pairs for |G| <= 24, otherwise 500 seeded random pairs.
[[nodiscard]] inline RepresentationValidation validate_representation(const Representation& rho,
                                                                      const Tolerances& tol = {}) {
  const FiniteGroup& g = rho.group();
  RepresentationValidation v;
  auto check_pair = [&](int a, int b) {
    v.homomorphism_residual =
        std::max(v.homomorphism_residual, operator_norm(rho(a) * rho(b) - rho(g.mul(a, b))));
    ++v.pairs_checked;
  };
  if (g.order() <= 24) {
    for (int a = 0; a < g.order(); ++a) {
      for (int b = 0; b < g.order(); ++b) check_pair(a, b);
    }
  } else {
    CounterRng rng(0);
    for (int i = 0; i < 500; ++i) check_pair(rng.integer(0, g.order() - 1), rng.integer(0, g.order() - 1));
  }
  for (int a = 0; a < g.order(); ++a) {
    v.unitarity_residual = std::max(v.unitarity_residual, UnitaryMatrix::unitarity_defect(rho(a)));
  }
  v.identity_residual = operator_norm(rho(g.identity()) - identity(rho.dim()));
  v.homomorphism_ok = v.homomorphism_residual <= 1e-10;
  v.unitary_ok = v.unitarity_residual <= tol.unitary_tol * static_cast<double>(rho.dim());
  v.identity_ok = v.identity_residual <= 1e-12;
  return v;
}

//------------------------------------------------------------------------------
// Isotypic decomposition
//------------------------------------------------------------------------------

struct Multiplicity {
  std::string irrep;
  int multiplicity = 0;
  double rounding_error = 0.0;
};

/// m = (1/|G|) sum_g tr(rho(g)) conj(chi(g)), rounded.
[[nodiscard]] inline std::vector<Multiplicity> multiplicities(const Representation& rho,
                                                              const CharacterTable& chars,
                                                              const Tolerances& tol = {}) {
  const FiniteGroup& g = rho.group();
  std::vector<Multiplicity> out;
  Eigen::Index total = 0;
  for (std::size_t k = 0; k < chars.irreps.size(); ++k) {
    cplx s = 0.0;
    for (int x = 0; x < g.order(); ++x) s += rho(x).trace() * std::conj(chars.character(k, g, x));
    s /= static_cast<double>(g.order());
    const double rounded = std::round(s.real());
    const double err = std::abs(s - cplx(rounded, 0.0));
    if (err > tol.mult_round_tol || rounded < 0.0) {
      throw NumericalError("multiplicities: irrep '" + chars.irreps[k].name +
                           "' has non-integral multiplicity (error " + std::to_string(err) +
                           "); invalid representation or character table");
    }
    out.push_back(Multiplicity{chars.irreps[k].name, static_cast<int>(rounded), err});
    total += static_cast<Eigen::Index>(rounded) * chars.irreps[k].dim;
  }
  if (total != rho.dim()) {
    throw NumericalError("multiplicities: sum m*d = " + std::to_string(total) +
                         " != representation dimension " + std::to_string(rho.dim()));
  }
  return out;
}

struct IsotypicComponent {
  std::string irrep;
  std::size_t irrep_index = 0;
  int irrep_dim = 1;
  int multiplicity = 0;
  HermitianOperator projector;
  Eigen::Index isotypic_dim = 0;
};

struct IsotypicDecomposition {
  std::vector<IsotypicComponent> components;
};

/// Number of eigenvalues above 1/2, the rank of a (near-)projector.
[[nodiscard]] inline Eigen::Index projector_rank(const ComplexMatrix& p) {
  const Eigen::VectorXd ev =
      Eigen::SelfAdjointEigenSolver<ComplexMatrix>(0.5 * (p + p.adjoint()), Eigen::EigenvaluesOnly)
          .eigenvalues();
  return (ev.array() > 0.5).count();
}

/// P = (d/|G|) sum_g conj(chi(g)) rho(g), one per irrep (zero when m = 0).
[[nodiscard]] inline IsotypicDecomposition isotypic_projectors(const Representation& rho,
                                                               const CharacterTable& chars,
                                                               const Tolerances& tol = {}) {
  const FiniteGroup& g = rho.group();
  const auto mults = multiplicities(rho, chars, tol);
  IsotypicDecomposition out;
  for (std::size_t k = 0; k < chars.irreps.size(); ++k) {
    const int d = chars.irreps[k].dim;
    ComplexMatrix p = ComplexMatrix::Zero(rho.dim(), rho.dim());
    for (int x = 0; x < g.order(); ++x) p += std::conj(chars.character(k, g, x)) * rho(x);
    p *= static_cast<double>(d) / g.order();
    const double idem = operator_norm(p * p - p);
    if (idem > 1e-8) {
      throw NumericalError("isotypic_projectors: projector for '" + chars.irreps[k].name +
                           "' is not idempotent (defect " + std::to_string(idem) + ")");
    }
    const Eigen::Index expected = static_cast<Eigen::Index>(mults[k].multiplicity) * d;
    if (projector_rank(p) != expected) {
      throw NumericalError("isotypic_projectors: rank mismatch for '" + chars.irreps[k].name + "'");
    }
    out.components.push_back(IsotypicComponent{chars.irreps[k].name, k, d, mults[k].multiplicity,
                                               HermitianOperator(p, 1e-10), expected});
  }
  return out;
}

/// max_g ||[rho(g), M]||.
[[nodiscard]] inline double equivariance_residual(const ComplexMatrix& m,
                                                  const Representation& rho) {
  if (m.rows() != rho.dim()) {
    throw DimensionError("equivariance_residual: operator dimension " + std::to_string(m.rows()) +
                         " != representation dimension " + std::to_string(rho.dim()));
  }
  double worst = 0.0;
  for (const auto& r : rho.matrices()) worst = std::max(worst, operator_norm(commutator(r, m)));
  return worst;
}

/// Twirl (1/|G|) sum_g rho(g) M rho(g)^dag, the projection onto the commutant.
[[nodiscard]] inline ComplexMatrix group_average(const ComplexMatrix& m, const Representation& rho) {
  ComplexMatrix out = ComplexMatrix::Zero(m.rows(), m.cols());
  for (const auto& r : rho.matrices()) out += r * m * r.adjoint();
  return out / static_cast<double>(rho.group().order());
}

/// dim{M : [M, rho(g)] = 0 for all g}, from the null space of the stacked
/// vectorized commutator maps (via their Gram matrix).
[[nodiscard]] inline Eigen::Index commutant_dimension(const Representation& rho,
                                                      const Tolerances& tol = {}) {
  const Eigen::Index d = rho.dim();
  ComplexMatrix gram = ComplexMatrix::Zero(d * d, d * d);
  for (const auto& r : rho.matrices()) {
    // vec(R M - M R) = (I (x) R - R^T (x) I) vec(M), column-major vec
    const ComplexMatrix a = tensor_product(identity(d), r) - tensor_product(r.transpose(), identity(d));
    gram += a.adjoint() * a;
  }
  return null_space(gram, tol.kernel_tol, tol.kernel_abs_tol).dim();
}

//------------------------------------------------------------------------------
// Schur scalars and the diagonal isotypic subspace
//------------------------------------------------------------------------------

struct SchurEntry {
  std::string irrep;
  int multiplicity = 0;
  /// Scalar by which T acts on the irreducible summand; only for m = 1.
  std::optional<cplx> scalar;
  /// m = 1: ||T P - scalar P||. m > 1: ||T P - P T P|| (block leakage).
  double residual = 0.0;
};

struct SchurReport {
  double equivariance_residual = 0.0;
  std::vector<SchurEntry> entries;  // irreps with m >= 1

  [[nodiscard]] double max_residual() const {
    double r = 0.0;
    for (const auto& e : entries) r = std::max(r, e.residual);
    return r;
  }
};

[[nodiscard]] inline SchurReport schur_scalars(const HermitianOperator& t,
                                               const Representation& rho,
                                               const IsotypicDecomposition& decomp,
                                               const Tolerances& tol = {}) {
  SchurReport rep;
  rep.equivariance_residual = equivariance_residual(t.matrix(), rho);
  if (rep.equivariance_residual > tol.equivar_tol) {
    throw InvariantError("schur_scalars: operator is not equivariant (max ||[rho(g), T]|| = " +
                         std::to_string(rep.equivariance_residual) + ")");
  }
  const ComplexMatrix& tm = t.matrix();
  for (const auto& c : decomp.components) {
    if (c.multiplicity == 0) continue;
    const ComplexMatrix& p = c.projector.matrix();
    SchurEntry e{c.irrep, c.multiplicity, std::nullopt, 0.0};
    if (c.multiplicity == 1) {
      const cplx s = (tm * p).trace() / static_cast<double>(c.isotypic_dim);
      e.scalar = s;
      e.residual = operator_norm(tm * p - s * p);
    } else {
      e.residual = operator_norm(tm * p - p * tm * p);
    }
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

/// T = sum_g f(class(g)) rho(g). Requires f(class(g)) = f(class(g^-1)).
[[nodiscard]] inline HermitianOperator observable_from_class_function(
    const std::vector<double>& f, const Representation& rho) {
  const FiniteGroup& g = rho.group();
  if (static_cast<int>(f.size()) != g.num_classes()) {
    throw DimensionError("observable_from_class_function: expected " +
                         std::to_string(g.num_classes()) + " class values, got " +
                         std::to_string(f.size()));
  }
  for (int x = 0; x < g.order(); ++x) {
    const double a = f[static_cast<std::size_t>(g.class_of(x))];
    const double b = f[static_cast<std::size_t>(g.class_of(g.inverse(x)))];
    if (!std::isfinite(a)) throw InvariantError("observable_from_class_function: non-finite value");
    if (std::abs(a - b) > 1e-12 * std::max(1.0, std::abs(a))) {
      throw InvariantError("observable_from_class_function: value on class of '" +
                           g.labels()[static_cast<std::size_t>(x)] +
                           "' differs from its inverse class; operator would not be Hermitian");
    }
  }
  ComplexMatrix t = ComplexMatrix::Zero(rho.dim(), rho.dim());
  for (int x = 0; x < g.order(); ++x) t += f[static_cast<std::size_t>(g.class_of(x))] * rho(x);
  return HermitianOperator(t, 1e-10);
}

/// V_l (x) V_l inside H_A (x) H_B for one shared irrep.
struct DiagonalBlock {
  std::string irrep;
  std::size_t irrep_index = 0;
  ComplexMatrix basis;  // orthonormal columns, d_l^2 of them
};

/// Blocks of the diagonal isotypic subspace. Both representations must be
/// multiplicity-free; irreps present on only one side contribute nothing.
[[nodiscard]] inline std::vector<DiagonalBlock> diagonal_isotypic_blocks(
    const IsotypicDecomposition& da, const IsotypicDecomposition& db) {
  if (da.components.size() != db.components.size()) {
    throw DimensionError("diagonal_isotypic_blocks: decompositions use different character tables");
  }
  std::vector<DiagonalBlock> out;
  for (std::size_t k = 0; k < da.components.size(); ++k) {
    const auto& ca = da.components[k];
    const auto& cb = db.components[k];
    if (ca.multiplicity > 1 || cb.multiplicity > 1) {
      throw InvariantError("diagonal_isotypic_subspace: irrep '" + ca.irrep +
                           "' occurs with multiplicity > 1; pairing of copies is ambiguous");
    }
    if (ca.multiplicity == 0 || cb.multiplicity == 0) continue;
    const ComplexMatrix ba = range_basis(ca.projector.matrix(), ca.isotypic_dim);
    const ComplexMatrix bb = range_basis(cb.projector.matrix(), cb.isotypic_dim);
    ComplexMatrix basis(ba.rows() * bb.rows(), ba.cols() * bb.cols());
    Eigen::Index col = 0;
    for (Eigen::Index i = 0; i < ba.cols(); ++i) {
      for (Eigen::Index j = 0; j < bb.cols(); ++j) {
        basis.col(col++) = tensor_product(ba.col(i), bb.col(j));
      }
    }
    out.push_back(DiagonalBlock{ca.irrep, k, std::move(basis)});
  }
  return out;
}

[[nodiscard]] inline Subspace diagonal_isotypic_subspace(const Representation& rho_a,
                                                         const Representation& rho_b,
                                                         const CharacterTable& chars,
                                                         const Tolerances& tol = {}) {
  if (rho_a.group().mult_table() != rho_b.group().mult_table()) {
    throw DimensionError("diagonal_isotypic_subspace: representations of different groups");
  }
  const auto blocks = diagonal_isotypic_blocks(isotypic_projectors(rho_a, chars, tol),
                                               isotypic_projectors(rho_b, chars, tol));
  const Eigen::Index n = rho_a.dim() * rho_b.dim();
  Eigen::Index k = 0;
  for (const auto& b : blocks) k += b.basis.cols();
  ComplexMatrix basis(n, k);
  Eigen::Index col = 0;
  for (const auto& b : blocks) {
    basis.middleCols(col, b.basis.cols()) = b.basis;
    col += b.basis.cols();
  }
  return Subspace(n, std::move(basis), tol.kernel_tol);
}

//------------------------------------------------------------------------------
// Synchronization-preserving algebra
//------------------------------------------------------------------------------

struct MembershipReport {
  double equivariance_residual = 0.0;
  double commutation_residual = 0.0;
  bool member = false;
};

/// H belongs to the synchronization-preserving algebra when it commutes with
/// the joint action and with K.
[[nodiscard]] inline MembershipReport hsync_membership(const HermitianOperator& h,
                                                       const Representation& rho,
                                                       const HermitianOperator& k,
                                                       const Tolerances& tol = {}) {
  if (h.dim() != k.dim() || h.dim() != rho.dim()) {
    throw DimensionError("hsync_membership: H, K and the representation must share a dimension");
  }
  MembershipReport r;
  r.equivariance_residual = equivariance_residual(h.matrix(), rho);
  r.commutation_residual = operator_norm(commutator(h.matrix(), k.matrix()));
  const double scale = std::max(1.0, operator_norm(h.matrix()) * operator_norm(k.matrix()));
  r.member = r.equivariance_residual <= tol.equivar_tol &&
             r.commutation_residual <= tol.compat_tol * scale;
  return r;
}

struct ContainmentEntry {
  std::string irrep;
  double alpha = 0.0;  // scalar of T_A on V_l
  double beta = 0.0;   // scalar of T_B on V_l
  bool matched = false;
  double max_kernel_residual = 0.0;  // max ||K b|| over basis vectors b
  double max_deviation = 0.0;        // max | ||K b|| - |alpha - beta| |
  bool ok = false;
};

struct ContainmentReport {
  std::vector<ContainmentEntry> entries;
  /// The matched part of the diagonal isotypic subspace lies in ker(K).
  bool contained = true;
  /// Every entry behaves as predicted (matched in kernel, mismatched scaled).
  bool ok = true;
};

[[nodiscard]] inline ContainmentReport verify_kernel_containment(const Representation& rho_a,
                                                                 const Representation& rho_b,
                                                                 const HermitianOperator& t_a,
                                                                 const HermitianOperator& t_b,
                                                                 const CharacterTable& chars,
                                                                 const Tolerances& tol = {}) {
  const auto da = isotypic_projectors(rho_a, chars, tol);
  const auto db = isotypic_projectors(rho_b, chars, tol);
  const auto blocks = diagonal_isotypic_blocks(da, db);
  const SchurReport sa = schur_scalars(t_a, rho_a, da, tol);
  const SchurReport sb = schur_scalars(t_b, rho_b, db, tol);
  auto scalar_of = [](const SchurReport& s, const std::string& name) {
    for (const auto& e : s.entries) {
      if (e.irrep == name && e.scalar) return e.scalar->real();
    }
    throw NumericalError("verify_kernel_containment: no scalar for irrep '" + name + "'");
  };
  const ComplexMatrix k = tensor_product(t_a.matrix(), identity(t_b.dim())) -
                          tensor_product(identity(t_a.dim()), t_b.matrix());
  ContainmentReport rep;
  for (const auto& b : blocks) {
    ContainmentEntry e;
    e.irrep = b.irrep;
    e.alpha = scalar_of(sa, b.irrep);
    e.beta = scalar_of(sb, b.irrep);
    const double gap = std::abs(e.alpha - e.beta);
    e.matched = gap <= tol.match_tol;
    for (Eigen::Index j = 0; j < b.basis.cols(); ++j) {
      const double r = (k * b.basis.col(j)).norm();
      e.max_kernel_residual = std::max(e.max_kernel_residual, r);
      e.max_deviation = std::max(e.max_deviation, std::abs(r - gap));
    }
    e.ok = e.matched ? e.max_kernel_residual <= 1e-9 : e.max_deviation <= 1e-9;
    if (e.matched && !e.ok) rep.contained = false;
    if (!e.ok) rep.ok = false;
    rep.entries.push_back(std::move(e));
  }
  return rep;
}

}  // namespace syncsub
