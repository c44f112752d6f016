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

// Scenario files: JSON documents describing one experiment. Parsing checks
// shapes and field presence; operator-level invariants (Hermiticity,
// unitarity, dimensions across fields) are checked when the scenario runs.

#pragma once

#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>
#include <openssl/evp.h>

#include "syncsub/common.hpp"
#include "syncsub/opcore.hpp"

namespace syncsub::harness {

using json = nlohmann::ordered_json;

/// Malformed or invalid scenario input. `where` is a field path such as
/// "hamiltonians[2].entries" or "line 3, column 7".
class ParseError : public Error {
 public:
  ParseError(const std::string& where, const std::string& what)
      : Error(where.empty() ? what : where + ": " + what), where_(where) {}
  [[nodiscard]] const std::string& where() const { return where_; }

 private:
  std::string where_;
};

enum class ScenarioKind { compat, drift, fidelity, kernel, group };

[[nodiscard]] inline std::string to_string(ScenarioKind k) {
  switch (k) {
    case ScenarioKind::compat: return "compat";
    case ScenarioKind::drift: return "drift";
    case ScenarioKind::fidelity: return "fidelity";
    case ScenarioKind::kernel: return "kernel";
    case ScenarioKind::group: return "group";
  }
  return "?";
}

struct ClockSpec {
  std::vector<double> labels;
  std::optional<ComplexMatrix> basis;
};

struct PauliTerm {
  double coeff = 0.0;
  std::string string;  // one of I, X, Y, Z per qubit, e.g. "ZI"
};

/// How the Hamiltonian of a bipartite system is given.
struct HamiltonianSpec {
  std::optional<ComplexMatrix> matrix;  // full matrix (or diag shorthand)
  std::optional<ComplexMatrix> local_a;
  std::optional<ComplexMatrix> local_b;
  std::vector<PauliTerm> pauli;
};

/// H = base + strength * V. A "random" direction is drawn from the seed and
/// rescaled so that ||[V, K]|| = 1; the realized epsilon is then `strength`
/// when the base commutes with K.
struct PerturbationSpec {
  HamiltonianSpec base;
  std::optional<ComplexMatrix> direction;  // nullopt means "random"
  double strength = 0.0;
  std::optional<std::uint64_t> seed;
};

struct NamedMatrix {
  std::string label;
  ComplexMatrix matrix;
  std::optional<std::string> expect;  // compat: expected class
  std::optional<bool> expect_member;  // group: expected membership
};

struct GroupSpec {
  std::optional<std::string> builtin;
  std::vector<std::string> labels;
  std::vector<std::vector<int>> mult_table;
  std::optional<std::vector<std::vector<int>>> classes;
};

struct IrrepSpec {
  std::string name;
  int dim = 1;
  std::vector<cplx> values;
};

/// A representation: explicit element matrices, generator images, or a sum
/// of named pieces ("regular", "permutation", "trivial" or a 1-dim irrep).
struct RepSpec {
  std::vector<ComplexMatrix> elements;
  std::map<std::string, ComplexMatrix> generators;
  std::vector<std::string> sum;
};

/// Class function values, by class index or by a representative element.
struct ClassFunctionSpec {
  std::vector<double> by_class;
  std::map<std::string, double> by_element;
};

struct InitialStateSpec {
  std::optional<StateVector> vector;  // nullopt: random state in the kernel
};

struct OutputSpec {
  std::optional<std::string> csv;
  std::optional<std::string> json;
};

struct Scenario {
  std::string name;
  ScenarioKind kind = ScenarioKind::compat;
  std::uint64_t seed = 0;

  // compat
  std::optional<ClockSpec> clock;
  std::vector<NamedMatrix> hamiltonians;

  // drift, fidelity, kernel
  std::optional<ClockSpec> clock_a;
  std::optional<ClockSpec> clock_b;
  std::optional<HamiltonianSpec> hamiltonian;
  std::optional<PerturbationSpec> perturbation;
  InitialStateSpec initial_state;
  std::vector<double> times;
  std::optional<double> delta;  // stability window spot check
  std::optional<int> expect_dim;

  // group
  std::optional<GroupSpec> group;
  std::vector<IrrepSpec> characters;
  std::optional<RepSpec> rep_a;
  std::optional<RepSpec> rep_b;
  std::optional<ClassFunctionSpec> class_function_a;
  std::optional<ClassFunctionSpec> class_function_b;

  OutputSpec output;
  std::map<std::string, double> tolerances;

  /// Lowercase hex SHA-256 of the scenario bytes.
  std::string input_digest;
};

//------------------------------------------------------------------------------
// Field readers
//------------------------------------------------------------------------------

namespace detail {

inline std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

inline std::string index(const std::string& path, std::size_t i) {
  return path + "[" + std::to_string(i) + "]";
}

inline const json& require(const json& obj, const std::string& key, const std::string& path) {
  if (!obj.is_object()) throw ParseError(path, "expected an object");
  const auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(join(path, key), "missing required field");
  return *it;
}

inline const json* optional_field(const json& obj, const std::string& key) {
  const auto it = obj.find(key);
  return it == obj.end() || it->is_null() ? nullptr : &*it;
}

inline double read_real(const json& v, const std::string& path) {
  if (!v.is_number()) throw ParseError(path, "expected a number");
  const double x = v.get<double>();
  if (!std::isfinite(x)) throw ParseError(path, "number is not finite");
  return x;
}

inline std::string read_string(const json& v, const std::string& path) {
  if (!v.is_string()) throw ParseError(path, "expected a string");
  return v.get<std::string>();
}

inline int read_int(const json& v, const std::string& path) {
  if (!v.is_number_integer()) throw ParseError(path, "expected an integer");
  return v.get<int>();
}

inline std::vector<double> read_reals(const json& v, const std::string& path) {
  if (!v.is_array()) throw ParseError(path, "expected an array of numbers");
  std::vector<double> out;
  for (std::size_t i = 0; i < v.size(); ++i) out.push_back(read_real(v[i], index(path, i)));
  return out;
}

/// A number (real) or a [re, im] pair.
inline cplx read_complex(const json& v, const std::string& path) {
  if (v.is_number()) return {read_real(v, path), 0.0};
  if (v.is_array() && v.size() == 2) {
    return {read_real(v[0], index(path, 0)), read_real(v[1], index(path, 1))};
  }
  throw ParseError(path, "expected a number or a [re, im] pair");
}

/// {"dim": d, "entries": [[re, im], ...]} row-major, or {"diag": [...]}.
inline ComplexMatrix read_matrix(const json& v, const std::string& path) {
  if (!v.is_object()) throw ParseError(path, "expected a matrix literal object");
  if (const json* d = optional_field(v, "diag")) {
    const auto values = read_reals(*d, join(path, "diag"));
    if (values.empty()) throw ParseError(join(path, "diag"), "diagonal must be nonempty");
    return diagonal(values);
  }
  const int dim = read_int(require(v, "dim", path), join(path, "dim"));
  if (dim <= 0) throw ParseError(join(path, "dim"), "dimension must be positive");
  const json& entries = require(v, "entries", path);
  const std::string epath = join(path, "entries");
  if (!entries.is_array()) throw ParseError(epath, "expected an array");
  if (entries.size() != static_cast<std::size_t>(dim) * static_cast<std::size_t>(dim)) {
    throw ParseError(epath, "expected " + std::to_string(dim * dim) + " entries for dim " +
                                std::to_string(dim) + ", got " + std::to_string(entries.size()));
  }
  ComplexMatrix m(dim, dim);
  for (int r = 0; r < dim; ++r) {
    for (int c = 0; c < dim; ++c) {
      const auto i = static_cast<std::size_t>(r * dim + c);
      m(r, c) = read_complex(entries[i], index(epath, i));
    }
  }
  return m;
}

inline StateVector read_vector(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError(path, "expected a nonempty array");
  StateVector out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    out(static_cast<Eigen::Index>(i)) = read_complex(v[i], index(path, i));
  }
  return out;
}

inline ClockSpec read_clock(const json& v, const std::string& path) {
  ClockSpec c;
  c.labels = read_reals(require(v, "labels", path), join(path, "labels"));
  if (c.labels.empty()) throw ParseError(join(path, "labels"), "clock needs at least one label");
  if (const json* b = optional_field(v, "basis")) c.basis = read_matrix(*b, join(path, "basis"));
  return c;
}

inline HamiltonianSpec read_hamiltonian(const json& v, const std::string& path) {
  HamiltonianSpec h;
  if (!v.is_object()) throw ParseError(path, "expected a Hamiltonian object");
  if (const json* p = optional_field(v, "pauli")) {
    const std::string ppath = join(path, "pauli");
    if (!p->is_array() || p->empty()) throw ParseError(ppath, "expected a nonempty array of terms");
    for (std::size_t i = 0; i < p->size(); ++i) {
      const std::string tpath = index(ppath, i);
      PauliTerm t;
      t.coeff = read_real(require((*p)[i], "coeff", tpath), join(tpath, "coeff"));
      t.string = read_string(require((*p)[i], "string", tpath), join(tpath, "string"));
      if (t.string.size() != 2 || t.string.find_first_not_of("IXYZ") != std::string::npos) {
        throw ParseError(join(tpath, "string"), "expected two characters from I, X, Y, Z");
      }
      h.pauli.push_back(std::move(t));
    }
    return h;
  }
  if (optional_field(v, "local_a") != nullptr || optional_field(v, "local_b") != nullptr) {
    h.local_a = read_matrix(require(v, "local_a", path), join(path, "local_a"));
    h.local_b = read_matrix(require(v, "local_b", path), join(path, "local_b"));
    return h;
  }
  h.matrix = read_matrix(v, path);
  return h;
}

inline NamedMatrix read_named(const json& v, const std::string& path, std::size_t i) {
  NamedMatrix n;
  n.label = "H" + std::to_string(i + 1);
  if (v.is_object() && v.contains("matrix")) {
    n.matrix = read_matrix(v["matrix"], join(path, "matrix"));
    if (const json* l = optional_field(v, "label")) n.label = read_string(*l, join(path, "label"));
    if (const json* e = optional_field(v, "expect")) {
      n.expect = read_string(*e, join(path, "expect"));
      if (*n.expect != "diagonal" && *n.expect != "block_diagonal" && *n.expect != "incompatible") {
        throw ParseError(join(path, "expect"),
                         "expected one of diagonal, block_diagonal, incompatible");
      }
    }
    if (const json* e = optional_field(v, "expect_member")) {
      if (!e->is_boolean()) throw ParseError(join(path, "expect_member"), "expected a boolean");
      n.expect_member = e->get<bool>();
    }
  } else {
    n.matrix = read_matrix(v, path);
  }
  return n;
}

inline RepSpec read_rep(const json& v, const std::string& path) {
  RepSpec r;
  if (v.is_string()) {
    r.sum.push_back(v.get<std::string>());
    return r;
  }
  if (!v.is_object()) throw ParseError(path, "expected a representation object or name");
  if (const json* e = optional_field(v, "elements")) {
    const std::string epath = join(path, "elements");
    if (!e->is_array() || e->empty()) throw ParseError(epath, "expected a nonempty array");
    for (std::size_t i = 0; i < e->size(); ++i) r.elements.push_back(read_matrix((*e)[i], index(epath, i)));
  } else if (const json* g = optional_field(v, "generators")) {
    const std::string gpath = join(path, "generators");
    if (!g->is_object() || g->empty()) throw ParseError(gpath, "expected a nonempty object");
    for (const auto& [label, m] : g->items()) r.generators[label] = read_matrix(m, join(gpath, label));
  } else if (const json* s = optional_field(v, "sum")) {
    const std::string spath = join(path, "sum");
    if (!s->is_array() || s->empty()) throw ParseError(spath, "expected a nonempty array of names");
    for (std::size_t i = 0; i < s->size(); ++i) r.sum.push_back(read_string((*s)[i], index(spath, i)));
  } else {
    throw ParseError(path, "expected one of elements, generators, sum");
  }
  return r;
}

inline ClassFunctionSpec read_class_function(const json& v, const std::string& path) {
  ClassFunctionSpec f;
  if (v.is_array()) {
    f.by_class = read_reals(v, path);
  } else if (v.is_object()) {
    for (const auto& [label, x] : v.items()) f.by_element[label] = read_real(x, join(path, label));
  } else {
    throw ParseError(path, "expected an array (by class) or object (by element)");
  }
  return f;
}

inline GroupSpec read_group(const json& v, const std::string& path) {
  GroupSpec g;
  if (v.is_string()) {
    g.builtin = v.get<std::string>();
    return g;
  }
  const json& table = require(v, "mult_table", path);
  const std::string tpath = join(path, "mult_table");
  if (!table.is_array() || table.empty()) throw ParseError(tpath, "expected a nonempty array of rows");
  for (std::size_t i = 0; i < table.size(); ++i) {
    const std::string rpath = index(tpath, i);
    if (!table[i].is_array()) throw ParseError(rpath, "expected an array of indices");
    std::vector<int> row;
    for (std::size_t j = 0; j < table[i].size(); ++j) row.push_back(read_int(table[i][j], index(rpath, j)));
    g.mult_table.push_back(std::move(row));
  }
  if (const json* l = optional_field(v, "labels")) {
    for (std::size_t i = 0; i < l->size(); ++i) g.labels.push_back(read_string((*l)[i], index(join(path, "labels"), i)));
    if (g.labels.size() != g.mult_table.size()) {
      throw ParseError(join(path, "labels"), "expected one label per element");
    }
  } else {
    for (std::size_t i = 0; i < g.mult_table.size(); ++i) g.labels.push_back("g" + std::to_string(i));
  }
  if (const json* c = optional_field(v, "classes")) {
    const std::string cpath = join(path, "classes");
    if (!c->is_array()) throw ParseError(cpath, "expected an array of index lists");
    std::vector<std::vector<int>> classes;
    for (std::size_t i = 0; i < c->size(); ++i) {
      std::vector<int> cls;
      const std::string ipath = index(cpath, i);
      if (!(*c)[i].is_array()) throw ParseError(ipath, "expected an array of indices");
      for (std::size_t j = 0; j < (*c)[i].size(); ++j) cls.push_back(read_int((*c)[i][j], index(ipath, j)));
      classes.push_back(std::move(cls));
    }
    g.classes = std::move(classes);
  }
  return g;
}

inline std::vector<IrrepSpec> read_characters(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ParseError(path, "expected a nonempty array of irreps");
  std::vector<IrrepSpec> out;
  for (std::size_t i = 0; i < v.size(); ++i) {
    const std::string ipath = index(path, i);
    IrrepSpec irr;
    irr.name = read_string(require(v[i], "name", ipath), join(ipath, "name"));
    irr.dim = read_int(require(v[i], "dim", ipath), join(ipath, "dim"));
    const json& values = require(v[i], "values", ipath);
    if (!values.is_array()) throw ParseError(join(ipath, "values"), "expected an array");
    for (std::size_t j = 0; j < values.size(); ++j) {
      irr.values.push_back(read_complex(values[j], index(join(ipath, "values"), j)));
    }
    out.push_back(std::move(irr));
  }
  return out;
}

inline std::string line_column(const std::string& text, std::size_t byte) {
  std::size_t line = 1;
  std::size_t col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

//------------------------------------------------------------------------------
// Parsing
//------------------------------------------------------------------------------

[[nodiscard]] inline ScenarioKind parse_kind(const std::string& s, const std::string& path = "kind") {
  if (s == "compat") return ScenarioKind::compat;
  if (s == "drift") return ScenarioKind::drift;
  if (s == "fidelity") return ScenarioKind::fidelity;
  if (s == "kernel") return ScenarioKind::kernel;
  if (s == "group") return ScenarioKind::group;
  throw ParseError(path, "unknown kind '" + s + "' (expected compat, drift, fidelity, kernel, group)");
}

/// Parses scenario text. `digest` is stored verbatim as the input digest.
[[nodiscard]] inline Scenario parse_scenario_text(const std::string& text,
                                                  const std::string& digest = "") {
  using namespace detail;
  if (text.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw ParseError("", "scenario file is empty");
  }
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(line_column(text, e.byte == 0 ? 0 : e.byte - 1), "invalid JSON");
  } catch (const json::out_of_range&) {
    throw ParseError("", "number out of range for a double");
  }
  if (!doc.is_object()) throw ParseError("", "scenario must be a JSON object");

  Scenario s;
  s.input_digest = digest;
  s.name = read_string(require(doc, "name", ""), "name");
  s.kind = parse_kind(read_string(require(doc, "kind", ""), "kind"));
  if (const json* v = optional_field(doc, "seed")) {
    if (!v->is_number_unsigned() && !(v->is_number_integer() && v->get<std::int64_t>() >= 0)) {
      throw ParseError("seed", "expected a nonnegative integer");
    }
    s.seed = v->get<std::uint64_t>();
  }
  if (const json* v = optional_field(doc, "tolerances")) {
    if (!v->is_object()) throw ParseError("tolerances", "expected an object");
    const auto known = Tolerances{}.as_map();
    for (const auto& [k, x] : v->items()) {
      if (!known.contains(k)) throw ParseError(join("tolerances", k), "unknown tolerance");
      const double val = read_real(x, join("tolerances", k));
      if (!(val > 0.0)) throw ParseError(join("tolerances", k), "tolerance must be positive");
      s.tolerances[k] = val;
    }
  }
  if (const json* v = optional_field(doc, "output")) {
    if (!v->is_object()) throw ParseError("output", "expected an object");
    if (const json* c = optional_field(*v, "csv")) s.output.csv = read_string(*c, "output.csv");
    if (const json* j = optional_field(*v, "json")) s.output.json = read_string(*j, "output.json");
  }

  switch (s.kind) {
    case ScenarioKind::compat: {
      s.clock = read_clock(require(doc, "clock", ""), "clock");
      const json& hs = require(doc, "hamiltonians", "");
      if (!hs.is_array() || hs.empty()) throw ParseError("hamiltonians", "expected a nonempty array");
      for (std::size_t i = 0; i < hs.size(); ++i) {
        s.hamiltonians.push_back(read_named(hs[i], index("hamiltonians", i), i));
      }
      break;
    }
    case ScenarioKind::drift:
    case ScenarioKind::fidelity:
    case ScenarioKind::kernel: {
      s.clock_a = read_clock(require(doc, "clock_a", ""), "clock_a");
      s.clock_b = read_clock(require(doc, "clock_b", ""), "clock_b");
      const json* h = optional_field(doc, "hamiltonian");
      const json* p = optional_field(doc, "perturbation");
      if (h != nullptr && p != nullptr) {
        throw ParseError("perturbation", "give either hamiltonian or perturbation, not both");
      }
      if (h != nullptr) s.hamiltonian = read_hamiltonian(*h, "hamiltonian");
      if (p != nullptr) {
        PerturbationSpec ps;
        ps.base = read_hamiltonian(require(*p, "base", "perturbation"), "perturbation.base");
        const json& dir = require(*p, "direction", "perturbation");
        if (dir.is_string()) {
          if (dir.get<std::string>() != "random") {
            throw ParseError("perturbation.direction", "expected a matrix literal or \"random\"");
          }
        } else {
          ps.direction = read_matrix(dir, "perturbation.direction");
        }
        ps.strength = read_real(require(*p, "strength", "perturbation"), "perturbation.strength");
        if (ps.strength < 0.0) throw ParseError("perturbation.strength", "strength must be >= 0");
        if (const json* sd = optional_field(*p, "seed")) {
          if (!sd->is_number_integer() || sd->get<std::int64_t>() < 0) {
            throw ParseError("perturbation.seed", "expected a nonnegative integer");
          }
          ps.seed = sd->get<std::uint64_t>();
        }
        s.perturbation = std::move(ps);
      }
      if (s.kind != ScenarioKind::kernel && !s.hamiltonian && !s.perturbation) {
        throw ParseError("hamiltonian", "missing required field (or give perturbation)");
      }
      if (const json* t = optional_field(doc, "times")) {
        s.times = read_reals(*t, "times");
      } else if (s.kind != ScenarioKind::kernel) {
        throw ParseError("times", "missing required field");
      }
      if (s.kind != ScenarioKind::kernel && s.times.empty()) {
        throw ParseError("times", "expected at least one time");
      }
      if (const json* st = optional_field(doc, "initial_state")) {
        if (st->is_string()) {
          if (st->get<std::string>() != "kernel") {
            throw ParseError("initial_state", "expected \"kernel\" or an amplitude array");
          }
        } else {
          s.initial_state.vector = read_vector(*st, "initial_state");
        }
      }
      if (const json* d = optional_field(doc, "delta")) {
        s.delta = read_real(*d, "delta");
        if (!(*s.delta > 0.0)) throw ParseError("delta", "delta must be positive");
      }
      if (const json* e = optional_field(doc, "expect_dim")) {
        s.expect_dim = read_int(*e, "expect_dim");
        if (*s.expect_dim < 0) throw ParseError("expect_dim", "must be nonnegative");
      }
      break;
    }
    case ScenarioKind::group: {
      s.group = read_group(require(doc, "group", ""), "group");
      if (const json* c = optional_field(doc, "characters")) s.characters = read_characters(*c, "characters");
      if (!s.group->builtin && s.characters.empty()) {
        throw ParseError("characters", "required for groups given by a multiplication table");
      }
      s.rep_a = read_rep(require(doc, "rep_a", ""), "rep_a");
      if (const json* r = optional_field(doc, "rep_b")) s.rep_b = read_rep(*r, "rep_b");
      if (const json* f = optional_field(doc, "class_function_a")) {
        s.class_function_a = read_class_function(*f, "class_function_a");
      }
      if (const json* f = optional_field(doc, "class_function_b")) {
        s.class_function_b = read_class_function(*f, "class_function_b");
      }
      if (const json* hs = optional_field(doc, "hamiltonians")) {
        if (!hs->is_array()) throw ParseError("hamiltonians", "expected an array");
        for (std::size_t i = 0; i < hs->size(); ++i) {
          s.hamiltonians.push_back(read_named((*hs)[i], index("hamiltonians", i), i));
        }
      }
      if (const json* t = optional_field(doc, "times")) s.times = read_reals(*t, "times");
      break;
    }
  }
  return s;
}

/// Lowercase hex SHA-256.
[[nodiscard]] inline std::string sha256_hex(const std::string& bytes) {
  unsigned char md[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md, &len, EVP_sha256(), nullptr) != 1) {
    throw NumericalError("sha256: digest computation failed");
  }
  static constexpr char hex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(hex[md[i] >> 4]);
    out.push_back(hex[md[i] & 0xF]);
  }
  return out;
}

[[nodiscard]] inline Scenario parse_scenario(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError(path, "cannot open scenario file");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  try {
    return parse_scenario_text(text, sha256_hex(text));
  } catch (const ParseError& e) {
    throw ParseError(path, e.what());
  }
}

}  // namespace syncsub::harness
