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

// Scenario execution and the command-line front end.

#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "syncsub/clocks.hpp"
#include "syncsub/grouprep.hpp"
#include "syncsub/harness/report.hpp"
#include "syncsub/harness/scenario.hpp"
#include "syncsub/sync.hpp"

namespace syncsub::harness {

/// Exit codes of the command-line tool.
enum ExitCode : int { kOk = 0, kViolation = 1, kInputError = 2, kNumericalError = 3 };

struct RunOptions {
  std::optional<std::uint64_t> seed;
  std::map<std::string, double> tolerances;  // applied after the scenario's own
};

namespace detail {

inline Tolerances resolve_tolerances(const Scenario& s, const RunOptions& opt) {
  Tolerances tol;
  for (const auto& [k, v] : s.tolerances) tol.set(k, v);
  for (const auto& [k, v] : opt.tolerances) tol.set(k, v);
  return tol;
}

inline ClockObservable build_clock(const ClockSpec& c, const Tolerances& tol, const std::string& path) {
  try {
    if (!c.basis) return make_clock(c.labels);
    return ClockObservable(c.labels, UnitaryMatrix(*c.basis, tol.unitary_tol), tol);
  } catch (const Error& e) {
    throw ParseError(path, e.what());
  }
}

inline ComplexMatrix pauli_of(char c) {
  switch (c) {
    case 'X': return pauli::X();
    case 'Y': return pauli::Y();
    case 'Z': return pauli::Z();
    default: return pauli::I();
  }
}

inline ComplexMatrix build_hamiltonian(const HamiltonianSpec& h, Eigen::Index da, Eigen::Index db,
                                       const std::string& path) {
  const Eigen::Index n = da * db;
  ComplexMatrix m;
  if (h.matrix) {
    m = *h.matrix;
  } else if (h.local_a) {
    if (h.local_a->rows() != da) {
      throw ParseError(path + ".local_a", "dimension " + std::to_string(h.local_a->rows()) +
                                              " does not match clock_a dimension " + std::to_string(da));
    }
    if (h.local_b->rows() != db) {
      throw ParseError(path + ".local_b", "dimension " + std::to_string(h.local_b->rows()) +
                                              " does not match clock_b dimension " + std::to_string(db));
    }
    m = tensor_product(*h.local_a, identity(db)) + tensor_product(identity(da), *h.local_b);
  } else {
    if (da != 2 || db != 2) throw ParseError(path + ".pauli", "Pauli strings need two qubit clocks");
    m = ComplexMatrix::Zero(4, 4);
    for (const auto& t : h.pauli) m += t.coeff * tensor_product(pauli_of(t.string[0]), pauli_of(t.string[1]));
  }
  if (m.rows() != n) {
    throw ParseError(path, "dimension " + std::to_string(m.rows()) + " does not match clock_a x clock_b = " +
                               std::to_string(n));
  }
  return m;
}

inline HermitianOperator hermitian(const ComplexMatrix& m, const Tolerances& tol, const std::string& path) {
  try {
    return HermitianOperator(m, tol.herm_tol);
  } catch (const Error& e) {
    throw ParseError(path, e.what());
  }
}

inline SyncSystem build_system(const Scenario& s, std::uint64_t seed, const Tolerances& tol) {
  ClockObservable ta = build_clock(*s.clock_a, tol, "clock_a");
  ClockObservable tb = build_clock(*s.clock_b, tol, "clock_b");
  const Eigen::Index da = ta.dim();
  const Eigen::Index db = tb.dim();
  ComplexMatrix h;
  if (s.hamiltonian) {
    h = build_hamiltonian(*s.hamiltonian, da, db, "hamiltonian");
  } else if (s.perturbation) {
    const PerturbationSpec& p = *s.perturbation;
    const ComplexMatrix base = build_hamiltonian(p.base, da, db, "perturbation.base");
    ComplexMatrix v;
    if (p.direction) {
      v = *p.direction;
      if (v.rows() != da * db) {
        throw ParseError("perturbation.direction", "dimension does not match clock_a x clock_b");
      }
    } else {
      CounterRng rng(p.seed.value_or(seed));
      v = random_hermitian(da * db, rng);
      const ComplexMatrix k = sync_operator(ta, tb).matrix();
      const double c = operator_norm(commutator(v, k));
      v /= c > 1e-300 ? c : operator_norm(v);
    }
    h = base + p.strength * v;
  } else {
    h = ComplexMatrix::Zero(da * db, da * db);
  }
  HermitianOperator hh = hermitian(h, tol, s.hamiltonian ? "hamiltonian" : "perturbation");
  return SyncSystem(std::move(ta), std::move(tb), std::move(hh));
}

inline json validation_json(const RepresentationValidation& v) {
  json j = json::object();
  j["homomorphism_residual"] = number(v.homomorphism_residual);
  j["unitarity_residual"] = number(v.unitarity_residual);
  j["identity_residual"] = number(v.identity_residual);
  j["pairs_checked"] = v.pairs_checked;
  j["ok"] = v.ok();
  return j;
}

inline json multiplicities_json(const std::vector<Multiplicity>& ms) {
  json j = json::object();
  for (const auto& m : ms) j[m.irrep] = m.multiplicity;
  return j;
}

inline json schur_json(const SchurReport& r) {
  json j = json::object();
  j["equivariance_residual"] = number(r.equivariance_residual);
  json entries = json::array();
  for (const auto& e : r.entries) {
    json x = json::object();
    x["irrep"] = e.irrep;
    x["multiplicity"] = e.multiplicity;
    x["scalar"] = e.scalar ? number(e.scalar->real()) : json(nullptr);
    x["residual"] = number(e.residual);
    entries.push_back(std::move(x));
  }
  j["entries"] = std::move(entries);
  return j;
}

//------------------------------------------------------------------------------
// Per-kind runners
//------------------------------------------------------------------------------

inline void run_compat(const Scenario& s, const Tolerances& tol, Report& r) {
  const ClockObservable t = build_clock(*s.clock, tol, "clock");
  json entries = json::array();
  for (std::size_t i = 0; i < s.hamiltonians.size(); ++i) {
    const NamedMatrix& nm = s.hamiltonians[i];
    const std::string path = "hamiltonians[" + std::to_string(i) + "]";
    if (nm.matrix.rows() != t.dim()) {
      throw ParseError(path, "dimension " + std::to_string(nm.matrix.rows()) +
                                 " does not match clock dimension " + std::to_string(t.dim()));
    }
    const auto v = classify_compatibility(hermitian(nm.matrix, tol, path), t, tol);
    json e = json::object();
    e["label"] = nm.label;
    e["residual"] = number(v.residual);
    e["class"] = to_string(v.klass);
    e["off_block_mass"] = number(v.off_block_mass);
    if (nm.expect) {
      e["expect"] = *nm.expect;
      r.verdicts.emplace_back(nm.label + ".class", *nm.expect == to_string(v.klass));
    }
    entries.push_back(std::move(e));
  }
  r.details["clock_dim"] = t.dim();
  r.details["clock_non_degenerate"] = t.non_degenerate();
  r.details["entries"] = std::move(entries);
}

inline void run_drift(const Scenario& s, std::uint64_t seed, const Tolerances& tol, Report& r) {
  const SyncSystem sys = build_system(s, seed, tol);
  const SyncOperatorBundle bundle = sync_bundle(sys, tol);
  StateVector psi0;
  if (s.initial_state.vector) {
    psi0 = *s.initial_state.vector;
    try {
      require_kernel_state(bundle, psi0, tol);
    } catch (const Error& e) {
      throw ParseError("initial_state", e.what());
    }
  } else {
    if (bundle.kernel.dim() == 0) {
      throw ParseError("clock_a", "the clocks share no label, so the synchronization subspace is trivial");
    }
    psi0 = sample_kernel_state(bundle, seed);
  }
  const DriftReport d = drift_trace(sys, bundle, psi0, s.times, tol);
  r.epsilon = d.epsilon;

  Series series;
  double max_drift = 0.0;
  double min_fid = 1.0;
  double worst_complement = 0.0;
  for (std::size_t i = 0; i < d.times.size(); ++i) {
    series.t.push_back(d.times[i]);
    series.drift.push_back(d.drift[i]);
    series.fidelity.push_back(d.fidelity[i]);
    series.bound_drift.push_back(d.drift_bound(i));
    series.bound_fidelity.push_back(d.fidelity_bound(i));
    max_drift = std::max(max_drift, d.drift[i]);
    min_fid = std::min(min_fid, d.fidelity[i]);
    worst_complement = std::max(worst_complement, std::abs(d.fidelity[i] + d.leakage[i] - 1.0));
  }
  r.series = std::move(series);

  r.details["dim_a"] = sys.clock_a().dim();
  r.details["dim_b"] = sys.clock_b().dim();
  r.details["kernel_dim"] = bundle.kernel.dim();
  r.details["kernel_gap"] = number(bundle.kernel_gap);
  r.details["initial_state"] = s.initial_state.vector ? "given" : "kernel-sampled";
  r.details["max_drift"] = number(max_drift);
  r.details["min_fidelity"] = number(min_fid);
  r.details["max_bound_excess"] = number(d.max_bound_excess);
  r.details["complement_residual"] = number(worst_complement);
  r.details["drift_bound_ok"] = d.drift_bound_ok;
  r.details["fidelity_bound_ok"] = d.fidelity_bound_ok;

  r.verdicts.emplace_back("drift_bound", d.drift_bound_ok);
  if (s.kind == ScenarioKind::fidelity) {
    r.verdicts.emplace_back("fidelity_bound", d.fidelity_bound_ok);
    r.verdicts.emplace_back("fidelity_complement", worst_complement <= 1e-10);
  }
  if (s.delta) {
    const double window = stability_window(bundle, *s.delta);
    json w = json::object();
    w["delta"] = number(*s.delta);
    w["window"] = number(window);
    if (std::isfinite(window)) {
      const std::vector<double> probe = {0.9 * window};
      const DriftReport pd = drift_trace(sys, bundle, psi0, probe, tol);
      w["probe_time"] = number(probe[0]);
      w["probe_drift"] = number(pd.drift[0]);
      r.verdicts.emplace_back("stability_window", pd.drift[0] <= *s.delta + tol.bound_slack);
    }
    r.details["stability_window"] = std::move(w);
  }
}

inline void run_kernel(const Scenario& s, std::uint64_t seed, const Tolerances& tol, Report& r) {
  const SyncSystem sys = build_system(s, seed, tol);
  const SyncOperatorBundle bundle = sync_bundle(sys, tol);
  const Subspace& k = bundle.kernel;
  r.details["ambient_dim"] = bundle.k.dim();
  r.details["kernel_dim"] = k.dim();
  r.details["kernel_gap"] = number(bundle.kernel_gap);
  json basis = json::array();
  for (Eigen::Index j = 0; j < k.dim(); ++j) {
    json col = json::array();
    for (Eigen::Index i = 0; i < k.basis().rows(); ++i) {
      col.push_back({number(k.basis()(i, j).real()), number(k.basis()(i, j).imag())});
    }
    basis.push_back(std::move(col));
  }
  r.details["basis"] = std::move(basis);
  if (s.hamiltonian || s.perturbation) {
    r.epsilon = bundle.epsilon;
    if (!s.times.empty()) {
      r.details["preservation_residual"] = number(preservation_residual(sys, bundle, s.times, tol));
    }
  }
  if (s.expect_dim) r.verdicts.emplace_back("kernel_dim", k.dim() == *s.expect_dim);
}

struct BuiltGroup {
  FiniteGroup group;
  CharacterTable characters;
  std::vector<std::vector<int>> action;  // empty for table-defined groups
};

inline BuiltGroup build_group(const Scenario& s) {
  const GroupSpec& gs = *s.group;
  BuiltGroup out{FiniteGroup({"e"}, {{0}}), {}, {}};
  try {
    if (gs.builtin) {
      BuiltinGroup bg = builtin_group(*gs.builtin);
      out = BuiltGroup{std::move(bg.group), std::move(bg.characters), std::move(bg.action)};
    } else if (gs.classes) {
      out.group = FiniteGroup(gs.labels, gs.mult_table, *gs.classes);
    } else {
      out.group = FiniteGroup(gs.labels, gs.mult_table);
    }
  } catch (const Error& e) {
    throw ParseError("group", e.what());
  }
  if (!s.characters.empty()) {
    CharacterTable t;
    for (const auto& irr : s.characters) t.irreps.push_back(Irrep{irr.name, irr.dim, irr.values});
    try {
      validate_characters(t, out.group);
    } catch (const Error& e) {
      throw ParseError("characters", e.what());
    }
    out.characters = std::move(t);
  }
  return out;
}

inline Representation build_rep(const RepSpec& spec, const BuiltGroup& g, const std::string& path) {
  try {
    if (!spec.elements.empty()) return Representation(g.group, spec.elements);
    if (!spec.generators.empty()) return representation_from_generators(g.group, spec.generators);
    std::optional<Representation> acc;
    for (const auto& piece : spec.sum) {
      Representation r = [&] {
        if (piece == "regular") return regular_representation(g.group);
        if (piece == "trivial") return trivial_representation(g.group, 1);
        if (piece == "permutation") {
          if (g.action.empty()) throw InvariantError("no natural permutation action for this group");
          return permutation_representation(g.group, g.action);
        }
        return character_representation(g.group, g.characters, piece);
      }();
      acc = acc ? direct_sum(*acc, r) : std::move(r);
    }
    return std::move(*acc);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(path, e.what());
  }
}

inline std::vector<double> resolve_class_function(const ClassFunctionSpec& f, const FiniteGroup& g,
                                                  const std::string& path) {
  if (!f.by_element.empty()) {
    std::vector<std::optional<double>> vals(static_cast<std::size_t>(g.num_classes()));
    for (const auto& [label, x] : f.by_element) {
      const auto idx = g.index_of(label);
      if (!idx) throw ParseError(path + "." + label, "unknown group element");
      auto& slot = vals[static_cast<std::size_t>(g.class_of(*idx))];
      if (slot && *slot != x) throw ParseError(path + "." + label, "conflicting value for the same class");
      slot = x;
    }
    std::vector<double> out;
    for (std::size_t c = 0; c < vals.size(); ++c) {
      if (!vals[c]) {
        throw ParseError(path, "no value for the class of '" +
                                   g.labels()[static_cast<std::size_t>(g.classes()[c].front())] + "'");
      }
      out.push_back(*vals[c]);
    }
    return out;
  }
  if (static_cast<int>(f.by_class.size()) != g.num_classes()) {
    throw ParseError(path, "expected " + std::to_string(g.num_classes()) + " class values, got " +
                               std::to_string(f.by_class.size()));
  }
  return f.by_class;
}

inline void run_group(const Scenario& s, const Tolerances& tol, Report& r) {
  const BuiltGroup g = build_group(s);
  const Representation rho_a = build_rep(*s.rep_a, g, "rep_a");
  const Representation rho_b = s.rep_b ? build_rep(*s.rep_b, g, "rep_b") : rho_a;

  json classes = json::array();
  for (const auto& cls : g.group.classes()) {
    json c = json::array();
    for (int x : cls) c.push_back(g.group.labels()[static_cast<std::size_t>(x)]);
    classes.push_back(std::move(c));
  }
  r.details["group_order"] = g.group.order();
  r.details["classes"] = std::move(classes);

  const auto va = validate_representation(rho_a, tol);
  const auto vb = validate_representation(rho_b, tol);
  r.details["rep_a"] = json::object();
  r.details["rep_b"] = json::object();
  r.details["rep_a"]["dim"] = rho_a.dim();
  r.details["rep_b"]["dim"] = rho_b.dim();
  r.details["rep_a"]["validation"] = validation_json(va);
  r.details["rep_b"]["validation"] = validation_json(vb);
  r.verdicts.emplace_back("rep_a_valid", va.ok());
  r.verdicts.emplace_back("rep_b_valid", vb.ok());
  if (!va.ok() || !vb.ok()) return;

  const auto da = isotypic_projectors(rho_a, g.characters, tol);
  const auto db = isotypic_projectors(rho_b, g.characters, tol);
  r.details["rep_a"]["multiplicities"] = multiplicities_json(multiplicities(rho_a, g.characters, tol));
  r.details["rep_b"]["multiplicities"] = multiplicities_json(multiplicities(rho_b, g.characters, tol));
  if (rho_a.dim() <= 12) r.details["rep_a"]["commutant_dim"] = commutant_dimension(rho_a, tol);
  if (rho_b.dim() <= 12) r.details["rep_b"]["commutant_dim"] = commutant_dimension(rho_b, tol);

  const Representation joint = tensor_representation(rho_a, rho_b);
  std::optional<Subspace> kg;
  try {
    kg = diagonal_isotypic_subspace(rho_a, rho_b, g.characters, tol);
  } catch (const InvariantError& e) {
    r.details["diagonal_subspace"] = json::object({{"unsupported", e.what()}});
  }
  if (kg) {
    const ComplexMatrix p = projector(*kg).matrix();
    double leak = 0.0;
    for (int x = 0; x < g.group.order(); ++x) leak = std::max(leak, leakage(p, joint(x)));
    json d = json::object();
    d["dim"] = kg->dim();
    d["max_leakage"] = number(leak);
    r.details["diagonal_subspace"] = std::move(d);
    r.verdicts.emplace_back("diagonal_subspace_invariant", leak <= 1e-10);
  }

  if (!s.class_function_a) {
    if (!s.hamiltonians.empty()) {
      throw ParseError("class_function_a", "required to build K for membership checks");
    }
    return;
  }
  const auto fa = resolve_class_function(*s.class_function_a, g.group, "class_function_a");
  const auto fb = s.class_function_b ? resolve_class_function(*s.class_function_b, g.group, "class_function_b") : fa;
  const HermitianOperator ta = [&] {
    try {
      return observable_from_class_function(fa, rho_a);
    } catch (const Error& e) {
      throw ParseError("class_function_a", e.what());
    }
  }();
  const HermitianOperator tb = [&] {
    try {
      return observable_from_class_function(fb, rho_b);
    } catch (const Error& e) {
      throw ParseError(s.class_function_b ? "class_function_b" : "class_function_a", e.what());
    }
  }();
  r.details["schur_a"] = schur_json(schur_scalars(ta, rho_a, da, tol));
  r.details["schur_b"] = schur_json(schur_scalars(tb, rho_b, db, tol));

  if (kg) {
    const auto c = verify_kernel_containment(rho_a, rho_b, ta, tb, g.characters, tol);
    json entries = json::array();
    for (const auto& e : c.entries) {
      json x = json::object();
      x["irrep"] = e.irrep;
      x["alpha"] = number(e.alpha);
      x["beta"] = number(e.beta);
      x["matched"] = e.matched;
      x["max_kernel_residual"] = number(e.max_kernel_residual);
      x["max_deviation"] = number(e.max_deviation);
      x["ok"] = e.ok;
      entries.push_back(std::move(x));
    }
    r.details["containment"] = json::object({{"contained", c.contained}, {"ok", c.ok}, {"entries", entries}});
    r.verdicts.emplace_back("containment", c.ok);
  }

  const HermitianOperator k(tensor_product(ta.matrix(), identity(rho_b.dim())) -
                            tensor_product(identity(rho_a.dim()), tb.matrix()));
  json members = json::array();
  for (std::size_t i = 0; i < s.hamiltonians.size(); ++i) {
    const NamedMatrix& nm = s.hamiltonians[i];
    const std::string path = "hamiltonians[" + std::to_string(i) + "]";
    if (nm.matrix.rows() != joint.dim()) {
      throw ParseError(path, "dimension does not match rep_a x rep_b = " + std::to_string(joint.dim()));
    }
    const HermitianOperator h = hermitian(nm.matrix, tol, path);
    const auto m = hsync_membership(h, joint, k, tol);
    json x = json::object();
    x["label"] = nm.label;
    x["equivariance_residual"] = number(m.equivariance_residual);
    x["commutation_residual"] = number(m.commutation_residual);
    x["member"] = m.member;
    if (kg && !s.times.empty()) {
      const ComplexMatrix p = projector(*kg).matrix();
      double leak = 0.0;
      for (double t : s.times) leak = std::max(leak, leakage(p, evolve(h, t, tol).matrix()));
      x["subspace_leakage"] = number(leak);
    }
    if (nm.expect_member) r.verdicts.emplace_back(nm.label + ".member", m.member == *nm.expect_member);
    members.push_back(std::move(x));
  }
  if (!members.empty()) r.details["membership"] = std::move(members);
}

}  // namespace detail

/// Runs one scenario. Input problems raise ParseError (or DimensionError /
/// InvariantError from the library); numerical breakdowns raise
/// NumericalError. Failed verdicts are reported, not thrown.
[[nodiscard]] inline Report run_scenario(const Scenario& s, const RunOptions& opt = {}) {
  const Tolerances tol = detail::resolve_tolerances(s, opt);
  const std::uint64_t seed = opt.seed.value_or(s.seed);
  Report r;
  r.name = s.name;
  r.kind = to_string(s.kind);
  r.seed = seed;
  r.input_digest = s.input_digest;
  r.tolerances = tol.as_map();
  switch (s.kind) {
    case ScenarioKind::compat: detail::run_compat(s, tol, r); break;
    case ScenarioKind::drift:
    case ScenarioKind::fidelity: detail::run_drift(s, seed, tol, r); break;
    case ScenarioKind::kernel: detail::run_kernel(s, seed, tol, r); break;
    case ScenarioKind::group: detail::run_group(s, tol, r); break;
  }
  return r;
}

/// Maps an exception from parsing or running to an exit code.
[[nodiscard]] inline int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const NumericalError*>(&e) != nullptr) return kNumericalError;
  if (dynamic_cast<const Error*>(&e) != nullptr) return kInputError;
  return kNumericalError;
}

//------------------------------------------------------------------------------
// Command line
//------------------------------------------------------------------------------

enum class LogLevel { off, info, debug };

namespace detail {

inline std::string extension(Format f) {
  switch (f) {
    case Format::csv: return ".csv";
    case Format::json: return ".json";
    case Format::text: return ".txt";
  }
  return "";
}

inline void write_file(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ParseError(path, "cannot open output file");
  out << bytes;
  if (!out) throw ParseError(path, "write failed");
}

}  // namespace detail

/// Entry point of the `syncsub` tool; returns the process exit code.
inline int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  LogLevel log = LogLevel::off;
  if (const char* env = std::getenv("SYNCSUB_LOG")) {
    const std::string v = env;
    if (v == "info") {
      log = LogLevel::info;
    } else if (v == "debug") {
      log = LogLevel::debug;
    } else if (!v.empty() && v != "off") {
      err << "syncsub: error: SYNCSUB_LOG must be off, info or debug\n";
      return kInputError;
    }
  }

  CLI::App app{"Synchronization subspace experiments: compatibility, drift, kernels, group analysis."};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::vector<std::string> files;
  std::string out_path;
  std::string format = "json";
  std::optional<std::uint64_t> seed;
  std::vector<std::string> tols;

  struct Command {
    const char* name;
    const char* help;
    std::optional<ScenarioKind> kind;
    std::optional<ScenarioKind> alt;
  };
  const std::vector<Command> commands = {
      {"run", "Run one or more scenario files of any kind", std::nullopt, std::nullopt},
      {"check-compat", "Classify Hamiltonians against a clock (kind compat)", ScenarioKind::compat, std::nullopt},
      {"drift", "Drift and fidelity traces (kind drift or fidelity)", ScenarioKind::drift, ScenarioKind::fidelity},
      {"kernel", "Synchronization subspace extraction (kind kernel)", ScenarioKind::kernel, std::nullopt},
      {"group-analyze", "Representation analysis (kind group)", ScenarioKind::group, std::nullopt},
  };
  std::vector<CLI::App*> subs;
  for (const auto& c : commands) {
    CLI::App* sub = app.add_subcommand(c.name, c.help);
    auto* pos = sub->add_option("scenario", files, "Scenario file(s)")->required();
    if (c.kind) pos->expected(1);
    sub->add_option("--out", out_path, "Output path (a directory when several scenarios run)");
    sub->add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "json", "text"}));
    sub->add_option("--seed", seed, "Override the scenario seed");
    sub->add_option("--tol", tols, "Tolerance override name=value (repeatable)");
    subs.push_back(sub);
  }

  try {
    std::vector<std::string> args(argv + 1, argv + argc);
    std::reverse(args.begin(), args.end());
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kOk;
  } catch (const CLI::CallForVersion&) {
    out << kVersion << "\n";
    return kOk;
  } catch (const CLI::ParseError& e) {
    err << "syncsub: error: " << e.what() << "\n";
    return kInputError;
  }

  std::optional<ScenarioKind> want;
  std::optional<ScenarioKind> want_alt;
  for (std::size_t i = 0; i < subs.size(); ++i) {
    if (subs[i]->parsed()) {
      want = commands[i].kind;
      want_alt = commands[i].alt;
    }
  }

  RunOptions opt;
  opt.seed = seed;
  const Format fmt = parse_format(format);
  for (const auto& t : tols) {
    const auto eq = t.find('=');
    try {
      if (eq == std::string::npos) throw InvariantError("expected name=value");
      const std::string name = t.substr(0, eq);
      std::size_t used = 0;
      const double v = std::stod(t.substr(eq + 1), &used);
      if (used != t.size() - eq - 1) throw InvariantError("trailing characters in value");
      Tolerances{}.set(name, v);  // validates name and sign
      opt.tolerances[name] = v;
    } catch (const std::exception& e) {
      err << "syncsub: error: --tol " << t << ": " << e.what() << "\n";
      return kInputError;
    }
  }

  std::vector<Scenario> scenarios;
  for (const auto& f : files) {
    try {
      Scenario s = parse_scenario(f);
      if (want && s.kind != *want && (!want_alt || s.kind != *want_alt)) {
        throw ParseError(f + ": kind", "scenario kind '" + to_string(s.kind) +
                                           "' does not match this subcommand");
      }
      scenarios.push_back(std::move(s));
    } catch (const std::exception& e) {
      err << "syncsub: error: " << e.what() << "\n";
      return exit_code_for(e);
    }
  }

  int code = kOk;
  const bool many = scenarios.size() > 1;
  if (many && !out_path.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(out_path, ec);
    if (ec) {
      err << "syncsub: error: cannot create output directory " << out_path << "\n";
      return kInputError;
    }
  }
  for (const auto& s : scenarios) {
    if (log != LogLevel::off) err << "syncsub: running " << s.name << " (" << to_string(s.kind) << ")\n";
    try {
      const Report r = run_scenario(s, opt);
      const std::string bytes = emit_report(r, fmt);
      if (out_path.empty()) {
        out << bytes;
      } else {
        detail::write_file(many ? (std::filesystem::path(out_path) / (s.name + detail::extension(fmt))).string()
                                : out_path,
                           bytes);
      }
      if (s.output.csv) detail::write_file(*s.output.csv, emit_report(r, Format::csv));
      if (s.output.json) detail::write_file(*s.output.json, emit_report(r, Format::json));
      if (log != LogLevel::off) {
        err << "syncsub: " << s.name << ": " << (r.passed() ? "pass" : "FAIL") << "\n";
      }
      if (log == LogLevel::debug) {
        err << "syncsub:   sha256 " << r.input_digest << ", seed " << r.seed << "\n";
        for (const auto& [name, ok] : r.verdicts) {
          err << "syncsub:   " << (ok ? "pass " : "FAIL ") << name << "\n";
        }
      }
      if (!r.passed()) code = std::max(code, static_cast<int>(kViolation));
    } catch (const std::exception& e) {
      err << "syncsub: error: " << s.name << ": " << e.what() << "\n";
      code = std::max(code, exit_code_for(e));
    }
  }
  return code;
}

}  // namespace syncsub::harness
