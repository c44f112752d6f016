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

// Reports and their serializations. Every number is written with 17
// significant digits; nothing time- or host-dependent goes into the output,
// so the same scenario and seed give the same bytes.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "syncsub/harness/scenario.hpp"

namespace syncsub::harness {

enum class Format { csv, json, text };

[[nodiscard]] inline Format parse_format(const std::string& s) {
  if (s == "csv") return Format::csv;
  if (s == "json") return Format::json;
  if (s == "text") return Format::text;
  throw ParseError("--format", "expected csv, json or text");
}

struct Series {
  std::vector<double> t;
  std::vector<double> drift;
  std::vector<double> fidelity;
  std::vector<double> bound_drift;
  std::vector<double> bound_fidelity;
};

struct Report {
  std::string name;
  std::string kind;
  std::string version{kVersion};
  std::string rng{CounterRng::kName};
  std::uint64_t seed = 0;
  std::string input_digest;
  std::optional<double> epsilon;
  /// Named pass/fail checks, in evaluation order.
  std::vector<std::pair<std::string, bool>> verdicts;
  std::map<std::string, double> tolerances;
  /// Kind-specific results. Non-finite values are stored as strings.
  json details = json::object();
  std::optional<Series> series;

  [[nodiscard]] bool passed() const {
    for (const auto& [name, ok] : verdicts) {
      if (!ok) return false;
    }
    return true;
  }
};

/// JSON value for a double; infinities and NaN become strings.
[[nodiscard]] inline json number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  return x == 0.0 ? 0.0 : x;  // no negative zero in reports
}

/// Inverse of number().
[[nodiscard]] inline double number_from(const json& v) {
  if (v.is_string()) {
    const auto s = v.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
    if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
    throw ParseError("", "expected a number, got string '" + s + "'");
  }
  return v.get<double>();
}

[[nodiscard]] inline std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

[[nodiscard]] inline json matrix_json(const ComplexMatrix& m) {
  json rows = json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    json row = json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back({number(m(r, c).real()), number(m(r, c).imag())});
    rows.push_back(std::move(row));
  }
  return rows;
}

namespace detail {

inline void write_json(std::string& out, const json& v, int indent, int depth) {
  const std::string pad(static_cast<std::size_t>(indent * (depth + 1)), ' ');
  const std::string close_pad(static_cast<std::size_t>(indent * depth), ' ');
  switch (v.type()) {
    case json::value_t::object: {
      if (v.empty()) {
        out += "{}";
        return;
      }
      if (indent == 0) {
        out += "{";
        bool first = true;
        for (const auto& [k, x] : v.items()) {
          if (!first) out += ", ";
          first = false;
          out += json(k).dump() + ": ";
          write_json(out, x, 0, 0);
        }
        out += "}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (const auto& [k, x] : v.items()) {
        if (!first) out += ",\n";
        first = false;
        out += pad + json(k).dump() + ": ";
        write_json(out, x, indent, depth + 1);
      }
      out += "\n" + close_pad + "}";
      return;
    }
    case json::value_t::array: {
      if (v.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line.
      bool flat = true;
      for (const auto& x : v) flat = flat && !x.is_structured();
      if (indent == 0 || flat || (v.size() <= 8 && std::all_of(v.begin(), v.end(), [](const json& x) {
                     return x.is_array() && x.size() <= 2 &&
                            std::none_of(x.begin(), x.end(), [](const json& y) { return y.is_structured(); });
                   }))) {
        out += "[";
        for (std::size_t i = 0; i < v.size(); ++i) {
          if (i > 0) out += ", ";
          write_json(out, v[i], 0, 0);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < v.size(); ++i) {
        if (i > 0) out += ",\n";
        out += pad;
        write_json(out, v[i], indent, depth + 1);
      }
      out += "\n" + close_pad + "]";
      return;
    }
    case json::value_t::number_float: {
      const double x = v.get<double>();
      if (!std::isfinite(x)) throw NumericalError("report: non-finite number reached the JSON writer");
      out += format_double(x);
      return;
    }
    default:
      out += v.dump();
      return;
  }
}

}  // namespace detail

/// Deterministic JSON text: two-space indent, 17 significant digits.
[[nodiscard]] inline std::string dump_json(const json& v) {
  std::string out;
  detail::write_json(out, v, 2, 0);
  out += "\n";
  return out;
}

[[nodiscard]] inline json report_to_json(const Report& r) {
  json j = json::object();
  j["name"] = r.name;
  j["kind"] = r.kind;
  j["version"] = r.version;
  j["rng"] = r.rng;
  j["seed"] = r.seed;
  j["input_sha256"] = r.input_digest;
  j["epsilon"] = r.epsilon ? number(*r.epsilon) : json(nullptr);
  j["passed"] = r.passed();
  json verdicts = json::object();
  for (const auto& [name, ok] : r.verdicts) verdicts[name] = ok;
  j["verdicts"] = std::move(verdicts);
  json tol = json::object();
  for (const auto& [name, x] : r.tolerances) tol[name] = number(x);
  j["tolerances"] = std::move(tol);
  j["details"] = r.details;
  if (r.series) {
    json s = json::object();
    auto col = [](const std::vector<double>& xs) {
      json a = json::array();
      for (double x : xs) a.push_back(number(x));
      return a;
    };
    s["t"] = col(r.series->t);
    s["drift"] = col(r.series->drift);
    s["fidelity"] = col(r.series->fidelity);
    s["bound_drift"] = col(r.series->bound_drift);
    s["bound_fidelity"] = col(r.series->bound_fidelity);
    j["series"] = std::move(s);
  }
  return j;
}

[[nodiscard]] inline Report report_from_json(const json& j) {
  Report r;
  try {
    r.name = j.at("name").get<std::string>();
    r.kind = j.at("kind").get<std::string>();
    r.version = j.at("version").get<std::string>();
    r.rng = j.at("rng").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    r.input_digest = j.at("input_sha256").get<std::string>();
    if (!j.at("epsilon").is_null()) r.epsilon = number_from(j.at("epsilon"));
    for (const auto& [name, ok] : j.at("verdicts").items()) r.verdicts.emplace_back(name, ok.get<bool>());
    for (const auto& [name, x] : j.at("tolerances").items()) r.tolerances[name] = number_from(x);
    r.details = j.at("details");
    if (j.contains("series")) {
      const json& s = j.at("series");
      Series out;
      auto col = [&](const char* key, std::vector<double>& dst) {
        for (const auto& x : s.at(key)) dst.push_back(number_from(x));
      };
      col("t", out.t);
      col("drift", out.drift);
      col("fidelity", out.fidelity);
      col("bound_drift", out.bound_drift);
      col("bound_fidelity", out.bound_fidelity);
      r.series = std::move(out);
    }
  } catch (const json::exception& e) {
    throw ParseError("report", e.what());
  }
  return r;
}

[[nodiscard]] inline Report report_from_json_text(const std::string& text) {
  try {
    return report_from_json(json::parse(text));
  } catch (const json::parse_error& e) {
    throw ParseError("report", e.what());
  }
}

[[nodiscard]] inline std::string emit_csv(const Report& r) {
  if (!r.series) throw InvariantError("CSV output is only available for drift and fidelity reports");
  std::string out = "t,drift,fidelity,bound_drift,bound_fidelity\n";
  const Series& s = *r.series;
  for (std::size_t i = 0; i < s.t.size(); ++i) {
    out += format_double(s.t[i]) + "," + format_double(s.drift[i]) + "," +
           format_double(s.fidelity[i]) + "," + format_double(s.bound_drift[i]) + "," +
           format_double(s.bound_fidelity[i]) + "\n";
  }
  return out;
}

namespace detail {

inline void flatten(const json& v, const std::string& path, std::vector<std::pair<std::string, std::string>>& out) {
  if (v.is_object()) {
    for (const auto& [k, x] : v.items()) flatten(x, path.empty() ? k : path + "." + k, out);
  } else if (v.is_array() && std::any_of(v.begin(), v.end(), [](const json& x) { return x.is_object(); })) {
    for (std::size_t i = 0; i < v.size(); ++i) flatten(v[i], path + "[" + std::to_string(i) + "]", out);
  } else {
    std::string s;
    write_json(s, v, 0, 0);
    out.emplace_back(path, s);
  }
}

}  // namespace detail

[[nodiscard]] inline std::string emit_text(const Report& r) {
  std::ostringstream os;
  os << "scenario  " << r.name << " (" << r.kind << ")\n";
  os << "version   " << r.version << "\n";
  os << "rng       " << r.rng << " seed " << r.seed << "\n";
  os << "input     sha256:" << r.input_digest << "\n";
  if (r.epsilon) os << "epsilon   " << format_double(*r.epsilon) << "\n";
  os << "result    " << (r.passed() ? "PASS" : "FAIL") << "\n";
  if (!r.verdicts.empty()) {
    os << "\nverdicts\n";
    for (const auto& [name, ok] : r.verdicts) os << "  " << (ok ? "pass  " : "FAIL  ") << name << "\n";
  }
  std::vector<std::pair<std::string, std::string>> rows;
  detail::flatten(r.details, "", rows);
  if (!rows.empty()) {
    std::size_t width = 0;
    for (const auto& [k, v] : rows) width = std::max(width, k.size());
    os << "\ndetails\n";
    for (const auto& [k, v] : rows) os << "  " << k << std::string(width - k.size() + 2, ' ') << v << "\n";
  }
  if (r.series) {
    const Series& s = *r.series;
    char line[160];
    os << "\n";
    std::snprintf(line, sizeof line, "%12s %14s %14s %14s %14s\n", "t", "drift", "fidelity",
                  "bound_drift", "bound_fid");
    os << line;
    for (std::size_t i = 0; i < s.t.size(); ++i) {
      std::snprintf(line, sizeof line, "%12.6g %14.6e %14.10f %14.6e %14.10f\n", s.t[i], s.drift[i],
                    s.fidelity[i], s.bound_drift[i], s.bound_fidelity[i]);
      os << line;
    }
  }
  return os.str();
}

[[nodiscard]] inline std::string emit_report(const Report& r, Format f) {
  switch (f) {
    case Format::csv: return emit_csv(r);
    case Format::json: return dump_json(report_to_json(r));
    case Format::text: return emit_text(r);
  }
  return {};
}

}  // namespace syncsub::harness
