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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <gtest/gtest.h>

#include "syncsub/harness.hpp"

using namespace syncsub;
using namespace syncsub::harness;
namespace fs = std::filesystem;

namespace {

const std::string kScenarios = SYNCSUB_SCENARIO_DIR;

std::string scenario_path(const std::string& name) { return kScenarios + "/" + name; }

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() /
                       ("syncsub_test_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
  fs::create_directories(dir);
  return dir;
}

std::string write_temp(const std::string& name, const std::string& text) {
  const fs::path p = temp_dir() / name;
  std::ofstream(p, std::ios::binary) << text;
  return p.string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

struct CliResult {
  int code;
  std::string out;
  std::string err;
};

CliResult cli(std::vector<std::string> args) {
  args.insert(args.begin(), "syncsub");
  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int code = cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  return {code, out.str(), err.str()};
}

std::string parse_error_where(const std::string& text) {
  try {
    (void)parse_scenario_text(text);
  } catch (const ParseError& e) {
    return e.where();
  }
  return "<no error>";
}

const char* kDriftText = R"({
  "name": "d", "kind": "drift", "seed": 3,
  "clock_a": {"labels": [0, 1]}, "clock_b": {"labels": [0, 1]},
  "perturbation": {"base": {"diag": [0, 1, 2, 3]}, "direction": "random", "strength": 0.05},
  "times": [0, 1, 2, 4]
})";

}  // namespace

TEST(ParseScenario, CompatDiag3File) {
  const Scenario s = parse_scenario(scenario_path("compat_diag3.json"));
  EXPECT_EQ(s.kind, ScenarioKind::compat);
  EXPECT_EQ(s.name, "compat_diag3");
  ASSERT_EQ(s.hamiltonians.size(), 4U);
  EXPECT_EQ(s.clock->labels, (std::vector<double>{0, 1, 2}));
  EXPECT_EQ(s.input_digest.size(), 64U);
}

TEST(ParseScenario, EmptyInput) {
  EXPECT_THROW((void)parse_scenario_text(""), ParseError);
  EXPECT_THROW((void)parse_scenario_text("  \n"), ParseError);
}

TEST(ParseScenario, InvalidJsonReportsLine) {
  const std::string where = parse_error_where("{\n  \"name\": \"x\",\n  \"kind\": ]\n}");
  EXPECT_EQ(where.rfind("line 3", 0), 0U) << where;
}

TEST(ParseScenario, FieldContext) {
  EXPECT_EQ(parse_error_where(R"({"kind": "compat"})"), "name");
  EXPECT_EQ(parse_error_where(R"({"name": "x", "kind": "bogus"})"), "kind");
  EXPECT_EQ(parse_error_where(R"({"name": "x", "kind": "compat", "clock": {"labels": [0]},
      "hamiltonians": [{"dim": 2, "entries": [1, 0, 0]}]})"),
            "hamiltonians[0].entries");
  EXPECT_EQ(parse_error_where(R"({"name": "x", "kind": "compat", "clock": {"labels": [0, "a"]},
      "hamiltonians": [{"diag": [1]}]})"),
            "clock.labels[1]");
  EXPECT_EQ(parse_error_where(R"({"name": "x", "kind": "compat", "clock": {"labels": [1e999]},
      "hamiltonians": [{"diag": [1]}]})"),
            "");
}

TEST(ParseScenario, NegativeStrengthNamesField) {
  const std::string text = R"({
    "name": "x", "kind": "drift",
    "clock_a": {"labels": [0, 1]}, "clock_b": {"labels": [0, 1]},
    "perturbation": {"base": {"diag": [0, 0, 0, 0]}, "direction": "random", "strength": -1},
    "times": [1]
  })";
  EXPECT_EQ(parse_error_where(text), "perturbation.strength");
}

TEST(ParseScenario, UnknownTolerance) {
  EXPECT_EQ(parse_error_where(R"({"name": "x", "kind": "compat", "clock": {"labels": [0]},
      "hamiltonians": [{"diag": [1]}], "tolerances": {"nope": 1}})"),
            "tolerances.nope");
}

TEST(RunScenario, CompatDiag3Verdicts) {
  const Report r = run_scenario(parse_scenario(scenario_path("compat_diag3.json")));
  const auto& entries = r.details["entries"];
  ASSERT_EQ(entries.size(), 4U);
  const std::vector<std::string> expected = {"diagonal", "diagonal", "diagonal", "incompatible"};
  for (std::size_t i = 0; i < 4; ++i) EXPECT_EQ(entries[i]["class"], expected[i]);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_LE(entries[i]["residual"].get<double>(), 1e-12);
  EXPECT_NEAR(entries[3]["residual"].get<double>(), 1.0, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(RunScenario, KernelTwoQubit) {
  const Report r = run_scenario(parse_scenario(scenario_path("kernel_two_qubit.json")));
  EXPECT_EQ(r.details["kernel_dim"], 2);
  const auto& basis = r.details["basis"];
  ASSERT_EQ(basis.size(), 2U);
  // |00> and |11>
  EXPECT_EQ(basis[0][0][0].get<double>(), 1.0);
  EXPECT_EQ(basis[1][3][0].get<double>(), 1.0);
  EXPECT_LE(r.details["preservation_residual"].get<double>(), 1e-10);
  EXPECT_TRUE(r.passed());
}

TEST(RunScenario, CompatibleDriftStaysAtZero) {
  const Report r = run_scenario(parse_scenario(scenario_path("drift_compatible.json")));
  ASSERT_TRUE(r.series.has_value());
  for (double d : r.series->drift) EXPECT_LE(d, 1e-10);
  EXPECT_EQ(r.verdicts.at(0), (std::pair<std::string, bool>{"drift_bound", true}));
}

TEST(RunScenario, RandomPerturbationHitsRequestedEpsilon) {
  const Report r = run_scenario(parse_scenario_text(kDriftText));
  ASSERT_TRUE(r.epsilon.has_value());
  EXPECT_NEAR(*r.epsilon, 0.05, 1e-12);
  EXPECT_TRUE(r.passed());
}

TEST(RunScenario, SeedOverride) {
  const Scenario s = parse_scenario_text(kDriftText);
  const Report a = run_scenario(s, RunOptions{7, {}});
  const Report b = run_scenario(s, RunOptions{7, {}});
  const Report c = run_scenario(s, RunOptions{8, {}});
  EXPECT_EQ(emit_report(a, Format::csv), emit_report(b, Format::csv));
  EXPECT_NE(emit_report(a, Format::csv), emit_report(c, Format::csv));
  EXPECT_EQ(a.seed, 7U);
}

TEST(RunScenario, ToleranceOverrideIsRecorded) {
  const Scenario s = parse_scenario(scenario_path("compat_diag3.json"));
  const Report r = run_scenario(s, RunOptions{std::nullopt, {{"compat_tol", 2.0}}});
  EXPECT_EQ(r.tolerances.at("compat_tol"), 2.0);
  // With a huge tolerance H4 no longer counts as incompatible.
  EXPECT_FALSE(r.passed());
}

TEST(RunScenario, DimensionMismatchIsInputError) {
  const std::string text = R"({"name": "x", "kind": "compat", "clock": {"labels": [0, 1]},
      "hamiltonians": [{"diag": [1, 2, 3]}]})";
  EXPECT_THROW((void)run_scenario(parse_scenario_text(text)), ParseError);
}

TEST(RunScenario, InitialStateOutsideKernel) {
  const std::string text = R"({"name": "x", "kind": "drift",
      "clock_a": {"labels": [0, 1]}, "clock_b": {"labels": [0, 1]},
      "hamiltonian": {"diag": [0, 0, 0, 0]}, "initial_state": [0, 1, 0, 0], "times": [1]})";
  try {
    (void)run_scenario(parse_scenario_text(text));
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.where(), "initial_state");
  }
}

TEST(RunScenario, BoundViolationIsReported) {
  // Label gap 1/4: the fidelity estimate does not hold, and the report says so.
  const std::string text = R"({"name": "x", "kind": "fidelity",
      "clock_a": {"labels": [0, 0.25]}, "clock_b": {"labels": [0, 0.25]},
      "hamiltonian": {"local_a": {"dim": 2, "entries": [0, 1, 1, 0]}, "local_b": {"diag": [0, 0]}},
      "initial_state": [1, 0, 0, 0], "times": [0.5]})";
  const Report r = run_scenario(parse_scenario_text(text));
  EXPECT_FALSE(r.passed());
}

TEST(RunScenario, GroupTableScenario) {
  // Z2 given by its table, acting by sigma_x on A and by sign on B.
  const std::string head = R"({"name": "z2", "kind": "group",
      "group": {"mult_table": [[0, 1], [1, 0]], "labels": ["e", "s"]},
      "characters": [{"name": "even", "dim": 1, "values": [1, 1]},
                     {"name": "odd", "dim": 1, "values": [1, -1]}],
      "rep_a": {"generators": {"s": {"dim": 2, "entries": [0, 1, 1, 0]}}},)";
  const Report ok = run_scenario(parse_scenario_text(head + R"("rep_b": {"elements": [{"diag": [1]}, {"diag": [-1]}]}})"));
  EXPECT_EQ(ok.details["diagonal_subspace"]["dim"], 1);
  EXPECT_TRUE(ok.passed());
  // rho(e) = -1 is not a representation
  const Report bad = run_scenario(parse_scenario_text(head + R"("rep_b": {"elements": [{"diag": [-1]}, {"diag": [1]}]}})"));
  EXPECT_FALSE(bad.passed());
}

TEST(RunScenario, NonRepresentationFailsValidation) {
  const std::string text = R"({"name": "z2", "kind": "group", "group": "Z2",
      "rep_a": {"elements": [{"diag": [1, 1]}, {"diag": [1, 0.999]}]}})";
  const Report r = run_scenario(parse_scenario_text(text));
  EXPECT_FALSE(r.passed());
  EXPECT_FALSE(r.details["rep_a"]["validation"]["ok"].get<bool>());
}

TEST(RunScenario, GroupKlein) {
  const Report r = run_scenario(parse_scenario(scenario_path("group_klein.json")));
  EXPECT_EQ(r.details["diagonal_subspace"]["dim"], 2);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.details["membership"][0]["subspace_leakage"].get<double>(), 1e-9);
}

TEST(RunScenario, S3Containment) {
  const Report r = run_scenario(parse_scenario(scenario_path("s3_containment.json")));
  EXPECT_TRUE(r.passed());
  for (const auto& e : r.details["containment"]["entries"]) {
    EXPECT_EQ(e["matched"].get<bool>(), e["irrep"] == "std");
  }
}

TEST(RunScenario, ClassFunctionMustCoverEveryClass) {
  const std::string text = R"({"name": "x", "kind": "group", "group": "S3",
      "rep_a": "permutation", "class_function_a": {"e": 1, "102": 0}})";
  EXPECT_THROW((void)run_scenario(parse_scenario_text(text)), ParseError);
}

TEST(EmitReport, CsvHeaderAndRows) {
  const Report r = run_scenario(parse_scenario(scenario_path("drift_eps01.json")));
  const std::string csv = emit_report(r, Format::csv);
  EXPECT_EQ(csv.rfind("t,drift,fidelity,bound_drift,bound_fidelity\n", 0), 0U);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), static_cast<long>(r.series->t.size() + 1));
  EXPECT_EQ(csv.find('\r'), std::string::npos);
}

TEST(EmitReport, CsvRejectedForNonSeries) {
  const Report r = run_scenario(parse_scenario(scenario_path("compat_diag3.json")));
  EXPECT_THROW((void)emit_report(r, Format::csv), InvariantError);
}

TEST(EmitReport, SeventeenDigits) {
  EXPECT_EQ(format_double(0.1), "0.10000000000000001");
  EXPECT_EQ(format_double(1.0), "1");
  Report r;
  r.name = "x";
  r.kind = "drift";
  r.epsilon = 1.0 / 3.0;
  EXPECT_NE(emit_report(r, Format::json).find("\"epsilon\": 0.33333333333333331"), std::string::npos);
}

TEST(EmitReport, Deterministic) {
  for (const char* f : {"compat_diag3.json", "kernel_two_qubit.json", "drift_eps01.json", "s3_containment.json"}) {
    const Scenario s = parse_scenario(scenario_path(f));
    for (Format fmt : {Format::json, Format::text}) {
      EXPECT_EQ(emit_report(run_scenario(s), fmt), emit_report(run_scenario(s), fmt)) << f;
    }
  }
}

TEST(EmitReport, JsonRoundTrip) {
  for (const char* f : {"compat_diag3.json", "kernel_two_qubit.json", "drift_eps01.json", "group_klein.json"}) {
    const Report r = run_scenario(parse_scenario(scenario_path(f)));
    const std::string text = emit_report(r, Format::json);
    const Report back = report_from_json_text(text);
    EXPECT_EQ(back.name, r.name);
    EXPECT_EQ(back.kind, r.kind);
    EXPECT_EQ(back.seed, r.seed);
    EXPECT_EQ(back.input_digest, r.input_digest);
    EXPECT_EQ(back.version, r.version);
    EXPECT_EQ(back.rng, r.rng);
    EXPECT_EQ(back.epsilon, r.epsilon);
    EXPECT_EQ(back.verdicts, r.verdicts);
    EXPECT_EQ(back.tolerances, r.tolerances);
    ASSERT_EQ(back.series.has_value(), r.series.has_value());
    if (r.series) {
      EXPECT_EQ(back.series->t, r.series->t);
      EXPECT_EQ(back.series->drift, r.series->drift);
      EXPECT_EQ(back.series->fidelity, r.series->fidelity);
      EXPECT_EQ(back.series->bound_drift, r.series->bound_drift);
      EXPECT_EQ(back.series->bound_fidelity, r.series->bound_fidelity);
    }
    EXPECT_EQ(emit_report(back, Format::json), text) << f;
  }
}

TEST(EmitReport, NonFiniteValuesSurviveRoundTrip) {
  Report r;
  r.name = "x";
  r.kind = "kernel";
  r.details["gap"] = number(std::numeric_limits<double>::infinity());
  const Report back = report_from_json_text(emit_report(r, Format::json));
  EXPECT_TRUE(std::isinf(number_from(back.details["gap"])));
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(cli({"run", scenario_path("compat_diag3.json")}).code, 0);
  EXPECT_EQ(cli({"run", kScenarios + "/../tests/data/empty.json"}).code, 2);
  EXPECT_EQ(cli({"run", kScenarios + "/does_not_exist.json"}).code, 2);
  EXPECT_EQ(cli({"kernel", scenario_path("compat_diag3.json")}).code, 2);
  EXPECT_EQ(cli({"run", "--format", "yaml", scenario_path("compat_diag3.json")}).code, 2);
  EXPECT_EQ(cli({"run", "--tol", "compat_tol=-1", scenario_path("compat_diag3.json")}).code, 2);
  EXPECT_EQ(cli({"frobnicate"}).code, 2);
  EXPECT_EQ(cli({"run", "--tol", "compat_tol=2", scenario_path("compat_diag3.json")}).code, 1);
  EXPECT_EQ(exit_code_for(NumericalError("x")), 3);
  EXPECT_EQ(exit_code_for(DimensionError("x")), 2);
}

TEST(Cli, ViolationExitCode) {
  const std::string path = write_temp("bad.json", R"({"name": "x", "kind": "compat",
      "clock": {"labels": [0, 1]}, "hamiltonians": [{"matrix": {"diag": [1, 2]}, "expect": "incompatible"}]})");
  const CliResult r = cli({"check-compat", path, "--format", "text"});
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.out.find("FAIL"), std::string::npos);
}

TEST(Cli, SubcommandsAcceptMatchingKinds) {
  EXPECT_EQ(cli({"check-compat", scenario_path("compat_diag3.json")}).code, 0);
  EXPECT_EQ(cli({"drift", scenario_path("drift_eps01.json"), "--format", "csv"}).code, 0);
  EXPECT_EQ(cli({"kernel", scenario_path("kernel_two_qubit.json")}).code, 0);
  EXPECT_EQ(cli({"group-analyze", scenario_path("s3_containment.json")}).code, 0);
}

TEST(Cli, SeveralScenariosMatchSeparateRuns) {
  const std::vector<std::string> files = {scenario_path("compat_diag3.json"), scenario_path("drift_eps01.json"),
                                          scenario_path("kernel_two_qubit.json")};
  std::string separate;
  for (const auto& f : files) separate += cli({"run", f}).out;
  const CliResult together = cli({"run", files[0], files[1], files[2]});
  EXPECT_EQ(together.code, 0);
  EXPECT_EQ(together.out, separate);
}

TEST(Cli, OutWritesFiles) {
  const fs::path dir = temp_dir();
  const std::string one = (dir / "one.csv").string();
  EXPECT_EQ(cli({"run", scenario_path("drift_eps01.json"), "--format", "csv", "--out", one}).code, 0);
  EXPECT_EQ(read_file(one), emit_report(run_scenario(parse_scenario(scenario_path("drift_eps01.json"))), Format::csv));

  const std::string many = (dir / "many").string();
  EXPECT_EQ(cli({"run", scenario_path("compat_diag3.json"), scenario_path("kernel_two_qubit.json"), "--out", many}).code, 0);
  EXPECT_TRUE(fs::exists(fs::path(many) / "compat_diag3.json"));
  EXPECT_TRUE(fs::exists(fs::path(many) / "kernel_two_qubit.json"));
}

TEST(Cli, ScenarioOutputBlock) {
  const fs::path dir = temp_dir();
  const std::string csv = (dir / "trace.csv").string();
  const std::string js = (dir / "trace.json").string();
  std::string text = kDriftText;
  text.insert(text.rfind('}'), ", \"output\": {\"csv\": \"" + csv + "\", \"json\": \"" + js + "\"}");
  const std::string path = write_temp("with_output.json", text);
  EXPECT_EQ(cli({"run", path}).code, 0);
  EXPECT_EQ(read_file(csv).rfind("t,drift,fidelity", 0), 0U);
  EXPECT_EQ(report_from_json_text(read_file(js)).name, "d");
}

TEST(Cli, DeterministicBytes) {
  for (const char* f : {"compat_diag3.json", "kernel_two_qubit.json", "drift_eps01.json"}) {
    const CliResult a = cli({"run", scenario_path(f), "--format", "json"});
    const CliResult b = cli({"run", scenario_path(f), "--format", "json"});
    EXPECT_EQ(a.out, b.out);
  }
}

TEST(Cli, LogLevel) {
  ::setenv("SYNCSUB_LOG", "loud", 1);
  EXPECT_EQ(cli({"run", scenario_path("compat_diag3.json")}).code, 2);
  ::setenv("SYNCSUB_LOG", "info", 1);
  const CliResult r = cli({"run", scenario_path("compat_diag3.json")});
  EXPECT_EQ(r.code, 0);
  EXPECT_NE(r.err.find("running compat_diag3"), std::string::npos);
  ::unsetenv("SYNCSUB_LOG");
  EXPECT_TRUE(cli({"run", scenario_path("compat_diag3.json")}).err.empty());
}

TEST(Sha256, KnownVector) {
  EXPECT_EQ(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
}
