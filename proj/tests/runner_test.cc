// Copyright 2026 The availsim Authors
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

#include "availsim/runner.h"

#include <cmath>
#include <string>

#include <gtest/gtest.h>

namespace availsim {
namespace {

ExperimentSpec k8s(FailureKind kind, std::size_t replicas,
                   ConfigProfile profile = ConfigProfile::standard()) {
  ExperimentSpec s;
  s.scenario = kind;
  s.replicas = replicas;
  s.profile = profile;
  return s;
}

TableRow row(std::string label, std::string scenario, double outage) {
  TableRow r;
  r.label = std::move(label);
  r.scenario = std::move(scenario);
  r.means.outage = outage;
  r.means.reaction = outage;
  r.means.count = 1;
  return r;
}

std::size_t count_lines(const std::string& s) {
  return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

TEST(SpecTest, Validation) {
  ExperimentSpec s;
  EXPECT_NO_THROW(s.validate());
  s.repetitions = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.replicas = 0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.injection_time = -1.0;
  EXPECT_THROW(s.validate(), ConfigError);
  s = ExperimentSpec{};
  s.profile.heartbeat_interval = -2.0;
  EXPECT_THROW(s.validate(), ConfigError);
}

TEST(RunExperimentTest, SeedsAreBasePlusIndex) {
  auto s = k8s(FailureKind::AppContainerKill, 1);
  s.repetitions = 3;
  s.base_seed = 100;
  const auto r = run_experiment(s);
  ASSERT_EQ(r.runs.size(), 3u);
  EXPECT_EQ(r.runs[2].seed, 102u);
  EXPECT_EQ(r.aggregate.seeds, (std::vector<std::uint64_t>{100, 101, 102}));
  EXPECT_EQ(r.aggregate.count, 3u);
}

TEST(RunExperimentTest, NodeFailureNearReference) {
  const auto r = run_experiment(k8s(FailureKind::NodeCrash, 1));
  EXPECT_NEAR(r.aggregate.outage, 300.852, 6.0);
  for (const auto& run : r.runs) EXPECT_TRUE(run.converged);
}

TEST(RunExperimentTest, GraceZeroNWayPodFailure) {
  ConfigProfile p;
  p.grace_period = 0.0;
  const auto r = run_experiment(k8s(FailureKind::PodSandboxKill, 2, p));
  EXPECT_NEAR(r.aggregate.outage, 0.554, 0.3);
}

TEST(RunExperimentTest, AmfProcessFailure) {
  ExperimentSpec s;
  s.system = System::Amf;
  s.scenario = FailureKind::AppContainerKill;
  const auto r = run_experiment(s);
  EXPECT_NEAR(r.aggregate.outage, 0.795, 0.05);
  EXPECT_FALSE(r.aggregate.repair);
  EXPECT_EQ(s.scenario_name(), "process");
}

TEST(RunExperimentTest, HorizonTooShortIsRunFailure) {
  auto s = k8s(FailureKind::NodeCrash, 1);
  s.horizon = 60.0;
  s.repetitions = 1;
  EXPECT_THROW(run_experiment(s), ExperimentFailure);
}

TEST(ReproduceTest, ShapeAndLabels) {
  const auto tables = reproduce_tables();
  ASSERT_EQ(tables.size(), 5u);
  const std::size_t rows[] = {3, 3, 2, 2, 3};
  std::size_t total = 0;
  for (std::size_t i = 0; i < 5; ++i) {
    EXPECT_EQ(tables[i].rows.size(), rows[i]);
    total += tables[i].rows.size();
  }
  EXPECT_EQ(total, 13u);
  EXPECT_EQ(tables[0].rows[2].label, "Node Failure");
  EXPECT_EQ(tables[3].rows[1].label, "N-Way Active");
  EXPECT_EQ(tables[4].rows[2].label, "Physical Host Failure");
  EXPECT_EQ(outage_targets().size(), 13u);
}

TEST(ReproduceTest, ChecksPassAtDefaultSeed) {
  for (const auto& c : check_tables(reproduce_tables())) {
    EXPECT_TRUE(c.pass) << c.name << " " << c.actual;
  }
}

TEST(ReproduceTest, CheckFlagsAMiss) {
  auto tables = reproduce_tables(42, 2);
  tables[0].rows[0].means.outage = 50.0;
  const auto checks = check_tables(tables);
  EXPECT_FALSE(checks[0].pass);
}

TEST(TargetForTest, CanonicalAndCustom) {
  auto t = target_for(k8s(FailureKind::NodeCrash, 1));
  ASSERT_TRUE(t);
  EXPECT_EQ(t->outage, 300.852);
  t = target_for(k8s(FailureKind::NodeCrash, 2, ConfigProfile::responsive()));
  ASSERT_TRUE(t);
  EXPECT_EQ(t->outage, 0.872);
  ConfigProfile custom;
  custom.eviction_wait = 100.0;
  EXPECT_FALSE(target_for(k8s(FailureKind::NodeCrash, 1, custom)));
  // Responsive handling has no canonical row for a container kill.
  EXPECT_FALSE(
      target_for(k8s(FailureKind::AppContainerKill, 1, ConfigProfile::responsive())));
}

TEST(CompareTest, RatiosAndPairing) {
  const std::vector<TableRow> k{row("Node Failure", "node", 300.852)};
  const std::vector<TableRow> a{row("Physical Host Failure", "host", 3.346)};
  const auto c = compare(k, a);
  ASSERT_EQ(c.size(), 1u);
  EXPECT_NEAR(c[0].ratio, 300.852 / 3.346, 1e-12);
  EXPECT_NEAR(c[0].ratio, 89.9, 0.05);

  const std::vector<TableRow> same{row("Physical Host Failure", "host", 3.346)};
  const std::vector<TableRow> same_k{row("Node Failure", "node", 3.346)};
  EXPECT_DOUBLE_EQ(compare(same_k, same)[0].ratio, 1.0);

  const std::vector<TableRow> wrong{row("VM Failure", "vm", 3.351)};
  EXPECT_THROW(compare(k, wrong), std::invalid_argument);
}

TEST(EmitTest, EmptyCsvIsHeaderOnly) {
  const OutputTable t;
  EXPECT_EQ(emit(t, Format::Csv), std::string(kCsvHeader) + "\n");
}

TEST(EmitTest, OneRowMarkdown) {
  OutputTable t;
  t.rows.push_back(row("Node Failure", "node", 3.5));
  const auto md = emit(t, Format::Markdown);
  EXPECT_EQ(count_lines(md), 3u);
  EXPECT_NE(md.find("| Failure Trigger | Reaction time"), std::string::npos);
  EXPECT_NE(md.find("| Node Failure |"), std::string::npos);
}

TEST(EmitTest, TableOneCsvHasSixDecimals) {
  const auto tables = reproduce_tables(42, 1);
  const auto csv = emit(tables[0], Format::Csv);
  EXPECT_EQ(count_lines(csv), 4u);
  const auto second = csv.substr(csv.find('\n') + 1);
  const auto first_row = second.substr(0, second.find('\n'));
  const auto last_field = first_row.substr(first_row.rfind(',') + 1);
  EXPECT_EQ(last_field.size() - last_field.find('.') - 1, 6u);
}

TEST(EmitTest, UnknownFormat) {
  EXPECT_THROW(parse_format("xml"), std::invalid_argument);
  EXPECT_EQ(parse_format("csv"), Format::Csv);
  EXPECT_EQ(parse_format("markdown"), Format::Markdown);
}

TEST(DeterminismTest, SameSpecSameBytes) {
  const auto a = emit(reproduce_tables(7, 3), Format::Csv);
  const auto b = emit(reproduce_tables(7, 3), Format::Csv);
  EXPECT_EQ(a, b);
  EXPECT_NE(a, emit(reproduce_tables(8, 3), Format::Csv));
}

TEST(ConfigTest, ProfilesWithBasesAndExperiments) {
  const auto cfg = parse_config(R"({
    "profiles": {
      "b": { "base": "a", "eviction_wait": 30 },
      "a": { "grace_period": 0 }
    },
    "amf": { "jitter_fraction": 0, "vm": { "detection": 1.5 } },
    "experiments": [
      { "scenario": "node", "profile": "b", "replicas": 2, "base_seed": 5,
        "overrides": { "heartbeat_interval": 4 } },
      { "system": "amf", "scenario": "vm", "repetitions": 3 }
    ]
  })");
  const auto b = cfg.resolve_profile("b");
  EXPECT_EQ(b.grace_period, 0.0);
  EXPECT_EQ(b.eviction_wait, 30.0);
  EXPECT_EQ(cfg.resolve_profile("responsive"), ConfigProfile::responsive());
  ASSERT_TRUE(cfg.amf);
  EXPECT_EQ(cfg.amf->of(AmfScenarioKind::VmFailure).detection, 1.5);
  EXPECT_EQ(cfg.amf->of(AmfScenarioKind::VmFailure).failover, 0.123);
  ASSERT_EQ(cfg.experiments.size(), 2u);
  const auto& e0 = cfg.experiments[0];
  EXPECT_EQ(e0.scenario, FailureKind::NodeCrash);
  EXPECT_EQ(e0.replicas, 2u);
  EXPECT_EQ(e0.base_seed, 5u);
  EXPECT_EQ(e0.profile.heartbeat_interval, 4.0);
  EXPECT_EQ(e0.profile.eviction_wait, 30.0);
  const auto& e1 = cfg.experiments[1];
  EXPECT_EQ(e1.system, System::Amf);
  EXPECT_EQ(e1.scenario, FailureKind::PodSandboxKill);
  EXPECT_EQ(e1.repetitions, 3u);
  EXPECT_EQ(e1.amf.jitter_fraction, 0.0);
}

TEST(ConfigTest, Errors) {
  EXPECT_THROW(parse_config("{"), ConfigError);
  EXPECT_THROW(parse_config("[]"), ConfigError);
  EXPECT_THROW(parse_config(R"({"profiles": {"p": {"bogus": 1}}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"profiles": {"p": {"grace_period": "x"}}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"profiles": {"p": {"base": "q"}, "q": {"base": "p"}}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"profiles": {"p": {"heartbeat_interval": -1}}})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"experiments": [{"scenario": "meteor"}]})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"experiments": [{"scenario": "node", "profile": "nope"}]})"),
               ConfigError);
  EXPECT_THROW(parse_config(R"({"experiments": [{"scenario": "node", "replicas": 0}]})"),
               ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(ConfigTest, ShippedExampleParses) {
  const auto cfg = load_config(AVAILSIM_SOURCE_DIR "/configs/tuned.json");
  EXPECT_EQ(cfg.experiments.size(), 4u);
  EXPECT_EQ(cfg.resolve_profile("fast-eviction").grace_period, 0.0);
}

}  // namespace
}  // namespace availsim
