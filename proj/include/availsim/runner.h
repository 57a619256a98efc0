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

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "availsim/amf_baseline.h"
#include "availsim/availability_metrics.h"
#include "availsim/failure_injector.h"
#include "availsim/k8s_model.h"
#include "availsim/sim_engine.h"

namespace availsim {

enum class System { Kubernetes, Amf };

std::string_view to_string(System s);
std::optional<System> parse_system(std::string_view s);

struct ExperimentSpec {
  System system = System::Kubernetes;
  FailureKind scenario = FailureKind::AppContainerKill;
  std::string profile_name = "default";
  ConfigProfile profile;
  AmfProfile amf;
  std::size_t replicas = 1;
  std::size_t repetitions = 10;
  std::uint64_t base_seed = 42;
  double injection_time = kDefaultInjectionTime;
  std::size_t workers = 2;
  // Virtual seconds after the injection within which the cluster must
  // settle.
  double horizon = 3600.0;

  void validate() const;
  // The scenario name as written in output rows; AMF rows use
  // process | vm | host.
  std::string scenario_name() const;
};

// A repetition failed trace validation or never converged.
class ExperimentFailure : public std::runtime_error {
 public:
  ExperimentFailure(std::uint64_t seed, const std::string& what);
  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
};

struct RunResult {
  std::uint64_t seed = 0;
  MetricsReport metrics;
  // Ready pods equal desired replicas and endpoints equal ready pods.
  bool converged = true;
};

// One repetition. When `trace` is non-null the full trace is copied out.
RunResult run_once(const ExperimentSpec& spec, std::uint64_t seed,
                   Trace* trace = nullptr);

struct ExperimentResult {
  std::vector<RunResult> runs;  // ordered by repetition index
  AggregateReport aggregate;
};

ExperimentResult run_experiment(const ExperimentSpec& spec);

struct TableRow {
  std::string label;
  std::string scenario;
  std::string profile;
  std::size_t replicas = 1;
  std::uint64_t seed = 0;
  AggregateReport means;
};

struct OutputTable {
  std::string title;
  std::string key_header = "Failure Trigger";
  std::vector<TableRow> rows;
};

TableRow make_row(std::string label, const ExperimentSpec& spec,
                  const AggregateReport& means);

// The five canonical batteries: default profile with one and two replicas,
// grace period zero, responsive node handling, and the AMF baseline.
std::vector<OutputTable> reproduce_tables(std::uint64_t base_seed = 42,
                                          std::size_t repetitions = 10);

struct ComparisonRow {
  std::string k8s_label;
  std::string amf_label;
  double k8s_outage = 0.0;
  double amf_outage = 0.0;
  double ratio = 0.0;  // k8s / amf
};

// Pairs rows by scenario correspondence. Throws std::invalid_argument when
// the two scenario sets do not match one to one.
std::vector<ComparisonRow> compare(std::span<const TableRow> k8s,
                                   std::span<const TableRow> amf);

enum class Format { Csv, Markdown };
Format parse_format(std::string_view name);

std::string emit(const OutputTable& table, Format format);
// CSV: one header and every row; Markdown: a titled table per battery.
std::string emit(std::span<const OutputTable> tables, Format format);
std::string emit(std::span<const ComparisonRow> rows, Format format);

struct OutageTarget {
  std::size_t table;
  std::string_view label;
  double outage;
  double tolerance;
};

// Mean outage per canonical row with its acceptance band.
std::span<const OutageTarget> outage_targets();

struct CheckResult {
  std::string name;
  double expected = 0.0;
  double tolerance = 0.0;
  double actual = 0.0;
  bool pass = false;
};

std::vector<CheckResult> check_tables(std::span<const OutputTable> tables);

// The canonical target an experiment reproduces, if it matches one of the
// canonical batteries (same system, scenario, redundancy and parameters).
std::optional<OutageTarget> target_for(const ExperimentSpec& spec);

// Parsed configuration document. Profile entries may name a "base" profile
// and override any parameter; experiments reference profiles by name.
struct ConfigFile {
  std::map<std::string, ConfigProfile> profiles;
  std::optional<AmfProfile> amf;
  std::vector<ExperimentSpec> experiments;

  // Built-in names first, then the file's own profiles.
  ConfigProfile resolve_profile(std::string_view name) const;
};

ConfigFile parse_config(std::string_view json_text);
ConfigFile load_config(const std::filesystem::path& path);

}  // namespace availsim
