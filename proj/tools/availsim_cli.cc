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

// availsim: batch driver for the availability simulator.
//
//   availsim run --scenario node --profile default --replicas 1
//   availsim reproduce --format markdown --check
//   availsim compare --profile responsive
//   availsim trace --scenario pod-container --seed 7

#include <cstdio>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "CLI11.hpp"
#include "availsim/runner.h"

namespace {

using namespace availsim;

constexpr int kExitOk = 0;
constexpr int kExitRunFailure = 1;
constexpr int kExitValidation = 2;
constexpr int kExitCheckFailed = 3;

struct CommonFlags {
  std::string config;
  std::string system = "kubernetes";
  std::string scenario = "app-container";
  std::string profile = "default";
  std::vector<std::string> overrides;
  std::size_t replicas = 1;
  std::size_t repetitions = 10;
  std::uint64_t seed = 42;
  double injection_time = kDefaultInjectionTime;
  std::size_t workers = 2;
  std::string format = "csv";
  std::string out;
  bool check = false;
  bool per_run = false;
};

void apply_set(ConfigProfile& p, const std::string& kv) {
  const auto eq = kv.find('=');
  if (eq == std::string::npos) {
    throw ConfigError(fmt::format("--set expects key=value, got '{}'", kv));
  }
  double value = 0.0;
  try {
    std::size_t used = 0;
    value = std::stod(kv.substr(eq + 1), &used);
    if (used != kv.size() - eq - 1) throw std::invalid_argument(kv);
  } catch (const std::exception&) {
    throw ConfigError(fmt::format("--set value in '{}' is not a number", kv));
  }
  p.set(kv.substr(0, eq), value);
}

// Flags given on the command line win over values from the config file.
ExperimentSpec merge(ExperimentSpec s, const CommonFlags& f,
                     const CLI::App& app, const ConfigFile* cfg) {
  auto given = [&app](const char* name) {
    const auto* opt = app.get_option_no_throw(name);
    return opt != nullptr && opt->count() > 0;
  };
  if (given("--system")) {
    auto sys = parse_system(f.system);
    if (!sys) throw ConfigError(fmt::format("unknown system '{}'", f.system));
    s.system = *sys;
  }
  if (given("--scenario")) {
    if (auto k = parse_failure_kind(f.scenario)) {
      s.scenario = *k;
    } else if (auto a = parse_amf_kind(f.scenario); a && s.system == System::Amf) {
      s.scenario = k8s_counterpart(*a);
    } else {
      throw ConfigError(fmt::format("unknown scenario '{}'", f.scenario));
    }
  }
  if (given("--profile")) {
    s.profile_name = f.profile;
    s.profile = cfg ? cfg->resolve_profile(f.profile) : builtin_profile(f.profile);
  }
  for (const auto& kv : f.overrides) apply_set(s.profile, kv);
  if (!f.overrides.empty() && s.profile_name.find('+') == std::string::npos) {
    s.profile_name += "+custom";
  }
  if (given("--replicas")) s.replicas = f.replicas;
  if (given("--repetitions")) s.repetitions = f.repetitions;
  if (given("--seed")) s.base_seed = f.seed;
  if (given("--injection-time")) s.injection_time = f.injection_time;
  if (given("--workers")) s.workers = f.workers;
  s.validate();
  return s;
}

void write_output(const std::string& text, const std::string& path) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ConfigError(fmt::format("cannot write {}", path));
  out << text;
}

std::string check_report(const std::vector<CheckResult>& results, bool& all_pass) {
  std::string out;
  all_pass = true;
  for (const auto& c : results) {
    all_pass = all_pass && c.pass;
    out += fmt::format("{} {}: outage {:.3f}, target {:.3f} +/- {:.3f}\n",
                       c.pass ? "PASS" : "FAIL", c.name, c.actual, c.expected,
                       c.tolerance);
  }
  return out;
}

void add_experiment_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON configuration file");
  cmd->add_option("--system", f.system, "kubernetes | amf");
  cmd->add_option("--scenario", f.scenario,
                  "app-container | pod-container | node (amf: process | vm | host)");
  cmd->add_option("--profile", f.profile, "default | responsive | a profile from --config");
  cmd->add_option("--set", f.overrides, "Override a profile parameter, key=value");
  cmd->add_option("--replicas", f.replicas, "Desired pod replicas");
  cmd->add_option("--injection-time", f.injection_time, "Virtual time of the failure");
  cmd->add_option("--workers", f.workers, "Worker nodes in the cluster");
}

void add_batch_flags(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--repetitions", f.repetitions, "Seeded repetitions per experiment");
  cmd->add_option("--seed", f.seed, "Base seed; repetition i uses seed + i");
  cmd->add_option("--format", f.format, "csv | markdown");
  cmd->add_option("--out", f.out, "Write output to a file instead of stdout");
}

int cmd_run(const CommonFlags& f, const CLI::App& app) {
  const Format format = parse_format(f.format);
  std::vector<ExperimentSpec> specs;
  std::optional<ConfigFile> cfg;
  if (!f.config.empty()) {
    cfg = load_config(f.config);
    for (const auto& s : cfg->experiments) specs.push_back(merge(s, f, app, &*cfg));
    if (specs.empty()) {
      ExperimentSpec s;
      if (cfg->amf) s.amf = *cfg->amf;
      specs.push_back(merge(s, f, app, &*cfg));
    }
  } else {
    specs.push_back(merge(ExperimentSpec{}, f, app, nullptr));
  }

  std::string text;
  OutputTable table;
  table.title = "Experiments";
  std::vector<CheckResult> checks;
  if (f.per_run) text = std::string(kCsvHeader) + "\n";
  for (const auto& spec : specs) {
    const auto result = run_experiment(spec);
    if (f.per_run) {
      for (const auto& r : result.runs) {
        text += csv_row(spec.scenario_name(),
                        spec.system == System::Amf ? "amf" : spec.profile_name,
                        spec.replicas, r.seed, r.metrics) + "\n";
      }
    }
    table.rows.push_back(make_row(
        fmt::format("{} {} x{}", to_string(spec.system), spec.scenario_name(),
                    spec.replicas),
        spec, result.aggregate));
    if (f.check) {
      if (auto t = target_for(spec)) {
        CheckResult c;
        c.name = fmt::format("table {} / {}", t->table + 1, t->label);
        c.expected = t->outage;
        c.tolerance = t->tolerance;
        c.actual = result.aggregate.outage;
        c.pass = std::abs(c.actual - c.expected) <= c.tolerance;
        checks.push_back(std::move(c));
      }
    }
  }
  if (!f.per_run) text = emit(table, format);
  write_output(text, f.out);

  if (f.check) {
    if (checks.empty()) {
      std::cerr << "no experiment matches a canonical target; nothing to check\n";
      return kExitValidation;
    }
    bool pass = false;
    std::cerr << check_report(checks, pass);
    return pass ? kExitOk : kExitCheckFailed;
  }
  return kExitOk;
}

int cmd_reproduce(const CommonFlags& f) {
  const Format format = parse_format(f.format);
  if (f.repetitions < 1) throw ConfigError("repetitions must be >= 1");
  const auto tables = reproduce_tables(f.seed, f.repetitions);
  write_output(emit(tables, format), f.out);
  if (!f.check) return kExitOk;
  bool pass = false;
  std::cerr << check_report(check_tables(tables), pass);
  return pass ? kExitOk : kExitCheckFailed;
}

int cmd_compare(const CommonFlags& f, const CLI::App& app) {
  const Format format = parse_format(f.format);
  std::optional<ConfigFile> cfg;
  if (!f.config.empty()) cfg = load_config(f.config);
  std::vector<TableRow> k8s;
  std::vector<TableRow> amf;
  for (auto kind : {FailureKind::AppContainerKill, FailureKind::PodSandboxKill,
                    FailureKind::NodeCrash}) {
    ExperimentSpec s = merge(ExperimentSpec{}, f, app, cfg ? &*cfg : nullptr);
    s.system = System::Kubernetes;
    s.scenario = kind;
    k8s.push_back(make_row(std::string(to_cli_name(kind)), s,
                           run_experiment(s).aggregate));
    ExperimentSpec a = s;
    a.system = System::Amf;
    if (cfg && cfg->amf) a.amf = *cfg->amf;
    amf.push_back(make_row(std::string(to_cli_name(amf_counterpart(kind))), a,
                           run_experiment(a).aggregate));
  }
  write_output(emit(compare(k8s, amf), format), f.out);
  return kExitOk;
}

int cmd_trace(const CommonFlags& f, const CLI::App& app) {
  ExperimentSpec s = merge(ExperimentSpec{}, f, app, nullptr);
  if (s.system != System::Kubernetes) {
    throw ConfigError("traces exist only for the kubernetes system");
  }
  Trace trace;
  run_once(s, s.base_seed, &trace);
  write_output(trace.serialize(), f.out);
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Discrete-event availability simulator for container orchestration"};
  app.require_subcommand(1);

  CommonFlags run_flags;
  auto* run = app.add_subcommand("run", "Run seeded repetitions of one or more experiments");
  add_experiment_flags(run, run_flags);
  add_batch_flags(run, run_flags);
  run->add_flag("--per-run", run_flags.per_run, "Emit one CSV row per repetition");
  run->add_flag("--check", run_flags.check,
                "Compare against the embedded reference outage; exit 3 on a miss");

  CommonFlags repro_flags;
  auto* repro = app.add_subcommand("reproduce", "Run the five canonical batteries");
  add_batch_flags(repro, repro_flags);
  repro->add_flag("--check", repro_flags.check,
                  "Compare against the embedded reference outages; exit 3 on a miss");

  CommonFlags cmp_flags;
  auto* cmp = app.add_subcommand("compare", "Side-by-side outage against the AMF baseline");
  add_experiment_flags(cmp, cmp_flags);
  add_batch_flags(cmp, cmp_flags);

  CommonFlags trace_flags;
  auto* tr = app.add_subcommand("trace", "Dump the event trace of a single run");
  add_experiment_flags(tr, trace_flags);
  tr->add_option("--seed", trace_flags.seed, "Seed of the run");
  tr->add_option("--out", trace_flags.out, "Write output to a file instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*run) return cmd_run(run_flags, *run);
    if (*repro) return cmd_reproduce(repro_flags);
    if (*cmp) return cmd_compare(cmp_flags, *cmp);
    if (*tr) return cmd_trace(trace_flags, *tr);
  } catch (const ExperimentFailure& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRunFailure;
  }
  return kExitOk;
}
