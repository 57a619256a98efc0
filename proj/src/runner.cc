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

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "json.hpp"

namespace availsim {

using nlohmann::json;

std::string_view to_string(System s) {
  return s == System::Amf ? "amf" : "kubernetes";
}

std::optional<System> parse_system(std::string_view s) {
  if (s == "kubernetes" || s == "k8s") return System::Kubernetes;
  if (s == "amf") return System::Amf;
  return std::nullopt;
}

void ExperimentSpec::validate() const {
  if (repetitions < 1) throw ConfigError("repetitions must be >= 1");
  if (replicas < 1) throw ConfigError("replicas must be >= 1");
  if (!std::isfinite(injection_time) || injection_time < 0.0) {
    throw ConfigError("injection_time must be finite and >= 0");
  }
  if (!(horizon > 0.0)) throw ConfigError("horizon must be > 0");
  if (system == System::Amf) {
    amf.validate();
    return;
  }
  if (workers < 1) throw ConfigError("workers must be >= 1");
  profile.validate();
}

std::string ExperimentSpec::scenario_name() const {
  if (system == System::Amf) {
    return std::string(to_cli_name(amf_counterpart(scenario)));
  }
  return std::string(to_cli_name(scenario));
}

ExperimentFailure::ExperimentFailure(std::uint64_t seed, const std::string& what)
    : std::runtime_error(fmt::format("seed {}: {}", seed, what)), seed_(seed) {}

RunResult run_once(const ExperimentSpec& spec, std::uint64_t seed,
                   Trace* trace) {
  RunResult out;
  out.seed = seed;
  if (spec.system == System::Amf) {
    out.metrics = run_amf(amf_counterpart(spec.scenario), spec.amf, seed);
    return out;
  }

  ClusterOptions opts;
  opts.workers = spec.workers;
  opts.replicas = spec.replicas;
  opts.profile = spec.profile;
  try {
    Simulation sim(opts, seed);
    inject(FailureScenario::of(spec.scenario, SimTime(spec.injection_time)),
           sim.cluster());
    Trace t = sim.run_to_quiescence(SimTime(spec.injection_time + spec.horizon));
    const Cluster& c = sim.cluster();
    if (!c.settled()) {
      throw ExperimentFailure(seed, fmt::format(
          "cluster did not settle within {} s of the failure", spec.horizon));
    }
    const auto ready = c.ready_pods();
    out.converged = ready.size() == c.deployment().desired_replicas &&
                    std::equal(ready.begin(), ready.end(),
                               c.service().endpoints.begin(),
                               c.service().endpoints.end());
    out.metrics = compute_metrics(t, spec.scenario, spec.replicas);
    if (trace) *trace = std::move(t);
  } catch (const ExperimentFailure&) {
    throw;
  } catch (const std::exception& e) {
    throw ExperimentFailure(seed, e.what());
  }
  return out;
}

ExperimentResult run_experiment(const ExperimentSpec& spec) {
  spec.validate();
  ExperimentResult result;
  std::vector<MetricsReport> reports;
  std::vector<std::uint64_t> seeds;
  for (std::size_t i = 0; i < spec.repetitions; ++i) {
    const std::uint64_t seed = spec.base_seed + i;
    result.runs.push_back(run_once(spec, seed));
    reports.push_back(result.runs.back().metrics);
    seeds.push_back(seed);
  }
  result.aggregate = aggregate(reports, std::move(seeds));
  return result;
}

TableRow make_row(std::string label, const ExperimentSpec& spec,
                  const AggregateReport& means) {
  TableRow row;
  row.label = std::move(label);
  row.scenario = spec.scenario_name();
  row.profile = spec.system == System::Amf ? "amf" : spec.profile_name;
  row.replicas = spec.replicas;
  row.seed = spec.base_seed;
  row.means = means;
  return row;
}

namespace {

constexpr std::array<FailureKind, 3> kAllKinds{FailureKind::AppContainerKill,
                                               FailureKind::PodSandboxKill,
                                               FailureKind::NodeCrash};

std::string_view trigger_label(FailureKind k) {
  switch (k) {
    case FailureKind::AppContainerKill: return "App Container Failure";
    case FailureKind::PodSandboxKill: return "Pod Container Failure";
    case FailureKind::NodeCrash: return "Node Failure";
  }
  return "?";
}

std::string_view amf_label(AmfScenarioKind k) {
  switch (k) {
    case AmfScenarioKind::ProcessFailure: return "Process Failure";
    case AmfScenarioKind::VmFailure: return "VM Failure";
    case AmfScenarioKind::HostFailure: return "Physical Host Failure";
  }
  return "?";
}

std::string_view redundancy_label(std::size_t replicas) {
  return replicas >= 2 ? "N-Way Active" : "No-Redundancy";
}

TableRow run_row(std::string label, const ExperimentSpec& spec) {
  return make_row(std::move(label), spec, run_experiment(spec).aggregate);
}

}  // namespace

std::vector<OutputTable> reproduce_tables(std::uint64_t base_seed,
                                          std::size_t repetitions) {
  ExperimentSpec base;
  base.base_seed = base_seed;
  base.repetitions = repetitions;

  std::vector<OutputTable> tables;

  for (std::size_t replicas : {1u, 2u}) {
    OutputTable t;
    t.title = fmt::format("Default configuration, {}", redundancy_label(replicas));
    for (auto kind : kAllKinds) {
      ExperimentSpec s = base;
      s.scenario = kind;
      s.replicas = replicas;
      t.rows.push_back(run_row(std::string(trigger_label(kind)), s));
    }
    tables.push_back(std::move(t));
  }

  {
    OutputTable t;
    t.title = "Grace period zero, pod container failure";
    t.key_header = "Redundancy Model";
    for (std::size_t replicas : {1u, 2u}) {
      ExperimentSpec s = base;
      s.scenario = FailureKind::PodSandboxKill;
      s.replicas = replicas;
      s.profile_name = "grace-zero";
      s.profile.grace_period = 0.0;
      t.rows.push_back(run_row(std::string(redundancy_label(replicas)), s));
    }
    tables.push_back(std::move(t));
  }

  {
    OutputTable t;
    t.title = "Responsive node failure handling, node failure";
    t.key_header = "Redundancy Model";
    for (std::size_t replicas : {1u, 2u}) {
      ExperimentSpec s = base;
      s.scenario = FailureKind::NodeCrash;
      s.replicas = replicas;
      s.profile_name = "responsive";
      s.profile = ConfigProfile::responsive();
      t.rows.push_back(run_row(std::string(redundancy_label(replicas)), s));
    }
    tables.push_back(std::move(t));
  }

  {
    OutputTable t;
    t.title = "AMF baseline, active plus spare";
    for (auto kind : kAllKinds) {
      ExperimentSpec s = base;
      s.system = System::Amf;
      s.scenario = kind;
      t.rows.push_back(run_row(std::string(amf_label(amf_counterpart(kind))), s));
    }
    tables.push_back(std::move(t));
  }
  return tables;
}

std::vector<ComparisonRow> compare(std::span<const TableRow> k8s,
                                   std::span<const TableRow> amf) {
  if (k8s.size() != amf.size()) {
    throw std::invalid_argument(fmt::format(
        "scenario sets differ: {} kubernetes rows vs {} amf rows", k8s.size(),
        amf.size()));
  }
  std::vector<ComparisonRow> out;
  std::set<std::string> used;
  for (const auto& row : k8s) {
    auto kind = parse_failure_kind(row.scenario);
    if (!kind) {
      throw std::invalid_argument(
          fmt::format("'{}' is not a kubernetes scenario", row.scenario));
    }
    const auto want = to_cli_name(amf_counterpart(*kind));
    auto match = std::find_if(amf.begin(), amf.end(), [&](const TableRow& r) {
      return r.scenario == want && !used.contains(r.scenario);
    });
    if (match == amf.end()) {
      throw std::invalid_argument(
          fmt::format("no amf '{}' row to pair with '{}'", want, row.scenario));
    }
    used.insert(match->scenario);
    ComparisonRow c;
    c.k8s_label = row.label;
    c.amf_label = match->label;
    c.k8s_outage = row.means.outage;
    c.amf_outage = match->means.outage;
    c.ratio = c.amf_outage > 0.0 ? c.k8s_outage / c.amf_outage
                                 : std::numeric_limits<double>::infinity();
    out.push_back(std::move(c));
  }
  return out;
}

Format parse_format(std::string_view name) {
  if (name == "csv") return Format::Csv;
  if (name == "markdown" || name == "md") return Format::Markdown;
  throw std::invalid_argument(fmt::format("unknown format '{}'", name));
}

namespace {

std::string csv_line(const TableRow& r) {
  MetricsReport m;
  m.reaction = r.means.reaction;
  m.repair = r.means.repair;
  m.recovery = r.means.recovery;
  m.outage = r.means.outage;
  return csv_row(r.scenario, r.profile, r.replicas, r.seed, m);
}

std::string markdown_body(const OutputTable& t) {
  std::string out = fmt::format(
      "| {} | Reaction time | Repair time | Recovery time | Outage time |\n"
      "|---|---:|---:|---:|---:|\n",
      t.key_header);
  for (const auto& r : t.rows) {
    out += fmt::format("| {} | {:.3f} | {} | {:.3f} | {:.3f} |\n", r.label,
                       r.means.reaction,
                       r.means.repair ? fmt::format("{:.3f}", *r.means.repair)
                                      : std::string("-"),
                       r.means.recovery, r.means.outage);
  }
  return out;
}

}  // namespace

std::string emit(const OutputTable& table, Format format) {
  if (format == Format::Markdown) return markdown_body(table);
  std::string out = std::string(kCsvHeader) + "\n";
  for (const auto& r : table.rows) out += csv_line(r) + "\n";
  return out;
}

std::string emit(std::span<const OutputTable> tables, Format format) {
  std::string out;
  if (format == Format::Csv) {
    out = std::string(kCsvHeader) + "\n";
    for (const auto& t : tables) {
      for (const auto& r : t.rows) out += csv_line(r) + "\n";
    }
    return out;
  }
  for (std::size_t i = 0; i < tables.size(); ++i) {
    if (i > 0) out += "\n";
    out += fmt::format("### {}\n\n", tables[i].title);
    out += markdown_body(tables[i]);
  }
  return out;
}

std::string emit(std::span<const ComparisonRow> rows, Format format) {
  std::string out;
  if (format == Format::Csv) {
    out = "kubernetes,amf,kubernetes_outage,amf_outage,ratio\n";
    for (const auto& r : rows) {
      out += fmt::format("{},{},{:.6f},{:.6f},{:.6f}\n", r.k8s_label,
                         r.amf_label, r.k8s_outage, r.amf_outage, r.ratio);
    }
    return out;
  }
  out =
      "| Kubernetes | AMF | Kubernetes outage | AMF outage | Ratio |\n"
      "|---|---|---:|---:|---:|\n";
  for (const auto& r : rows) {
    out += fmt::format("| {} | {} | {:.3f} | {:.3f} | {:.2f} |\n", r.k8s_label,
                       r.amf_label, r.k8s_outage, r.amf_outage, r.ratio);
  }
  return out;
}

namespace {

constexpr std::array<OutageTarget, 13> kTargets{{
    {0, "App Container Failure", 1.766, 0.5},
    {0, "Pod Container Failure", 32.019, 1.5},
    {0, "Node Failure", 300.852, 6.0},
    {1, "App Container Failure", 0.579, 0.3},
    {1, "Pod Container Failure", 0.730, 0.3},
    {1, "Node Failure", 38.582, 4.0},
    {2, "No-Redundancy", 4.045, 0.8},
    {2, "N-Way Active", 0.554, 0.3},
    {3, "No-Redundancy", 3.974, 0.8},
    {3, "N-Way Active", 0.872, 0.4},
    {4, "Process Failure", 0.795, 0.05},
    {4, "VM Failure", 3.351, 0.05},
    {4, "Physical Host Failure", 3.346, 0.05},
}};

}  // namespace

std::span<const OutageTarget> outage_targets() { return kTargets; }

std::vector<CheckResult> check_tables(std::span<const OutputTable> tables) {
  std::vector<CheckResult> out;
  for (const auto& target : kTargets) {
    CheckResult c;
    c.expected = target.outage;
    c.tolerance = target.tolerance;
    c.name = fmt::format("table {} / {}", target.table + 1, target.label);
    if (target.table < tables.size()) {
      const auto& rows = tables[target.table].rows;
      auto it = std::find_if(rows.begin(), rows.end(), [&](const TableRow& r) {
        return r.label == target.label;
      });
      if (it != rows.end()) {
        c.actual = it->means.outage;
        c.pass = std::abs(c.actual - c.expected) <= c.tolerance;
      } else {
        c.actual = std::nan("");
      }
    } else {
      c.actual = std::nan("");
    }
    out.push_back(std::move(c));
  }
  return out;
}

std::optional<OutageTarget> target_for(const ExperimentSpec& spec) {
  std::optional<std::size_t> table;
  std::string_view label;
  const std::size_t model = spec.replicas >= 2 ? 1 : 0;
  if (spec.system == System::Amf) {
    if (spec.amf.latencies != AmfProfile{}.latencies) return std::nullopt;
    table = 4;
    label = amf_label(amf_counterpart(spec.scenario));
  } else if (spec.profile == ConfigProfile::standard()) {
    table = model;
    label = trigger_label(spec.scenario);
  } else {
    ConfigProfile grace_zero = ConfigProfile::standard();
    grace_zero.grace_period = 0.0;
    if (spec.profile == grace_zero && spec.scenario == FailureKind::PodSandboxKill) {
      table = 2;
    } else if (spec.profile == ConfigProfile::responsive() &&
               spec.scenario == FailureKind::NodeCrash) {
      table = 3;
    }
    label = redundancy_label(spec.replicas);
  }
  if (!table) return std::nullopt;
  for (const auto& t : kTargets) {
    if (t.table == *table && t.label == label) return t;
  }
  return std::nullopt;
}

ConfigProfile ConfigFile::resolve_profile(std::string_view name) const {
  if (name == "default" || name == "responsive") return builtin_profile(name);
  auto it = profiles.find(std::string(name));
  if (it == profiles.end()) {
    throw ConfigError(fmt::format("unknown profile '{}'", name));
  }
  return it->second;
}

namespace {

template <typename T>
T get_or(const json& j, const char* key, T fallback) {
  if (!j.contains(key)) return fallback;
  return j.at(key).get<T>();
}

void apply_overrides(ConfigProfile& p, const json& obj, bool allow_base) {
  if (!obj.is_object()) throw ConfigError("profile overrides must be an object");
  for (const auto& [key, value] : obj.items()) {
    if (allow_base && key == "base") continue;
    if (!value.is_number()) {
      throw ConfigError(fmt::format("profile parameter '{}' must be a number", key));
    }
    p.set(key, value.get<double>());
  }
}

}  // namespace

ConfigFile parse_config(std::string_view json_text) {
  ConfigFile cfg;
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ConfigError(fmt::format("invalid JSON: {}", e.what()));
  }
  if (!doc.is_object()) throw ConfigError("config root must be an object");

  try {
    if (doc.contains("profiles")) {
      const auto& profiles = doc.at("profiles");
      if (!profiles.is_object()) throw ConfigError("'profiles' must be an object");
      // Profiles may build on each other; resolve in dependency order.
      std::set<std::string> remaining;
      for (const auto& [name, _] : profiles.items()) remaining.insert(name);
      while (!remaining.empty()) {
        bool progressed = false;
        for (auto it = remaining.begin(); it != remaining.end();) {
          const auto& entry = profiles.at(*it);
          const std::string base = get_or<std::string>(entry, "base", "default");
          if (remaining.contains(base) && base != *it) {
            ++it;
            continue;
          }
          if (base == *it) {
            throw ConfigError(fmt::format("profile '{}' cannot base on itself", *it));
          }
          ConfigProfile p = cfg.resolve_profile(base);
          apply_overrides(p, entry, true);
          p.validate();
          cfg.profiles[*it] = p;
          it = remaining.erase(it);
          progressed = true;
        }
        if (!progressed) throw ConfigError("profile bases form a cycle");
      }
    }

    if (doc.contains("amf")) {
      AmfProfile amf;
      const auto& a = doc.at("amf");
      for (auto kind : {AmfScenarioKind::ProcessFailure, AmfScenarioKind::VmFailure,
                        AmfScenarioKind::HostFailure}) {
        const std::string key(to_cli_name(kind));
        if (!a.contains(key)) continue;
        auto& l = amf.of(kind);
        l.detection = get_or<double>(a.at(key), "detection", l.detection);
        l.failover = get_or<double>(a.at(key), "failover", l.failover);
      }
      amf.jitter_fraction = get_or<double>(a, "jitter_fraction", amf.jitter_fraction);
      amf.validate();
      cfg.amf = amf;
    }

    if (doc.contains("experiments")) {
      for (const auto& e : doc.at("experiments")) {
        ExperimentSpec s;
        const auto system = get_or<std::string>(e, "system", "kubernetes");
        auto sys = parse_system(system);
        if (!sys) throw ConfigError(fmt::format("unknown system '{}'", system));
        s.system = *sys;
        const auto scenario = e.at("scenario").get<std::string>();
        if (auto k = parse_failure_kind(scenario)) {
          s.scenario = *k;
        } else if (auto a = parse_amf_kind(scenario); a && s.system == System::Amf) {
          s.scenario = k8s_counterpart(*a);
        } else {
          throw ConfigError(fmt::format("unknown scenario '{}'", scenario));
        }
        s.profile_name = get_or<std::string>(e, "profile", "default");
        s.profile = cfg.resolve_profile(s.profile_name);
        if (e.contains("overrides")) apply_overrides(s.profile, e.at("overrides"), false);
        if (cfg.amf) s.amf = *cfg.amf;
        s.replicas = get_or<std::size_t>(e, "replicas", s.replicas);
        s.repetitions = get_or<std::size_t>(e, "repetitions", s.repetitions);
        s.base_seed = get_or<std::uint64_t>(e, "base_seed", s.base_seed);
        s.injection_time = get_or<double>(e, "injection_time", s.injection_time);
        s.workers = get_or<std::size_t>(e, "workers", s.workers);
        s.horizon = get_or<double>(e, "horizon", s.horizon);
        s.validate();
        cfg.experiments.push_back(std::move(s));
      }
    }
  } catch (const json::exception& e) {
    throw ConfigError(fmt::format("malformed config: {}", e.what()));
  }
  return cfg;
}

ConfigFile load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(fmt::format("cannot open {}", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

}  // namespace availsim
