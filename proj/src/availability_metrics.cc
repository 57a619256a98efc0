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

#include "availsim/availability_metrics.h"

#include <algorithm>
#include <set>
#include <string_view>

#include <fmt/format.h>

namespace availsim {

double ServiceTimeline::time_in(ServiceClass state) const {
  double total = 0.0;
  for (const auto& iv : intervals) {
    if (iv.state == state) total += iv.length();
  }
  return total;
}

double ServiceTimeline::lost_request_seconds() const {
  double total = 0.0;
  for (const auto& iv : intervals) {
    if (iv.state == ServiceClass::Degraded) total += iv.length() * iv.stale_fraction;
  }
  return total;
}

namespace {

std::size_t single_failure_index(const Trace& trace) {
  std::optional<std::size_t> found;
  for (std::size_t i = 0; i < trace.records.size(); ++i) {
    if (trace.records[i].kind != EventKind::FailureInjected) continue;
    if (found) throw UnsupportedTrace("trace contains more than one failure");
    found = i;
  }
  if (!found) throw UnsupportedTrace("trace contains no failure");
  return *found;
}

}  // namespace

ServiceTimeline derive_timeline(const Trace& trace, std::size_t replicas) {
  if (replicas == 0) throw UnsupportedTrace("replicas must be >= 1");
  const auto failures = trace.of_kind(EventKind::FailureInjected);
  if (failures.size() > 1) {
    throw UnsupportedTrace("trace contains more than one failure");
  }

  ServiceTimeline out;
  if (trace.records.empty()) return out;

  std::set<std::string> endpoints;
  std::set<std::string> dead;

  auto push = [&out](SimTime at, ServiceClass state, double fraction) {
    if (!out.intervals.empty()) {
      auto& last = out.intervals.back();
      if (last.state == state && last.stale_fraction == fraction) return;
      last.end = at;
      if (last.length() <= 0.0) out.intervals.pop_back();
    }
    if (!out.intervals.empty() && out.intervals.back().state == state &&
        out.intervals.back().stale_fraction == fraction) {
      return;
    }
    out.intervals.push_back(TimelineInterval{at, at, state, fraction});
  };

  const auto& recs = trace.records;
  for (std::size_t i = 0; i < recs.size(); ++i) {
    const auto& r = recs[i];
    switch (r.kind) {
      case EventKind::EndpointAdded: endpoints.insert(r.subject); break;
      case EventKind::EndpointRemoved: endpoints.erase(r.subject); break;
      case EventKind::ContainerDied: dead.insert(r.subject); break;
      case EventKind::ContainerStarted:
        if (r.detail == "restart") dead.erase(r.subject);
        break;
      case EventKind::FailureInjected:
        if (endpoints.size() != replicas) {
          throw UnsupportedTrace(fmt::format(
              "{} endpoints before the failure, expected {}", endpoints.size(),
              replicas));
        }
        break;
      default: break;
    }
    // Classify once all records sharing this timestamp have been applied.
    if (i + 1 < recs.size() && recs[i + 1].time == r.time) continue;
    std::size_t stale = 0;
    for (const auto& e : endpoints) stale += dead.contains(e) ? 1 : 0;
    const auto state = classify(endpoints.size(), stale);
    const double fraction =
        endpoints.empty() ? 0.0
                          : static_cast<double>(stale) / endpoints.size();
    push(r.time, state, state == ServiceClass::Degraded ? fraction : 0.0);
  }
  out.intervals.back().end = recs.back().time;
  return out;
}

MetricsReport compute_metrics(const Trace& trace, FailureKind kind,
                              std::size_t replicas) {
  const auto& recs = trace.records;
  const std::size_t fail = single_failure_index(trace);
  const auto& failure = recs[fail];

  std::set<std::string> failed;
  for (std::size_t i = fail + 1;
       i < recs.size() && recs[i].time == failure.time; ++i) {
    if (recs[i].kind == EventKind::ContainerDied) failed.insert(recs[i].subject);
  }
  if (failed.empty()) {
    throw IncompleteTrace("failure did not take down any pod");
  }

  auto find = [&](std::size_t from, auto&& pred) -> std::optional<std::size_t> {
    for (std::size_t i = from; i < recs.size(); ++i) {
      if (pred(recs[i])) return i;
    }
    return std::nullopt;
  };
  auto require = [](std::optional<std::size_t> idx, std::string_view what) {
    if (!idx) throw IncompleteTrace(fmt::format("no {} in trace", what));
    return *idx;
  };

  std::size_t reaction_idx = 0;
  switch (kind) {
    case FailureKind::AppContainerKill:
      reaction_idx = require(find(fail + 1, [&](const EventRecord& r) {
        return r.kind == EventKind::EndpointRemoved && failed.contains(r.subject);
      }), "endpoint removal of the failed pod");
      break;
    case FailureKind::PodSandboxKill:
      reaction_idx = require(find(fail + 1, [&](const EventRecord& r) {
        return r.kind == EventKind::PodScheduledForTermination &&
               failed.contains(r.subject);
      }), "kubelet detection of the lost sandbox");
      break;
    case FailureKind::NodeCrash:
      reaction_idx = require(find(fail + 1, [&](const EventRecord& r) {
        return r.kind == EventKind::NodeMarkedNotReady &&
               r.subject == failure.subject;
      }), "NodeMarkedNotReady for the crashed node");
      break;
  }
  const SimTime reacted = recs[reaction_idx].time;

  std::size_t repair_idx = 0;
  if (kind == FailureKind::AppContainerKill) {
    repair_idx = require(find(fail + 1, [&](const EventRecord& r) {
      return r.kind == EventKind::StreamStarted && failed.contains(r.subject);
    }), "stream restart of the failed pod");
  } else {
    std::set<std::string> replacements;
    for (std::size_t i = fail + 1; i < recs.size(); ++i) {
      if (recs[i].kind == EventKind::PodCreated) replacements.insert(recs[i].subject);
    }
    repair_idx = require(find(fail + 1, [&](const EventRecord& r) {
      return r.kind == EventKind::StreamStarted && replacements.contains(r.subject);
    }), "stream start of a replacement pod");
  }

  std::size_t recovery_idx = 0;
  if (replicas == 1) {
    recovery_idx = require(find(reaction_idx, [](const EventRecord& r) {
      return r.kind == EventKind::EndpointAdded;
    }), "endpoint restoring the service");
  } else {
    recovery_idx = require(find(fail + 1, [&](const EventRecord& r) {
      return r.kind == EventKind::EndpointRemoved && failed.contains(r.subject);
    }), "removal of the stale endpoint");
  }

  MetricsReport m;
  m.reaction = reacted - failure.time;
  m.repair = recs[repair_idx].time - reacted;
  m.recovery = recs[recovery_idx].time - reacted;
  m.outage = m.reaction + m.recovery;
  return m;
}

AggregateReport aggregate(std::span<const MetricsReport> reports,
                          std::vector<std::uint64_t> seeds) {
  if (reports.empty()) {
    throw std::invalid_argument("cannot aggregate an empty report list");
  }
  const auto with_repair = std::count_if(
      reports.begin(), reports.end(),
      [](const MetricsReport& m) { return m.repair.has_value(); });
  if (with_repair != 0 && static_cast<std::size_t>(with_repair) != reports.size()) {
    throw std::invalid_argument("reports disagree on whether repair is measured");
  }

  AggregateReport a;
  double repair = 0.0;
  for (const auto& m : reports) {
    a.reaction += m.reaction;
    a.recovery += m.recovery;
    a.outage += m.outage;
    if (m.repair) repair += *m.repair;
  }
  const double n = static_cast<double>(reports.size());
  a.reaction /= n;
  a.recovery /= n;
  a.outage /= n;
  if (with_repair != 0) a.repair = repair / n;
  a.count = reports.size();
  a.seeds = std::move(seeds);
  return a;
}

std::string csv_row(std::string_view scenario, std::string_view profile,
                    std::size_t replicas, std::uint64_t seed,
                    const MetricsReport& m) {
  return fmt::format("{},{},{},{},{:.6f},{},{:.6f},{:.6f}", scenario, profile,
                     replicas, seed, m.reaction,
                     m.repair ? fmt::format("{:.6f}", *m.repair) : "",
                     m.recovery, m.outage);
}

}  // namespace availsim
