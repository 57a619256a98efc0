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
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "availsim/failure_injector.h"
#include "availsim/k8s_model.h"
#include "availsim/sim_engine.h"

namespace availsim {

// Zero or several failures in a trace that needs exactly one.
class UnsupportedTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A constituent event is missing, usually because the run was cut short.
class IncompleteTrace : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TimelineInterval {
  SimTime start;
  SimTime end;
  ServiceClass state = ServiceClass::Available;
  // Share of routed requests landing on a dead endpoint (round robin).
  double stale_fraction = 0.0;

  double length() const { return end - start; }
};

struct ServiceTimeline {
  std::vector<TimelineInterval> intervals;

  double time_in(ServiceClass state) const;
  // Expected lost-request seconds: stale fraction integrated over Degraded
  // time. Reported alongside outage, never added to it.
  double lost_request_seconds() const;
};

// Replays endpoint membership and container deaths from the trace and
// classifies the service after every record.
ServiceTimeline derive_timeline(const Trace& trace, std::size_t replicas);

struct MetricsReport {
  double reaction = 0.0;
  std::optional<double> repair;  // absent for the AMF baseline
  double recovery = 0.0;
  double outage = 0.0;
};

// Reaction, repair, recovery and outage for a single-failure trace.
//
// The first reaction is the EndpointRemoved of the failed pod for an app
// container kill, the kubelet's PodScheduledForTermination for a sandbox
// kill, and NodeMarkedNotReady for a node crash. Repair ends at the
// StreamStarted of the restarted or replacement pod. Recovery ends at the
// first EndpointAdded when a single replica runs, otherwise at the removal
// of the failed pod's endpoint.
MetricsReport compute_metrics(const Trace& trace, FailureKind kind,
                              std::size_t replicas);

struct AggregateReport {
  double reaction = 0.0;
  std::optional<double> repair;
  double recovery = 0.0;
  double outage = 0.0;
  std::size_t count = 0;
  std::vector<std::uint64_t> seeds;
};

AggregateReport aggregate(std::span<const MetricsReport> reports,
                          std::vector<std::uint64_t> seeds = {});

// scenario,profile,replicas,seed,reaction,repair,recovery,outage
inline constexpr const char* kCsvHeader =
    "scenario,profile,replicas,seed,reaction,repair,recovery,outage";

std::string csv_row(std::string_view scenario, std::string_view profile,
                    std::size_t replicas, std::uint64_t seed,
                    const MetricsReport& m);

}  // namespace availsim
