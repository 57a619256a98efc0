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

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

#include "availsim/availability_metrics.h"
#include "availsim/failure_injector.h"

namespace availsim {

// Failure triggers of the middleware-managed deployment (one active
// instance, one spare).
enum class AmfScenarioKind { ProcessFailure, VmFailure, HostFailure };

std::string_view to_cli_name(AmfScenarioKind kind);
std::optional<AmfScenarioKind> parse_amf_kind(std::string_view name);

// process <-> app container, VM <-> pod sandbox, host <-> node.
AmfScenarioKind amf_counterpart(FailureKind kind);
FailureKind k8s_counterpart(AmfScenarioKind kind);

struct AmfLatencies {
  double detection = 0.0;
  double failover = 0.0;
  bool operator==(const AmfLatencies&) const = default;
};

// Calibrated on measured aggregates; internal middleware timers are not
// modeled.
struct AmfProfile {
  std::array<AmfLatencies, 3> latencies{{
      {0.650, 0.145},  // process
      {3.233, 0.123},  // VM
      {3.229, 0.118},  // host
  }};
  double jitter_fraction = 0.02;

  const AmfLatencies& of(AmfScenarioKind kind) const {
    return latencies[static_cast<std::size_t>(kind)];
  }
  AmfLatencies& of(AmfScenarioKind kind) {
    return latencies[static_cast<std::size_t>(kind)];
  }
  void validate() const;
};

// reaction = detection, recovery = failover to the spare; no repair.
MetricsReport run_amf(AmfScenarioKind kind, const AmfProfile& profile,
                      std::uint64_t seed);

}  // namespace availsim
