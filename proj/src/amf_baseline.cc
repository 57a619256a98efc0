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

#include "availsim/amf_baseline.h"

#include <cmath>
#include <random>

#include "availsim/k8s_model.h"

namespace availsim {

std::string_view to_cli_name(AmfScenarioKind kind) {
  switch (kind) {
    case AmfScenarioKind::ProcessFailure: return "process";
    case AmfScenarioKind::VmFailure: return "vm";
    case AmfScenarioKind::HostFailure: return "host";
  }
  return "?";
}

std::optional<AmfScenarioKind> parse_amf_kind(std::string_view name) {
  for (auto k : {AmfScenarioKind::ProcessFailure, AmfScenarioKind::VmFailure,
                 AmfScenarioKind::HostFailure}) {
    if (to_cli_name(k) == name) return k;
  }
  if (auto k8s = parse_failure_kind(name)) return amf_counterpart(*k8s);
  return std::nullopt;
}

AmfScenarioKind amf_counterpart(FailureKind kind) {
  switch (kind) {
    case FailureKind::AppContainerKill: return AmfScenarioKind::ProcessFailure;
    case FailureKind::PodSandboxKill: return AmfScenarioKind::VmFailure;
    case FailureKind::NodeCrash: return AmfScenarioKind::HostFailure;
  }
  return AmfScenarioKind::ProcessFailure;
}

FailureKind k8s_counterpart(AmfScenarioKind kind) {
  switch (kind) {
    case AmfScenarioKind::ProcessFailure: return FailureKind::AppContainerKill;
    case AmfScenarioKind::VmFailure: return FailureKind::PodSandboxKill;
    case AmfScenarioKind::HostFailure: return FailureKind::NodeCrash;
  }
  return FailureKind::AppContainerKill;
}

void AmfProfile::validate() const {
  for (const auto& l : latencies) {
    if (!std::isfinite(l.detection) || !std::isfinite(l.failover) ||
        l.detection < 0.0 || l.failover < 0.0) {
      throw ConfigError("AMF latencies must be finite and >= 0");
    }
  }
  if (jitter_fraction < 0.0 || jitter_fraction >= 1.0) {
    throw ConfigError("AMF jitter_fraction must be in [0, 1)");
  }
}

MetricsReport run_amf(AmfScenarioKind kind, const AmfProfile& profile,
                      std::uint64_t seed) {
  profile.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-profile.jitter_fraction,
                                           profile.jitter_fraction);
  auto draw = [&](double nominal) {
    return profile.jitter_fraction == 0.0 ? nominal : nominal * (1.0 + u(rng));
  };
  const auto& l = profile.of(kind);
  MetricsReport m;
  m.reaction = draw(l.detection);
  m.recovery = draw(l.failover);
  m.outage = m.reaction + m.recovery;
  return m;
}

}  // namespace availsim
