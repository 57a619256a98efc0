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

#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <variant>

#include "availsim/k8s_model.h"
#include "availsim/sim_engine.h"

namespace availsim {

enum class FailureKind { AppContainerKill, PodSandboxKill, NodeCrash };

// CLI spellings: app-container | pod-container | node.
std::string_view to_cli_name(FailureKind kind);
std::optional<FailureKind> parse_failure_kind(std::string_view name);

struct FirstPod {};
struct NodeHostingFirstPod {};
struct ExplicitTarget {
  std::string id;
};
using FailureTarget = std::variant<FirstPod, NodeHostingFirstPod, ExplicitTarget>;

inline constexpr double kDefaultInjectionTime = 120.0;

struct FailureScenario {
  FailureKind kind = FailureKind::AppContainerKill;
  FailureTarget target = FirstPod{};
  SimTime at{kDefaultInjectionTime};

  // Default target for the kind: the first pod, or the node hosting it.
  static FailureScenario of(FailureKind kind,
                            SimTime at = SimTime(kDefaultInjectionTime));
};

class InjectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Schedules the failure on the cluster's engine. The target is resolved
// now and re-checked when the failure fires.
void inject(const FailureScenario& scenario, Cluster& cluster);

}  // namespace availsim
