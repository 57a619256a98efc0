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

#include "availsim/failure_injector.h"

#include <fmt/format.h>

namespace availsim {

std::string_view to_cli_name(FailureKind kind) {
  switch (kind) {
    case FailureKind::AppContainerKill: return "app-container";
    case FailureKind::PodSandboxKill: return "pod-container";
    case FailureKind::NodeCrash: return "node";
  }
  return "?";
}

std::optional<FailureKind> parse_failure_kind(std::string_view name) {
  for (auto k : {FailureKind::AppContainerKill, FailureKind::PodSandboxKill,
                 FailureKind::NodeCrash}) {
    if (to_cli_name(k) == name) return k;
  }
  return std::nullopt;
}

FailureScenario FailureScenario::of(FailureKind kind, SimTime at) {
  FailureScenario s;
  s.kind = kind;
  s.at = at;
  if (kind == FailureKind::NodeCrash) {
    s.target = NodeHostingFirstPod{};
  } else {
    s.target = FirstPod{};
  }
  return s;
}

namespace {

struct Resolved {
  std::size_t index;
  std::string id;
};

Resolved resolve(const FailureScenario& s, const Cluster& cluster) {
  const bool wants_node = s.kind == FailureKind::NodeCrash;
  if (std::holds_alternative<FirstPod>(s.target)) {
    if (wants_node) {
      throw InjectionError("node crash needs a node target, not a pod");
    }
    auto pod = cluster.first_pod();
    if (!pod) throw InjectionError("no live pod to target");
    return {*pod, cluster.pods()[*pod].id};
  }
  if (std::holds_alternative<NodeHostingFirstPod>(s.target)) {
    if (!wants_node) {
      throw InjectionError(fmt::format("{} needs a pod target, not a node",
                                       to_cli_name(s.kind)));
    }
    auto pod = cluster.first_pod();
    if (!pod) throw InjectionError("no live pod to locate a node from");
    const std::size_t node = cluster.pods()[*pod].node;
    return {node, cluster.nodes()[node].id};
  }
  const auto& id = std::get<ExplicitTarget>(s.target).id;
  if (wants_node) {
    auto node = cluster.find_node(id);
    if (!node) throw InjectionError(fmt::format("unknown node '{}'", id));
    return {*node, id};
  }
  auto pod = cluster.find_pod(id);
  if (!pod) throw InjectionError(fmt::format("unknown pod '{}'", id));
  return {*pod, id};
}

void check_alive(FailureKind kind, const Resolved& r, const Cluster& cluster) {
  if (kind == FailureKind::NodeCrash) {
    if (cluster.nodes()[r.index].crashed) {
      throw InjectionError(fmt::format("node {} is already down", r.id));
    }
    return;
  }
  const auto& p = cluster.pods()[r.index];
  const bool dead = p.phase == PodPhase::Terminated || p.failure_targeted ||
                    !p.healthy(cluster.nodes()[p.node]);
  if (dead) {
    throw InjectionError(fmt::format("pod {} is already failed", r.id));
  }
}

}  // namespace

void inject(const FailureScenario& scenario, Cluster& cluster) {
  Engine& engine = cluster.engine();
  if (scenario.at < engine.now()) {
    throw InjectionError(fmt::format("injection time {} is in the past",
                                     scenario.at.seconds));
  }
  const Resolved target = resolve(scenario, cluster);
  check_alive(scenario.kind, target, cluster);
  if (scenario.kind != FailureKind::NodeCrash) {
    cluster.mutable_pods()[target.index].failure_targeted = true;
  }

  engine.schedule(
      EventKind::FailureInjected, target.id, scenario.at,
      [&cluster, kind = scenario.kind, target] {
        if (kind == FailureKind::NodeCrash) {
          check_alive(kind, target, cluster);
          cluster.crash_node(target.index);
          return;
        }
        const auto& p = cluster.pods()[target.index];
        if (p.phase == PodPhase::Terminated ||
            !p.healthy(cluster.nodes()[p.node])) {
          throw InjectionError(
              fmt::format("pod {} died before the failure fired", target.id));
        }
        if (kind == FailureKind::AppContainerKill) {
          cluster.kill_app_container(target.index);
        } else {
          cluster.kill_sandbox(target.index);
        }
      },
      std::string(to_cli_name(scenario.kind)));
}

}  // namespace availsim
