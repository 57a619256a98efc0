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

#include "availsim/k8s_model.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <utility>

#include <fmt/format.h>

namespace availsim {

namespace {

struct DoubleField {
  std::string_view name;
  double ConfigProfile::*member;
};

constexpr std::array<DoubleField, 12> kDoubleFields{{
    {"heartbeat_interval", &ConfigProfile::heartbeat_interval},
    {"node_monitor_period", &ConfigProfile::node_monitor_period},
    {"eviction_wait", &ConfigProfile::eviction_wait},
    {"grace_period", &ConfigProfile::grace_period},
    {"force_kill_floor", &ConfigProfile::force_kill_floor},
    {"kubelet_sync_period", &ConfigProfile::kubelet_sync_period},
    {"endpoint_propagation_latency", &ConfigProfile::endpoint_propagation_latency},
    {"container_restart_latency", &ConfigProfile::container_restart_latency},
    {"pod_creation_latency", &ConfigProfile::pod_creation_latency},
    {"stream_start_latency", &ConfigProfile::stream_start_latency},
    {"readiness_latency", &ConfigProfile::readiness_latency},
    {"jitter_fraction", &ConfigProfile::jitter_fraction},
}};

constexpr std::array<std::string_view, 13> kProfileKeys{
    "heartbeat_interval",        "allowed_missed_updates",
    "node_monitor_period",       "eviction_wait",
    "grace_period",              "force_kill_floor",
    "kubelet_sync_period",       "endpoint_propagation_latency",
    "container_restart_latency", "pod_creation_latency",
    "stream_start_latency",      "readiness_latency",
    "jitter_fraction",
};

}  // namespace

double ConfigProfile::termination_delay() const {
  return std::max(grace_period, force_kill_floor);
}

void ConfigProfile::validate() const {
  for (const auto& f : kDoubleFields) {
    const double v = this->*f.member;
    if (!std::isfinite(v) || v < 0.0) {
      throw ConfigError(fmt::format("{} must be a finite value >= 0, got {}",
                                    f.name, v));
    }
  }
  if (allowed_missed_updates < 1) {
    throw ConfigError("allowed_missed_updates must be >= 1");
  }
  // Periods drive self-rescheduling loops; zero would never advance time.
  if (heartbeat_interval <= 0.0 || node_monitor_period <= 0.0 ||
      kubelet_sync_period <= 0.0) {
    throw ConfigError(
        "heartbeat_interval, node_monitor_period and kubelet_sync_period must "
        "be > 0");
  }
  if (jitter_fraction >= 1.0) {
    throw ConfigError("jitter_fraction must be < 1");
  }
}

void ConfigProfile::set(std::string_view key, double value) {
  if (key == "allowed_missed_updates") {
    if (value != std::floor(value)) {
      throw ConfigError("allowed_missed_updates must be an integer");
    }
    allowed_missed_updates = static_cast<int>(value);
    return;
  }
  for (const auto& f : kDoubleFields) {
    if (f.name == key) {
      this->*f.member = value;
      return;
    }
  }
  throw ConfigError(fmt::format("unknown profile parameter '{}'", key));
}

double ConfigProfile::get(std::string_view key) const {
  if (key == "allowed_missed_updates") return allowed_missed_updates;
  for (const auto& f : kDoubleFields) {
    if (f.name == key) return this->*f.member;
  }
  throw ConfigError(fmt::format("unknown profile parameter '{}'", key));
}

ConfigProfile ConfigProfile::standard() { return ConfigProfile{}; }

ConfigProfile ConfigProfile::responsive() {
  ConfigProfile p;
  p.heartbeat_interval = 1.0;
  p.allowed_missed_updates = 1;
  p.node_monitor_period = 1.0;
  p.eviction_wait = 1.0;
  return p;
}

std::span<const std::string_view> profile_keys() { return kProfileKeys; }

ConfigProfile builtin_profile(std::string_view name) {
  if (name == "default") return ConfigProfile::standard();
  if (name == "responsive") return ConfigProfile::responsive();
  throw ConfigError(fmt::format("unknown profile '{}'", name));
}

std::string_view to_string(NodeStatus s) {
  switch (s) {
    case NodeStatus::Ready: return "Ready";
    case NodeStatus::NotReady: return "NotReady";
    case NodeStatus::Crashed: return "Crashed";
  }
  return "?";
}

std::string_view to_string(PodPhase p) {
  switch (p) {
    case PodPhase::Pending: return "Pending";
    case PodPhase::Running: return "Running";
    case PodPhase::Terminating: return "Terminating";
    case PodPhase::Terminated: return "Terminated";
  }
  return "?";
}

std::string_view to_string(ServiceClass c) {
  switch (c) {
    case ServiceClass::Available: return "Available";
    case ServiceClass::Degraded: return "Degraded";
    case ServiceClass::Unavailable: return "Unavailable";
  }
  return "?";
}

std::optional<ServiceClass> parse_service_class(std::string_view s) {
  for (auto c : {ServiceClass::Available, ServiceClass::Degraded,
                 ServiceClass::Unavailable}) {
    if (to_string(c) == s) return c;
  }
  return std::nullopt;
}

ServiceClass classify(std::size_t endpoints, std::size_t stale) {
  if (stale >= endpoints) return ServiceClass::Unavailable;
  return stale > 0 ? ServiceClass::Degraded : ServiceClass::Available;
}

Cluster::Cluster(Engine& engine, ClusterOptions options)
    : engine_(engine),
      profile_(options.profile),
      max_pods_per_node_(options.max_pods_per_node) {
  profile_.validate();
  if (options.workers < 1) throw ConfigError("cluster needs at least one worker");
  if (options.replicas < 1) throw ConfigError("replicas must be >= 1");
  if (options.replicas > options.workers * options.max_pods_per_node) {
    throw ConfigError(fmt::format(
        "{} replicas exceed placement capacity of {} workers x {} pods",
        options.replicas, options.workers, options.max_pods_per_node));
  }
  deployment_.desired_replicas = options.replicas;

  nodes_.reserve(options.workers);
  for (std::size_t i = 0; i < options.workers; ++i) {
    NodeState n;
    n.id = fmt::format("node-{}", i + 1);
    n.heartbeat_phase = engine_.uniform(0.0, profile_.heartbeat_interval);
    n.sync_phase = engine_.uniform(0.0, profile_.kubelet_sync_period);
    n.last_heartbeat = engine_.now();
    nodes_.push_back(std::move(n));
  }
  const double monitor_phase = engine_.uniform(0.0, profile_.node_monitor_period);

  // Initial replicas come up fully ready; no startup transient is modeled.
  for (std::size_t r = 0; r < options.replicas; ++r) {
    const std::size_t node = *place_pod();
    const std::size_t idx = pods_.size();
    PodState p;
    p.id = fmt::format("pod-{}", idx + 1);
    p.node = node;
    p.phase = PodPhase::Running;
    p.app_container = ContainerState::Serving;
    p.ready = true;
    p.readiness_at = engine_.now();
    pods_.push_back(std::move(p));
    pod_events_.emplace_back();
    engine_.record(EventKind::PodCreated, pods_[idx].id, nodes_[node].id);
    engine_.record(EventKind::StreamStarted, pods_[idx].id);
    engine_.record(EventKind::PodReady, pods_[idx].id);
    engine_.record(EventKind::EndpointAdded, pods_[idx].id);
    service_.endpoints.insert(idx);
  }
  engine_.record(EventKind::ServiceStateChanged, "service",
                 fmt::format("{} 0/{}", to_string(ServiceClass::Available),
                             service_.endpoints.size()));

  node_ticks_.resize(2 * nodes_.size());
  const SimTime start = engine_.now();
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    node_ticks_[2 * i] = engine_.schedule(
        EventKind::HeartbeatPosted, nodes_[i].id,
        start + nodes_[i].heartbeat_phase,
        [this, i] { kubelet_heartbeat_tick(i); }, {}, true);
    node_ticks_[2 * i + 1] = engine_.schedule(
        EventKind::KubeletSync, nodes_[i].id, start + nodes_[i].sync_phase,
        [this, i] { kubelet_sync_tick(i); }, {}, true);
  }
  engine_.schedule(EventKind::NodeMonitor, "master", start + monitor_phase,
                   [this] { node_controller_tick(); }, {}, true);
}

double Cluster::jit(double nominal) {
  return engine_.jittered(nominal, profile_.jitter_fraction);
}

void Cluster::own(std::size_t pod, EventHandle h) {
  auto& v = pod_events_[pod];
  std::erase_if(v, [this](EventHandle e) { return !engine_.pending(e); });
  v.push_back(h);
}

void Cluster::cancel_owned(std::size_t pod) {
  for (auto h : pod_events_[pod]) engine_.cancel(h);
  pod_events_[pod].clear();
}

void Cluster::kubelet_heartbeat_tick(std::size_t node) {
  auto& n = nodes_[node];
  if (n.crashed) return;
  n.last_heartbeat = engine_.now();
  node_ticks_[2 * node] = engine_.schedule_after(
      EventKind::HeartbeatPosted, n.id, profile_.heartbeat_interval,
      [this, node] { kubelet_heartbeat_tick(node); }, {}, true);
}

void Cluster::kubelet_sync_tick(std::size_t node) {
  auto& n = nodes_[node];
  if (n.crashed) return;
  bool changed = false;
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    auto& p = pods_[i];
    if (p.node != node || p.phase != PodPhase::Running ||
        p.scheduled_for_termination) {
      continue;
    }
    if (!p.sandbox_alive) {
      handle_sandbox_lost(i);
      changed = true;
    } else if (p.app_container == ContainerState::Dead) {
      if (!p.restart_pending) {
        restart_container(i);
        changed = true;
      }
    } else if (!p.ready && p.readiness_at && engine_.now() >= *p.readiness_at) {
      p.ready = true;
      engine_.record(EventKind::PodReady, p.id);
      changed = true;
    }
  }
  if (changed) endpoints_reconcile();
  node_ticks_[2 * node + 1] = engine_.schedule_after(
      EventKind::KubeletSync, n.id, profile_.kubelet_sync_period,
      [this, node] { kubelet_sync_tick(node); }, {}, true);
}

void Cluster::restart_container(std::size_t pod) {
  auto& p = pods_[pod];
  p.ready = false;
  p.restart_pending = true;
  p.readiness_at.reset();
  const double total = jit(profile_.container_restart_latency);
  const double stream = std::min(total, jit(profile_.stream_start_latency));
  const double readiness = jit(profile_.readiness_latency);
  const SimTime started = engine_.now() + (total - stream);
  own(pod, engine_.schedule(EventKind::ContainerStarted, p.id, started,
                            [this, pod, readiness] {
                              auto& q = pods_[pod];
                              q.app_container = ContainerState::Starting;
                              q.restart_pending = false;
                              q.readiness_at = engine_.now() + readiness;
                            },
                            "restart"));
  own(pod, engine_.schedule(EventKind::StreamStarted, p.id,
                            engine_.now() + total, [this, pod] {
                              pods_[pod].app_container = ContainerState::Serving;
                            }));
}

void Cluster::handle_sandbox_lost(std::size_t pod) {
  auto& p = pods_[pod];
  engine_.record(EventKind::PodScheduledForTermination, p.id, "sandbox-lost");
  p.ready = false;
  terminate_pod(pod, true);
}

void Cluster::terminate_pod(std::size_t pod, bool graceful) {
  auto& p = pods_[pod];
  if (p.phase == PodPhase::Terminated || p.phase == PodPhase::Terminating) {
    return;
  }
  p.scheduled_for_termination = true;
  p.ready = false;
  p.phase = PodPhase::Terminating;
  const bool runtime_alive = !nodes_[p.node].crashed;
  const double delay =
      (graceful && runtime_alive) ? profile_.termination_delay() : 0.0;
  p.termination_deadline = engine_.now() + delay;
  own(pod, engine_.schedule(EventKind::PodTerminated, p.id,
                            *p.termination_deadline, [this, pod] {
                              auto& q = pods_[pod];
                              q.phase = PodPhase::Terminated;
                              q.app_container = ContainerState::Dead;
                              q.ready = false;
                              q.eviction_pending = false;
                              endpoints_reconcile();
                              deployment_reconcile();
                            }));
}

void Cluster::evict_pods_on(std::size_t node) {
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    auto& p = pods_[i];
    if (p.node != node || p.phase == PodPhase::Terminated || p.eviction_pending) {
      continue;
    }
    engine_.record(EventKind::PodScheduledForTermination, p.id, "node-lost");
    p.eviction_pending = true;
    p.scheduled_for_termination = true;
    p.ready = false;
    engine_.schedule_after(EventKind::Timer, p.id, profile_.eviction_wait,
                           [this, i] {
                             auto& q = pods_[i];
                             // Force the eviction through even if a graceful
                             // termination was in flight when the node died.
                             if (q.phase == PodPhase::Terminating) {
                               q.phase = PodPhase::Running;
                             }
                             terminate_pod(i, true);
                           },
                           "eviction");
  }
}

void Cluster::node_controller_tick() {
  const double threshold =
      profile_.allowed_missed_updates * profile_.heartbeat_interval;
  bool changed = false;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    auto& n = nodes_[i];
    if (n.marked_not_ready) continue;
    if (engine_.now() - n.last_heartbeat > threshold) {
      n.marked_not_ready = true;
      engine_.record(EventKind::NodeMarkedNotReady, n.id);
      evict_pods_on(i);
      changed = true;
    }
  }
  if (changed) endpoints_reconcile();
  deployment_reconcile();
  engine_.schedule_after(EventKind::NodeMonitor, "master",
                         profile_.node_monitor_period,
                         [this] { node_controller_tick(); }, {}, true);
}

void Cluster::endpoints_reconcile() {
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    const bool want = pods_[i].ready;
    const bool have = service_.endpoints.contains(i);
    auto add = pending_add_.find(i);
    auto rem = pending_remove_.find(i);
    if (want && have) {
      if (rem != pending_remove_.end()) {
        engine_.cancel(rem->second);
        pending_remove_.erase(rem);
      }
    } else if (want && !have) {
      if (add == pending_add_.end()) {
        pending_add_[i] = engine_.schedule_after(
            EventKind::EndpointAdded, pods_[i].id,
            jit(profile_.endpoint_propagation_latency), [this, i] {
              pending_add_.erase(i);
              service_.endpoints.insert(i);
              reclassify();
            });
      }
    } else if (!want && have) {
      if (rem == pending_remove_.end()) {
        pending_remove_[i] = engine_.schedule_after(
            EventKind::EndpointRemoved, pods_[i].id,
            jit(profile_.endpoint_propagation_latency), [this, i] {
              pending_remove_.erase(i);
              service_.endpoints.erase(i);
              reclassify();
            });
      }
    } else if (add != pending_add_.end()) {
      engine_.cancel(add->second);
      pending_add_.erase(add);
    }
  }
}

std::size_t Cluster::live_pods_on(std::size_t node) const {
  return static_cast<std::size_t>(
      std::count_if(pods_.begin(), pods_.end(), [node](const PodState& p) {
        return p.node == node && p.phase != PodPhase::Terminated;
      }));
}

std::optional<std::size_t> Cluster::place_pod() const {
  std::optional<std::size_t> best;
  std::size_t best_load = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.crashed || n.marked_not_ready) continue;
    const std::size_t load = live_pods_on(i);
    if (load >= max_pods_per_node_) continue;
    if (!best || load < best_load) {
      best = i;
      best_load = load;
    }
  }
  return best;
}

void Cluster::deployment_reconcile() {
  std::size_t live = static_cast<std::size_t>(
      std::count_if(pods_.begin(), pods_.end(), [](const PodState& p) {
        return p.phase != PodPhase::Terminated;
      }));
  while (live < deployment_.desired_replicas) {
    auto node = place_pod();
    if (!node) return;  // deferred until a healthy node exists
    create_pod(*node);
    ++live;
  }
}

void Cluster::create_pod(std::size_t node) {
  const std::size_t idx = pods_.size();
  PodState p;
  p.id = fmt::format("pod-{}", idx + 1);
  p.node = node;
  pods_.push_back(std::move(p));
  pod_events_.emplace_back();
  engine_.record(EventKind::PodCreated, pods_[idx].id, nodes_[node].id);
  own(idx, engine_.schedule_after(EventKind::ContainerStarted, pods_[idx].id,
                                  jit(profile_.pod_creation_latency),
                                  [this, idx] { start_container(idx); }));
}

void Cluster::start_container(std::size_t pod) {
  auto& p = pods_[pod];
  p.phase = PodPhase::Running;
  p.app_container = ContainerState::Starting;
  const double stream = jit(profile_.stream_start_latency);
  p.readiness_at = engine_.now() + jit(profile_.readiness_latency);
  own(pod, engine_.schedule_after(EventKind::StreamStarted, p.id, stream,
                                  [this, pod] {
                                    pods_[pod].app_container =
                                        ContainerState::Serving;
                                  }));
}

void Cluster::reclassify() {
  std::size_t stale = 0;
  for (auto i : service_.endpoints) {
    if (!pods_[i].healthy(nodes_[pods_[i].node])) ++stale;
  }
  const auto c = classify(service_.endpoints.size(), stale);
  if (c == service_.classification) return;
  service_.classification = c;
  engine_.record(EventKind::ServiceStateChanged, "service",
                 fmt::format("{} {}/{}", to_string(c), stale,
                             service_.endpoints.size()));
}

void Cluster::kill_app_container(std::size_t pod) {
  auto& p = pods_[pod];
  cancel_owned(pod);
  p.restart_pending = false;
  p.app_container = ContainerState::Dead;
  engine_.record(EventKind::ContainerDied, p.id, "app");
  reclassify();
}

void Cluster::kill_sandbox(std::size_t pod) {
  auto& p = pods_[pod];
  p.sandbox_alive = false;
  engine_.record(EventKind::ContainerDied, p.id, "sandbox");
  reclassify();
}

void Cluster::crash_node(std::size_t node) {
  auto& n = nodes_[node];
  n.crashed = true;
  engine_.cancel(node_ticks_[2 * node]);
  engine_.cancel(node_ticks_[2 * node + 1]);
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    auto& p = pods_[i];
    if (p.node != node || p.phase == PodPhase::Terminated) continue;
    cancel_owned(i);
    p.restart_pending = false;
    if (p.phase == PodPhase::Terminating) {
      // The runtime that would have finished the termination is gone.
      p.scheduled_for_termination = false;
    }
    p.app_container = ContainerState::Dead;
    engine_.record(EventKind::ContainerDied, p.id, "node");
  }
  reclassify();
}

bool Cluster::settled() const {
  for (const auto& n : nodes_) {
    if (n.crashed && !n.marked_not_ready) return false;
  }
  if (!pending_add_.empty() || !pending_remove_.empty()) return false;
  std::size_t serving = 0;
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    const auto& p = pods_[i];
    if (p.phase == PodPhase::Terminated) {
      if (service_.endpoints.contains(i)) return false;
      continue;
    }
    if (p.phase != PodPhase::Running || p.scheduled_for_termination ||
        !p.ready || !p.healthy(nodes_[p.node]) ||
        p.app_container != ContainerState::Serving ||
        !service_.endpoints.contains(i)) {
      return false;
    }
    ++serving;
  }
  return serving == deployment_.desired_replicas;
}

std::optional<std::size_t> Cluster::find_pod(std::string_view id) const {
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    if (pods_[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Cluster::find_node(std::string_view id) const {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    if (nodes_[i].id == id) return i;
  }
  return std::nullopt;
}

std::optional<std::size_t> Cluster::first_pod() const {
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    if (pods_[i].phase != PodPhase::Terminated) return i;
  }
  return std::nullopt;
}

std::vector<std::size_t> Cluster::ready_pods() const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < pods_.size(); ++i) {
    if (pods_[i].ready) out.push_back(i);
  }
  return out;
}

Simulation::Simulation(ClusterOptions options, std::uint64_t seed)
    : engine_(seed), cluster_(engine_, std::move(options)) {}

Trace Simulation::run_to_quiescence(std::optional<SimTime> horizon) {
  RunBounds bounds;
  bounds.until = horizon;
  bounds.settled = [this] { return cluster_.settled(); };
  return engine_.run(bounds);
}

}  // namespace availsim
