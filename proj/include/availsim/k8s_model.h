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
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "availsim/sim_engine.h"

namespace availsim {

class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Timers and latencies of the modeled control plane, in seconds.
struct ConfigProfile {
  double heartbeat_interval = 10.0;
  int allowed_missed_updates = 4;
  double node_monitor_period = 5.0;
  double eviction_wait = 260.0;
  double grace_period = 30.0;
  double force_kill_floor = 2.0;
  double kubelet_sync_period = 1.0;
  double endpoint_propagation_latency = 0.030;
  double container_restart_latency = 0.47;
  double pod_creation_latency = 0.7;
  double stream_start_latency = 0.3;
  double readiness_latency = 0.25;
  double jitter_fraction = 0.1;

  double termination_delay() const;
  void validate() const;

  // Sets one field by its snake_case name. Throws ConfigError on unknown keys.
  void set(std::string_view key, double value);
  double get(std::string_view key) const;

  bool operator==(const ConfigProfile&) const = default;

  static ConfigProfile standard();
  // One-second status posts, one allowed miss, one-second eviction wait.
  static ConfigProfile responsive();
};

std::span<const std::string_view> profile_keys();
// "default" or "responsive".
ConfigProfile builtin_profile(std::string_view name);

enum class NodeStatus { Ready, NotReady, Crashed };
enum class PodPhase { Pending, Running, Terminating, Terminated };
enum class ContainerState { Starting, Serving, Dead };
enum class ServiceClass { Available, Degraded, Unavailable };

std::string_view to_string(NodeStatus s);
std::string_view to_string(PodPhase p);
std::string_view to_string(ServiceClass c);
std::optional<ServiceClass> parse_service_class(std::string_view s);

// No healthy endpoint is Unavailable; any stale endpoint next to a healthy
// one is Degraded.
ServiceClass classify(std::size_t endpoints, std::size_t stale);

struct NodeState {
  std::string id;
  bool crashed = false;
  bool marked_not_ready = false;
  SimTime last_heartbeat;
  double heartbeat_phase = 0.0;
  double sync_phase = 0.0;

  NodeStatus status() const {
    if (marked_not_ready) return NodeStatus::NotReady;
    return crashed ? NodeStatus::Crashed : NodeStatus::Ready;
  }
};

struct PodState {
  std::string id;
  std::size_t node = 0;
  PodPhase phase = PodPhase::Pending;
  ContainerState app_container = ContainerState::Starting;
  bool sandbox_alive = true;
  bool ready = false;
  std::optional<SimTime> termination_deadline;
  // Earliest time the kubelet may report readiness for the current
  // container incarnation.
  std::optional<SimTime> readiness_at;
  bool scheduled_for_termination = false;
  bool restart_pending = false;
  bool eviction_pending = false;
  // Set once the pod has been picked for a failure; used only to reject
  // duplicate injections.
  bool failure_targeted = false;

  bool healthy(const NodeState& host) const {
    return !host.crashed && sandbox_alive &&
           app_container != ContainerState::Dead &&
           phase != PodPhase::Terminated;
  }
};

enum class RedundancyModel { NoRedundancy, NWayActive };

struct DeploymentSpec {
  std::size_t desired_replicas = 1;
  RedundancyModel redundancy_model() const {
    return desired_replicas >= 2 ? RedundancyModel::NWayActive
                                 : RedundancyModel::NoRedundancy;
  }
};

struct ServiceState {
  std::set<std::size_t> endpoints;  // pod indices
  ServiceClass classification = ServiceClass::Available;
};

struct ClusterOptions {
  std::size_t workers = 2;
  std::size_t replicas = 1;
  std::size_t max_pods_per_node = 110;
  ConfigProfile profile;
};

// The modeled cluster and its control loops. Every handler runs inside an
// engine dispatch; the Engine must outlive the Cluster.
class Cluster {
 public:
  Cluster(Engine& engine, ClusterOptions options);

  Cluster(const Cluster&) = delete;
  Cluster& operator=(const Cluster&) = delete;

  void kubelet_heartbeat_tick(std::size_t node);
  void kubelet_sync_tick(std::size_t node);
  void node_controller_tick();
  void endpoints_reconcile();
  void deployment_reconcile();
  void terminate_pod(std::size_t pod, bool graceful);

  // Fault hooks used by the failure injector.
  void kill_app_container(std::size_t pod);
  void kill_sandbox(std::size_t pod);
  void crash_node(std::size_t node);

  // Stable state: every crash acknowledged, no pod in a transient phase,
  // desired replicas ready and serving, endpoints equal to ready pods.
  bool settled() const;

  std::optional<std::size_t> find_pod(std::string_view id) const;
  std::optional<std::size_t> find_node(std::string_view id) const;
  // Lowest-numbered pod that is not Terminated.
  std::optional<std::size_t> first_pod() const;

  std::vector<std::size_t> ready_pods() const;
  std::size_t live_pods_on(std::size_t node) const;

  const std::vector<NodeState>& nodes() const { return nodes_; }
  const std::vector<PodState>& pods() const { return pods_; }
  std::vector<PodState>& mutable_pods() { return pods_; }
  const DeploymentSpec& deployment() const { return deployment_; }
  const ServiceState& service() const { return service_; }
  const ConfigProfile& profile() const { return profile_; }
  Engine& engine() { return engine_; }

 private:
  double jit(double nominal);
  std::optional<std::size_t> place_pod() const;
  void create_pod(std::size_t node);
  void start_container(std::size_t pod);
  void restart_container(std::size_t pod);
  void handle_sandbox_lost(std::size_t pod);
  void evict_pods_on(std::size_t node);
  void reclassify();
  void own(std::size_t pod, EventHandle h);
  void cancel_owned(std::size_t pod);

  Engine& engine_;
  ConfigProfile profile_;
  std::size_t max_pods_per_node_;
  DeploymentSpec deployment_;
  std::vector<NodeState> nodes_;
  std::vector<PodState> pods_;
  ServiceState service_;
  std::vector<std::vector<EventHandle>> pod_events_;
  std::vector<EventHandle> node_ticks_;  // two per node: heartbeat, sync
  std::unordered_map<std::size_t, EventHandle> pending_add_;
  std::unordered_map<std::size_t, EventHandle> pending_remove_;
};

// Engine plus cluster, built together from one seed.
class Simulation {
 public:
  Simulation(ClusterOptions options, std::uint64_t seed);

  Engine& engine() { return engine_; }
  Cluster& cluster() { return cluster_; }
  const Cluster& cluster() const { return cluster_; }

  // Runs until the cluster settles with nothing but periodic ticks queued,
  // or until the horizon.
  Trace run_to_quiescence(std::optional<SimTime> horizon = std::nullopt);

 private:
  Engine engine_;
  Cluster cluster_;
};

}  // namespace availsim
