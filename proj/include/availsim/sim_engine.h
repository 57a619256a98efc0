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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace availsim {

// Virtual time in seconds since the start of a run.
struct SimTime {
  double seconds = 0.0;

  constexpr SimTime() = default;
  constexpr explicit SimTime(double s) : seconds(s) {}

  friend constexpr auto operator<=>(SimTime, SimTime) = default;
  friend constexpr SimTime operator+(SimTime t, double d) { return SimTime(t.seconds + d); }
  friend constexpr double operator-(SimTime a, SimTime b) { return a.seconds - b.seconds; }
};

enum class EventKind {
  FailureInjected,
  ContainerDied,
  EndpointRemoved,
  EndpointAdded,
  NodeMarkedNotReady,
  PodScheduledForTermination,
  PodTerminated,
  PodCreated,
  ContainerStarted,
  StreamStarted,
  PodReady,
  HeartbeatPosted,
  ServiceStateChanged,
  // Periodic control-loop wakeups. They carry no state change of their own
  // but are traced so that every dispatched event appears in the log.
  KubeletSync,
  NodeMonitor,
  // Timer that fires a deferred action (eviction, restart bookkeeping).
  Timer,
};

std::string_view to_string(EventKind kind);

struct EventRecord {
  SimTime time;
  std::uint64_t seq = 0;
  EventKind kind = EventKind::Timer;
  std::string subject;
  std::string detail;

  bool operator==(const EventRecord&) const = default;
};

struct Trace {
  std::vector<EventRecord> records;
  std::uint64_t seed = 0;

  // Records of one kind, in trace order.
  std::vector<const EventRecord*> of_kind(EventKind kind) const;

  // One line per record: "<time %.9f> <seq> <kind> <subject> <detail>".
  std::string serialize() const;
};

struct EventHandle {
  std::uint64_t seq = 0;
  bool operator==(const EventHandle&) const = default;
};

class SchedulingError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

// Thrown when a run dispatches more events than the configured limit.
class NonTerminatingRun : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunBounds {
  std::optional<SimTime> until;
  // Checked whenever only background events remain queued; returning true
  // ends the run.
  std::function<bool()> settled;
};

// Single-threaded discrete-event core. Events execute in (time, seq) order;
// each dispatched event is appended to the trace before its action runs.
class Engine {
 public:
  using Action = std::function<void()>;

  explicit Engine(std::uint64_t seed, std::size_t event_limit = 2'000'000);

  Engine(const Engine&) = delete;
  Engine& operator=(const Engine&) = delete;

  // Background events are periodic ticks: they never keep a run alive on
  // their own when a settled predicate is supplied.
  EventHandle schedule(EventKind kind, std::string subject, SimTime at,
                       Action action = {}, std::string detail = {},
                       bool background = false);
  EventHandle schedule_after(EventKind kind, std::string subject, double delay,
                             Action action = {}, std::string detail = {},
                             bool background = false);

  bool cancel(EventHandle handle);
  bool pending(EventHandle handle) const;

  // Appends a record at the current time without going through the queue.
  void record(EventKind kind, std::string subject, std::string detail = {});

  Trace run(const RunBounds& bounds = {});

  SimTime now() const { return now_; }
  std::uint64_t seed() const { return seed_; }
  std::size_t queued() const { return queue_.size(); }
  std::size_t queued_foreground() const { return foreground_; }
  const Trace& trace() const { return trace_; }

  // Uniform draw in [lo, hi).
  double uniform(double lo, double hi);
  // nominal * (1 + U(-fraction, +fraction)); exact when fraction is zero.
  double jittered(double nominal, double fraction);

 private:
  struct Key {
    SimTime time;
    std::uint64_t seq;
    auto operator<=>(const Key&) const = default;
  };
  struct Pending {
    EventKind kind;
    std::string subject;
    std::string detail;
    Action action;
    bool background;
  };

  std::uint64_t seed_;
  std::size_t event_limit_;
  std::size_t dispatched_ = 0;
  std::uint64_t next_seq_ = 0;
  std::size_t foreground_ = 0;
  SimTime now_;
  std::map<Key, Pending> queue_;
  std::unordered_map<std::uint64_t, SimTime> index_;
  std::mt19937_64 rng_;
  Trace trace_;
};

}  // namespace availsim
