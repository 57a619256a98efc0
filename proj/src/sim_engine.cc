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

#include "availsim/sim_engine.h"

#include <cmath>

#include <fmt/format.h>

namespace availsim {

std::string_view to_string(EventKind kind) {
  switch (kind) {
    case EventKind::FailureInjected: return "FailureInjected";
    case EventKind::ContainerDied: return "ContainerDied";
    case EventKind::EndpointRemoved: return "EndpointRemoved";
    case EventKind::EndpointAdded: return "EndpointAdded";
    case EventKind::NodeMarkedNotReady: return "NodeMarkedNotReady";
    case EventKind::PodScheduledForTermination: return "PodScheduledForTermination";
    case EventKind::PodTerminated: return "PodTerminated";
    case EventKind::PodCreated: return "PodCreated";
    case EventKind::ContainerStarted: return "ContainerStarted";
    case EventKind::StreamStarted: return "StreamStarted";
    case EventKind::PodReady: return "PodReady";
    case EventKind::HeartbeatPosted: return "HeartbeatPosted";
    case EventKind::ServiceStateChanged: return "ServiceStateChanged";
    case EventKind::KubeletSync: return "KubeletSync";
    case EventKind::NodeMonitor: return "NodeMonitor";
    case EventKind::Timer: return "Timer";
  }
  return "Unknown";
}

std::vector<const EventRecord*> Trace::of_kind(EventKind kind) const {
  std::vector<const EventRecord*> out;
  for (const auto& r : records) {
    if (r.kind == kind) out.push_back(&r);
  }
  return out;
}

std::string Trace::serialize() const {
  std::string out = fmt::format("# seed {}\n", seed);
  for (const auto& r : records) {
    out += fmt::format("{:.9f} {} {} {} {}\n", r.time.seconds, r.seq,
                       to_string(r.kind), r.subject, r.detail);
  }
  return out;
}

Engine::Engine(std::uint64_t seed, std::size_t event_limit)
    : seed_(seed), event_limit_(event_limit), rng_(seed) {
  trace_.seed = seed;
}

EventHandle Engine::schedule(EventKind kind, std::string subject, SimTime at,
                             Action action, std::string detail,
                             bool background) {
  if (!std::isfinite(at.seconds) || at < now_) {
    throw SchedulingError(fmt::format(
        "cannot schedule {} at t={} (clock is at t={})", to_string(kind),
        at.seconds, now_.seconds));
  }
  const std::uint64_t seq = next_seq_++;
  queue_.emplace(Key{at, seq}, Pending{kind, std::move(subject),
                                       std::move(detail), std::move(action),
                                       background});
  index_.emplace(seq, at);
  if (!background) ++foreground_;
  return EventHandle{seq};
}

EventHandle Engine::schedule_after(EventKind kind, std::string subject,
                                   double delay, Action action,
                                   std::string detail, bool background) {
  return schedule(kind, std::move(subject), now_ + delay, std::move(action),
                  std::move(detail), background);
}

bool Engine::cancel(EventHandle handle) {
  auto it = index_.find(handle.seq);
  if (it == index_.end()) return false;
  auto q = queue_.find(Key{it->second, handle.seq});
  if (!q->second.background) --foreground_;
  queue_.erase(q);
  index_.erase(it);
  return true;
}

bool Engine::pending(EventHandle handle) const {
  return index_.contains(handle.seq);
}

void Engine::record(EventKind kind, std::string subject, std::string detail) {
  trace_.records.push_back(EventRecord{now_, trace_.records.size(), kind,
                                       std::move(subject), std::move(detail)});
}

Trace Engine::run(const RunBounds& bounds) {
  while (!queue_.empty()) {
    if (bounds.settled && foreground_ == 0 && bounds.settled()) break;
    auto it = queue_.begin();
    if (bounds.until && it->first.time > *bounds.until) break;
    if (++dispatched_ > event_limit_) {
      throw NonTerminatingRun(fmt::format(
          "event limit {} exceeded at t={} (seed {})", event_limit_,
          now_.seconds, seed_));
    }
    now_ = it->first.time;
    Pending ev = std::move(it->second);
    index_.erase(it->first.seq);
    queue_.erase(it);
    if (!ev.background) --foreground_;
    record(ev.kind, std::move(ev.subject), std::move(ev.detail));
    if (ev.action) ev.action();
  }
  return trace_;
}

double Engine::uniform(double lo, double hi) {
  if (hi <= lo) return lo;
  std::uniform_real_distribution<double> dist(lo, hi);
  return dist(rng_);
}

double Engine::jittered(double nominal, double fraction) {
  if (fraction == 0.0 || nominal == 0.0) return nominal;
  return nominal * (1.0 + uniform(-fraction, fraction));
}

}  // namespace availsim
