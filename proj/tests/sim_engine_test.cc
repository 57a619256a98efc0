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

#include <functional>
#include <random>
#include <string>
#include <vector>

#include <gtest/gtest.h>

namespace availsim {
namespace {

TEST(EngineTest, EventFiresAtScheduledTime) {
  Engine engine(1);
  SimTime fired_at(-1.0);
  engine.schedule(EventKind::HeartbeatPosted, "node-1", SimTime(10.0),
                  [&] { fired_at = engine.now(); });
  const Trace trace = engine.run();
  EXPECT_EQ(fired_at, SimTime(10.0));
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].kind, EventKind::HeartbeatPosted);
  EXPECT_EQ(trace.records[0].subject, "node-1");
  EXPECT_EQ(trace.records[0].time, SimTime(10.0));
}

TEST(EngineTest, EqualTimesRunInSchedulingOrder) {
  Engine engine(1);
  std::vector<std::string> order;
  engine.schedule(EventKind::Timer, "A", SimTime(5.0), [&] { order.push_back("A"); });
  engine.schedule(EventKind::Timer, "B", SimTime(5.0), [&] { order.push_back("B"); });
  engine.run();
  EXPECT_EQ(order, (std::vector<std::string>{"A", "B"}));
}

TEST(EngineTest, SchedulingInThePastIsRejected) {
  Engine engine(1);
  engine.schedule(EventKind::Timer, "t", SimTime(4.0));
  engine.run();
  ASSERT_EQ(engine.now(), SimTime(4.0));
  EXPECT_THROW(engine.schedule(EventKind::Timer, "late", SimTime(3.0)),
               SchedulingError);
  EXPECT_NO_THROW(engine.schedule(EventKind::Timer, "now", SimTime(4.0)));
}

TEST(EngineTest, CancelSemantics) {
  Engine engine(1);
  auto pending = engine.schedule(EventKind::HeartbeatPosted, "n", SimTime(1.0));
  auto fired = engine.schedule(EventKind::Timer, "f", SimTime(0.5));
  engine.run(RunBounds{SimTime(0.75), {}});

  EXPECT_FALSE(engine.cancel(fired));
  EXPECT_TRUE(engine.cancel(pending));
  EXPECT_FALSE(engine.cancel(pending));

  const Trace trace = engine.run();
  ASSERT_EQ(trace.records.size(), 1u);
  EXPECT_EQ(trace.records[0].subject, "f");
}

TEST(EngineTest, EmptyQueueYieldsEmptyTrace) {
  Engine engine(3);
  const Trace trace = engine.run();
  EXPECT_TRUE(trace.records.empty());
  EXPECT_EQ(engine.now(), SimTime(0.0));
  EXPECT_EQ(trace.seed, 3u);
}

TEST(EngineTest, SelfReschedulingTickStopsAtBound) {
  Engine engine(1);
  std::function<void()> tick = [&] {
    engine.schedule_after(EventKind::HeartbeatPosted, "node-1", 10.0, tick);
  };
  engine.schedule(EventKind::HeartbeatPosted, "node-1", SimTime(10.0), tick);
  const Trace trace = engine.run(RunBounds{SimTime(25.0), {}});
  ASSERT_EQ(trace.records.size(), 2u);
  EXPECT_EQ(trace.records[0].time, SimTime(10.0));
  EXPECT_EQ(trace.records[1].time, SimTime(20.0));
}

TEST(EngineTest, EventLimitSignalsRunaway) {
  Engine engine(1, 100);
  std::function<void()> spin = [&] {
    engine.schedule_after(EventKind::Timer, "spin", 0.0, spin);
  };
  engine.schedule(EventKind::Timer, "spin", SimTime(0.0), spin);
  EXPECT_THROW(engine.run(), NonTerminatingRun);
}

TEST(EngineTest, SettledPredicateIgnoresBackgroundTicks) {
  Engine engine(1);
  std::function<void()> tick = [&] {
    engine.schedule_after(EventKind::KubeletSync, "n", 1.0, tick, {}, true);
  };
  engine.schedule(EventKind::KubeletSync, "n", SimTime(0.0), tick, {}, true);
  bool done = false;
  engine.schedule(EventKind::Timer, "work", SimTime(3.5), [&] { done = true; });
  engine.run(RunBounds{std::nullopt, [&] { return done; }});
  EXPECT_TRUE(done);
  EXPECT_EQ(engine.now(), SimTime(3.5));
  EXPECT_EQ(engine.queued_foreground(), 0u);
  EXPECT_EQ(engine.queued(), 1u);
}

TEST(EngineTest, JitterStaysInsideEnvelope) {
  Engine engine(11);
  for (int i = 0; i < 1000; ++i) {
    const double v = engine.jittered(2.0, 0.1);
    EXPECT_GE(v, 1.8);
    EXPECT_LT(v, 2.2);
  }
  EXPECT_EQ(engine.jittered(0.7, 0.0), 0.7);
}

// Random interleavings of schedule/cancel: dispatch order is (time, seq),
// the clock never goes backwards, and exactly the uncancelled events fire.
TEST(EngineProperty, DispatchOrderAndExactlyOnce) {
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    std::mt19937_64 gen(seed);
    Engine engine(seed);
    std::vector<EventHandle> handles;
    std::vector<bool> cancelled;
    std::vector<int> fired;
    for (int i = 0; i < 200; ++i) {
      const double at = std::uniform_int_distribution<int>(0, 40)(gen) * 0.5;
      handles.push_back(engine.schedule(EventKind::Timer, std::to_string(i),
                                        SimTime(at), [&fired, i] { fired.push_back(i); }));
      cancelled.push_back(false);
    }
    for (int i = 0; i < 60; ++i) {
      const auto k = std::uniform_int_distribution<std::size_t>(0, 199)(gen);
      const bool first = !cancelled[k];
      EXPECT_EQ(engine.cancel(handles[k]), first);
      cancelled[k] = true;
    }
    const Trace trace = engine.run();

    std::size_t expected = 0;
    for (bool c : cancelled) expected += c ? 0 : 1;
    ASSERT_EQ(fired.size(), expected);
    ASSERT_EQ(trace.records.size(), expected);
    for (std::size_t i = 1; i < trace.records.size(); ++i) {
      const auto& a = trace.records[i - 1];
      const auto& b = trace.records[i];
      ASSERT_LE(a.time, b.time);
      ASSERT_LT(a.seq, b.seq);
      if (a.time == b.time) {
        ASSERT_LT(std::stoi(a.subject), std::stoi(b.subject));
      }
    }
    for (int i : fired) ASSERT_FALSE(cancelled[i]);
  }
}

TEST(EngineProperty, SameSeedSameTrace) {
  auto run = [](std::uint64_t seed) {
    Engine engine(seed);
    std::function<void()> tick = [&] {
      engine.record(EventKind::Timer, "draw",
                    std::to_string(engine.uniform(0.0, 1.0)));
      if (engine.now() < SimTime(50.0)) {
        engine.schedule_after(EventKind::Timer, "t", engine.jittered(1.0, 0.5), tick);
      }
    };
    engine.schedule(EventKind::Timer, "t", SimTime(0.0), tick);
    return engine.run().serialize();
  };
  EXPECT_EQ(run(9), run(9));
  EXPECT_NE(run(9), run(10));
}

}  // namespace
}  // namespace availsim
