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

#include <gtest/gtest.h>

#include "trace_query.h"

namespace availsim {
namespace {

using testing::first_of;

ClusterOptions two_workers(std::size_t replicas = 1) {
  ClusterOptions o;
  o.replicas = replicas;
  return o;
}

TEST(FailureKindTest, CliNamesRoundTrip) {
  for (auto k : {FailureKind::AppContainerKill, FailureKind::PodSandboxKill,
                 FailureKind::NodeCrash}) {
    EXPECT_EQ(parse_failure_kind(to_cli_name(k)), k);
  }
  EXPECT_EQ(to_cli_name(FailureKind::PodSandboxKill), "pod-container");
  EXPECT_FALSE(parse_failure_kind("vm"));
}

TEST(InjectTest, AppContainerKillRecordsFailureAndDeath) {
  Simulation sim(two_workers(), 4);
  inject(FailureScenario::of(FailureKind::AppContainerKill, SimTime(100.0)),
         sim.cluster());
  const Trace t = sim.run_to_quiescence(SimTime(1000.0));
  const auto f = first_of(t, EventKind::FailureInjected);
  const auto d = first_of(t, EventKind::ContainerDied);
  ASSERT_TRUE(f && d);
  EXPECT_EQ(f->time, SimTime(100.0));
  EXPECT_EQ(f->subject, "pod-1");
  EXPECT_EQ(f->detail, "app-container");
  EXPECT_EQ(d->time, SimTime(100.0));
  EXPECT_EQ(d->detail, "app");
  // Detection waits for the next kubelet sync of the pod's node.
  const auto& node = sim.cluster().nodes()[sim.cluster().pods()[0].node];
  const auto sync = first_of(t, EventKind::KubeletSync, node.id, SimTime(100.0));
  const auto removed = first_of(t, EventKind::EndpointRemoved, "pod-1");
  ASSERT_TRUE(sync && removed);
  EXPECT_LE(sync->time, removed->time);
  EXPECT_LT(removed->time.seconds, 101.1);
}

TEST(InjectTest, NodeCrashSilencesHeartbeats) {
  Simulation sim(two_workers(), 4);
  inject(FailureScenario::of(FailureKind::NodeCrash, SimTime(50.0)), sim.cluster());
  const Trace t = sim.run_to_quiescence(SimTime(2000.0));
  const auto f = first_of(t, EventKind::FailureInjected);
  ASSERT_TRUE(f);
  const std::string node = f->subject;
  EXPECT_EQ(f->detail, "node");
  for (const auto* r : t.of_kind(EventKind::HeartbeatPosted)) {
    if (r->subject == node) {
      EXPECT_LT(r->time.seconds, 50.0);
    }
  }
  EXPECT_TRUE(first_of(t, EventKind::NodeMarkedNotReady, node));
}

TEST(InjectTest, ExplicitTargets) {
  Simulation sim(two_workers(2), 4);
  FailureScenario s{FailureKind::PodSandboxKill, ExplicitTarget{"pod-2"},
                    SimTime(10.0)};
  inject(s, sim.cluster());
  const Trace t = sim.run_to_quiescence(SimTime(1000.0));
  const auto d = first_of(t, EventKind::ContainerDied);
  ASSERT_TRUE(d);
  EXPECT_EQ(d->subject, "pod-2");
  EXPECT_EQ(d->detail, "sandbox");
}

TEST(InjectTest, RejectsBadTargets) {
  Simulation sim(two_workers(), 4);
  auto& c = sim.cluster();
  EXPECT_THROW(inject({FailureKind::NodeCrash, FirstPod{}, SimTime(5.0)}, c),
               InjectionError);
  EXPECT_THROW(
      inject({FailureKind::AppContainerKill, NodeHostingFirstPod{}, SimTime(5.0)}, c),
      InjectionError);
  EXPECT_THROW(
      inject({FailureKind::AppContainerKill, ExplicitTarget{"pod-9"}, SimTime(5.0)}, c),
      InjectionError);
  EXPECT_THROW(
      inject({FailureKind::NodeCrash, ExplicitTarget{"node-9"}, SimTime(5.0)}, c),
      InjectionError);
}

TEST(InjectTest, RejectsPastInjection) {
  Simulation sim(two_workers(), 4);
  sim.engine().run(RunBounds{SimTime(20.0), {}});
  EXPECT_THROW(
      inject(FailureScenario::of(FailureKind::AppContainerKill, SimTime(10.0)),
             sim.cluster()),
      InjectionError);
}

TEST(InjectTest, SecondInjectionOnDeadTargetFails) {
  Simulation sim(two_workers(), 4);
  const auto s = FailureScenario::of(FailureKind::AppContainerKill, SimTime(30.0));
  inject(s, sim.cluster());
  EXPECT_THROW(inject(s, sim.cluster()), InjectionError);

  Simulation crashed(two_workers(), 4);
  const auto n = FailureScenario::of(FailureKind::NodeCrash, SimTime(30.0));
  inject(n, crashed.cluster());
  crashed.engine().run(RunBounds{SimTime(31.0), {}});
  EXPECT_THROW(
      inject({FailureKind::NodeCrash, ExplicitTarget{"node-1"}, SimTime(40.0)},
             crashed.cluster()),
      InjectionError);
}

}  // namespace
}  // namespace availsim
