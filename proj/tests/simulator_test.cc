// Copyright 2026 The ecoroute Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "ecoroute/error.h"
#include "ecoroute/experiment.h"
#include "ecoroute/model_catalog.h"
#include "ecoroute/simulator.h"

namespace ecoroute::sim {
namespace {

using scheduler::Mode;

NodeSpec Node(std::string id, double cpu, double mem, double grams,
              carbon::PowerModel power = experiment::CalibratedPowerModel()) {
  NodeSpec n;
  n.id = std::move(id);
  n.cpu_quota = cpu;
  n.mem_gb = mem;
  n.intensity = carbon::CarbonIntensity{grams, ""};
  n.power = power;
  return n;
}

std::vector<NodeSpec> ThreeNodes() { return experiment::DefaultConfig().nodes; }

Workload Work(std::int64_t iterations = 50) {
  Workload w;
  w.model_id = "MobileNetV2";
  w.iterations = iterations;
  return w;
}

std::vector<double> UsagePercent(const SimResult &r) {
  std::vector<double> pct;
  for (const auto &u : r.usage) pct.push_back(u.percent);
  return pct;
}

TEST(ExecutionTimeTest, Examples) {
  const auto model = partitioner::MobileNetV2();
  EXPECT_DOUBLE_EQ(ExecutionTimeMs(model, Node("a", 1.0, 1, 0), 0.0), 254.85);
  EXPECT_NEAR(ExecutionTimeMs(model, Node("a", 1.0, 1, 0), 0.0674), 272.02, 0.01);
  auto m = model;
  m.base_latency_ms = 100;
  EXPECT_DOUBLE_EQ(ExecutionTimeMs(m, Node("a", 0.5, 1, 0), 0.0), 200);
}

TEST(RunWorkloadTest, ModeRoutingOnThreeNodes) {
  const auto nodes = ThreeNodes();
  const auto model = partitioner::MobileNetV2();
  EXPECT_EQ(UsagePercent(RunWorkload(nodes, model, Work(), Mode::Green())),
            (std::vector<double>{0, 0, 100}));
  EXPECT_EQ(UsagePercent(RunWorkload(nodes, model, Work(), Mode::Performance())),
            (std::vector<double>{100, 0, 0}));
  EXPECT_EQ(UsagePercent(RunWorkload(nodes, model, Work(), Mode::Balanced())),
            (std::vector<double>{100, 0, 0}));
}

TEST(RunWorkloadTest, MonolithicClosedForm) {
  const carbon::PowerModel power{3, 50, 0.375};
  const std::vector<NodeSpec> nodes{Node("mono", 0.8, 2, 470, power)};
  const auto model = partitioner::EfficientNetB0();
  const auto r =
      RunWorkload(nodes, model, Work(20), Baseline{BaselineKind::kMonolithic, "mono"});
  const double p = 3 + 50 * 0.8 + 0.375 * 2;
  const double t = model.base_latency_ms / 0.8;
  EXPECT_DOUBLE_EQ(r.grams_per_inference, p * t * 470 / 3.6e9);
  EXPECT_DOUBLE_EQ(r.mean_latency_ms, t);
  for (const auto &task : r.tasks) EXPECT_FALSE(task.breakdown);
  EXPECT_TRUE(r.overhead_samples_ms.empty());
  EXPECT_THROW(RunWorkload(nodes, model, Work(), Baseline{BaselineKind::kMonolithic, "other"}),
               InvalidInput);
}

TEST(RunWorkloadTest, ConservationAndLittlesLaw) {
  const auto nodes = ThreeNodes();
  for (const auto &policy : std::vector<Policy>{Mode::Green(), Mode::Performance(),
                                                Baseline{BaselineKind::kRoundRobinNoCarbon, ""}}) {
    const auto r = RunWorkload(nodes, partitioner::MobileNetV4Small(), Work(), policy);
    double energy = 0, grams = 0;
    for (const auto &t : r.tasks) {
      energy += t.energy_kwh;
      grams += t.grams_co2;
    }
    EXPECT_NEAR(r.total_energy_kwh, energy, 1e-9 * energy);
    EXPECT_NEAR(r.total_grams, grams, 1e-9 * grams);
    double usage_energy = 0;
    for (const auto &u : r.usage) usage_energy += u.energy_kwh;
    EXPECT_NEAR(usage_energy, energy, 1e-9 * energy);
    EXPECT_NEAR(r.throughput_rps * r.mean_latency_ms, 1000.0, 10.0);
    EXPECT_NEAR(r.carbon_efficiency, static_cast<double>(r.inferences) / r.total_grams,
                1e-9 * r.carbon_efficiency);
  }
}

TEST(RunWorkloadTest, SeededRunsAreIdentical) {
  auto w = Work(40);
  w.arrival = ArrivalKind::kPoisson;
  w.poisson_rate_per_s = 6;
  w.seed = 1234;
  const auto nodes = ThreeNodes();
  const auto a = RunWorkload(nodes, partitioner::MobileNetV2(), w, Mode::Balanced());
  const auto b = RunWorkload(nodes, partitioner::MobileNetV2(), w, Mode::Balanced());
  EXPECT_TRUE(a.SameOutcome(b));
  w.seed = 4321;
  const auto c = RunWorkload(nodes, partitioner::MobileNetV2(), w, Mode::Balanced());
  EXPECT_NE(a.tasks.back().arrival_ms, c.tasks.back().arrival_ms);
}

TEST(RunWorkloadTest, PoissonArrivalsOverlap) {
  auto w = Work(200);
  w.arrival = ArrivalKind::kPoisson;
  w.poisson_rate_per_s = 20;
  const auto r = RunWorkload(ThreeNodes(), partitioner::MobileNetV2(), w, Mode::Balanced());
  EXPECT_EQ(r.completed + r.rejected, 200);
  int busy_nodes = 0;
  for (const auto &u : r.usage) busy_nodes += u.tasks > 0;
  EXPECT_GT(busy_nodes, 1);
  EXPECT_NEAR(r.tasks.back().arrival_ms / 1000.0, 200.0 / 20.0, 3.0);
}

TEST(RunWorkloadTest, EqualPowerReductionIsIntensityRatio) {
  const carbon::PowerModel power{0, 100, 0.375};
  const std::vector<NodeSpec> pool{Node("high", 1, 1, 620, power), Node("mid", 1, 1, 530, power),
                                   Node("low", 1, 1, 380, power)};
  const std::vector<NodeSpec> mono{Node("mono", 1, 1, 530, power)};
  SimOptions options;
  options.overhead_frac = 0;
  const auto model = partitioner::MobileNetV2();
  const auto green = RunWorkload(pool, model, Work(), Mode::Green(), options);
  const auto base =
      RunWorkload(mono, model, Work(), Baseline{BaselineKind::kMonolithic, "mono"}, options);
  EXPECT_NEAR(CarbonReduction(green, base), (530.0 - 380.0) / 530.0 * 100.0, 1e-9);
  EXPECT_NEAR(CarbonReduction(green, base), 28.30, 0.01);
}

TEST(RunWorkloadTest, IdenticalNodesTieToFirst) {
  const std::vector<NodeSpec> nodes{Node("first", 1, 1, 500), Node("second", 1, 1, 500)};
  const auto r = RunWorkload(nodes, partitioner::MobileNetV2(), Work(), Mode::Performance());
  EXPECT_EQ(r.usage[0].tasks, 50);
  EXPECT_EQ(r.usage[1].tasks, 0);
}

TEST(RunWorkloadTest, SingleNodeMakesModesIdentical) {
  const std::vector<NodeSpec> nodes{Node("solo", 1, 1, 450)};
  const auto model = partitioner::MobileNetV2();
  const auto perf = RunWorkload(nodes, model, Work(), Mode::Performance());
  const auto green = RunWorkload(nodes, model, Work(), Mode::Green());
  EXPECT_EQ(perf.grams_per_inference, green.grams_per_inference);
  EXPECT_EQ(perf.mean_latency_ms, green.mean_latency_ms);
}

TEST(RunWorkloadTest, RejectedTasksAreRecorded) {
  const std::vector<NodeSpec> nodes{Node("tiny", 1, 1, 450)};
  auto w = Work(5);
  w.required_cpu = 2.0;
  const auto r = RunWorkload(nodes, partitioner::MobileNetV2(), w, Mode::Green());
  EXPECT_EQ(r.rejected, 5);
  EXPECT_EQ(r.completed, 0);
  EXPECT_EQ(r.carbon_efficiency, 0.0);
  for (const auto &t : r.tasks) EXPECT_TRUE(t.rejected);
}

TEST(RunWorkloadTest, RoundRobinCyclesThroughNodes) {
  const auto r = RunWorkload(ThreeNodes(), partitioner::MobileNetV2(), Work(6),
                             Baseline{BaselineKind::kRoundRobinNoCarbon, ""});
  EXPECT_EQ(r.tasks[0].node_id, "Node-High");
  EXPECT_EQ(r.tasks[1].node_id, "Node-Medium");
  EXPECT_EQ(r.tasks[2].node_id, "Node-Green");
  EXPECT_EQ(r.tasks[3].node_id, "Node-High");
  EXPECT_EQ(r.label, "RoundRobin-NoCarbon");
}

TEST(RunWorkloadTest, BatchScalesPerInferenceMetrics) {
  const std::vector<NodeSpec> nodes{Node("mono", 1, 1, 530)};
  auto w = Work(10);
  const auto single = RunWorkload(nodes, partitioner::MobileNetV2(), w,
                                  Baseline{BaselineKind::kMonolithic, "mono"});
  w.batch_size = 4;
  const auto batched = RunWorkload(nodes, partitioner::MobileNetV2(), w,
                                   Baseline{BaselineKind::kMonolithic, "mono"});
  EXPECT_EQ(batched.inferences, 40);
  EXPECT_DOUBLE_EQ(batched.grams_per_inference, single.grams_per_inference);
  EXPECT_DOUBLE_EQ(batched.mean_latency_ms, 4 * single.mean_latency_ms);
}

TEST(RunWorkloadTest, ColdStartWithoutWarmup) {
  auto w = Work();
  w.warmup_per_node = 0;
  const auto r = RunWorkload(ThreeNodes(), partitioner::MobileNetV2(), w, Mode::Green());
  // The first decision sees identical, untouched history on every node.
  ASSERT_TRUE(r.tasks[0].breakdown);
  EXPECT_EQ(r.tasks[0].breakdown->performance, 1.0);
  EXPECT_EQ(r.tasks[0].breakdown->carbon, 1.0);
}

TEST(RunWorkloadTest, HostEnergyIsApportioned) {
  const auto r = RunWorkload(ThreeNodes(), partitioner::MobileNetV2(), Work(), Mode::Green());
  EXPECT_EQ(r.host_energy.source, carbon::EnergySource::kMeasuredTrace);
  EXPECT_GT(r.host_energy.kwh, 0.0);
  double sum = 0;
  for (const auto &u : r.usage) sum += u.apportioned_kwh;
  EXPECT_NEAR(sum, r.host_energy.kwh, 1e-12 * r.host_energy.kwh);
  EXPECT_DOUBLE_EQ(r.usage[0].apportioned_kwh, 0.5 * r.host_energy.kwh);
}

TEST(CarbonReductionTest, Examples) {
  EXPECT_NEAR(CarbonReduction(0.0041, 0.0053), 22.64, 0.01);
  EXPECT_EQ(CarbonReduction(0.0053, 0.0053), 0.0);
  EXPECT_NEAR(CarbonReduction(0.0067, 0.0053), -26.42, 0.01);
  EXPECT_THROW(CarbonReduction(0.001, 0.0), InvalidInput);
}

TEST(OverheadTest, OneSamplePerDecision) {
  const std::vector<NodeSpec> nodes{Node("solo", 1, 1, 450)};
  const auto one = RunWorkload(nodes, partitioner::MobileNetV2(), Work(1), Mode::Green());
  ASSERT_EQ(one.overhead_samples_ms.size(), 1u);
  EXPECT_GE(MeasureSchedulingOverhead(one), 0.0);
  const auto fifty = RunWorkload(nodes, partitioner::MobileNetV2(), Work(), Mode::Green());
  EXPECT_EQ(fifty.overhead_samples_ms.size(), 50u);
  const auto mono = RunWorkload(nodes, partitioner::MobileNetV2(), Work(),
                                Baseline{BaselineKind::kMonolithic, "solo"});
  EXPECT_THROW(MeasureSchedulingOverhead(mono), InvalidInput);
}

}  // namespace
}  // namespace ecoroute::sim
