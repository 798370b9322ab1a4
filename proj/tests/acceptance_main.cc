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

// Acceptance gate: one line per criterion, nonzero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "ecoroute/carbon.h"
#include "ecoroute/experiment.h"
#include "ecoroute/model_catalog.h"
#include "ecoroute/partitioner.h"
#include "ecoroute/scheduler.h"
#include "ecoroute/simulator.h"
#include "oracles.h"

namespace {

using namespace ecoroute;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

std::vector<double> Usage(const sim::SimResult &r) {
  std::vector<double> pct;
  for (const auto &u : r.usage) pct.push_back(u.percent);
  return pct;
}

Outcome RoutingReproduction() {
  const auto start = std::chrono::steady_clock::now();
  const auto config = experiment::DefaultConfig();
  const auto &model = config.Model("MobileNetV2");
  const std::vector<std::pair<scheduler::Mode, std::vector<double>>> expected{
      {scheduler::Mode::Performance(), {100, 0, 0}},
      {scheduler::Mode::Balanced(), {100, 0, 0}},
      {scheduler::Mode::Green(), {0, 0, 100}}};
  bool ok = true;
  std::string detail;
  for (const auto &[mode, want] : expected) {
    const auto r = sim::RunWorkload(config.nodes, model, config.workload, mode, config.sim);
    const auto got = Usage(r);
    ok = ok && got == want && r.completed == 50;
    detail += fmt::format("{}={{{}}} ", mode.name, fmt::join(got, ","));
  }
  const double elapsed = Seconds(start);
  ok = ok && elapsed < 1.0;
  return {ok, fmt::format("{}in {:.3f} s", detail, elapsed)};
}

Outcome SweepTransition() {
  const auto start = std::chrono::steady_clock::now();
  auto config = experiment::DefaultConfig();
  config.sweep = experiment::SweepSpec{experiment::SweepGrid(0.05),
                                       experiment::Redistribution::kProportional};
  const auto report = experiment::RunSweep(config);
  const double elapsed = Seconds(start);
  const auto &s = *report.sweep_summary;
  const bool ok = s.lowest_intensity_node == "Node-Green" && s.transition_w_c &&
                  *s.transition_w_c >= 0.40 - 1e-9 && *s.transition_w_c <= 0.60 + 1e-9 &&
                  s.upward_closed && elapsed < 5.0;
  return {ok, fmt::format("w_c*={} upward_closed={} points={} in {:.3f} s",
                          s.transition_w_c ? fmt::format("{}", *s.transition_w_c) : "none",
                          s.upward_closed, report.sweep.size(), elapsed)};
}

Outcome CarbonReductionIdentity() {
  // Equal power and latency everywhere: only intensity differs.
  const carbon::PowerModel power{0, 120, 0.375};
  auto node = [&](std::string id, double grams) {
    NodeSpec n;
    n.id = std::move(id);
    n.intensity = carbon::CarbonIntensity{grams, ""};
    n.power = power;
    return n;
  };
  const std::vector<NodeSpec> pool{node("high", 620), node("mid", 530), node("low", 380)};
  const std::vector<NodeSpec> mono{node("mono", 530)};
  sim::SimOptions equal_latency;
  equal_latency.overhead_frac = 0.0;
  sim::Workload w;
  w.model_id = "MobileNetV2";
  const auto model = partitioner::MobileNetV2();
  const auto green = sim::RunWorkload(pool, model, w, scheduler::Mode::Green(), equal_latency);
  const auto base = sim::RunWorkload(mono, model, w,
                                     sim::Baseline{sim::BaselineKind::kMonolithic, "mono"},
                                     equal_latency);
  const double identity = sim::CarbonReduction(green, base);
  bool ok = std::abs(identity - 28.30) <= 0.01;

  const auto report = experiment::RunCompare(experiment::DefaultConfig());
  std::string calibrated;
  for (const auto &row : report.rows) {
    if (row.configuration != "CE-Green") continue;
    ok = ok && row.reduction_pct && *row.reduction_pct >= 15.0 && *row.reduction_pct <= 35.0;
    calibrated += fmt::format(" {}={:.2f}%", row.model_id, row.reduction_pct.value_or(NAN));
  }
  return {ok, fmt::format("equal-power {:.4f}%; calibrated Green:{}", identity, calibrated)};
}

Outcome SchedulingOverhead() {
  const auto config = experiment::DefaultConfig();
  auto w = config.workload;
  w.iterations = 1000;
  const auto r = sim::RunWorkload(config.nodes, config.Model("MobileNetV2"), w,
                                  scheduler::Mode::Balanced(), config.sim);
  const double mean = sim::MeasureSchedulingOverhead(r);
  const bool ok = r.overhead_samples_ms.size() == 1000 && mean < 1.0;
  return {ok, fmt::format("mean {:.5f} ms over {} decisions", mean, r.overhead_samples_ms.size())};
}

Outcome CarbonEfficiencyArithmetic() {
  auto config = experiment::DefaultConfig();
  config.sweep->carbon_weights = {0.0, 0.25, 0.5, 0.75, 1.0};
  auto results = experiment::RunCompare(config).results;
  for (auto &r : experiment::RunSweep(config).results) results.push_back(std::move(r));
  double worst = 0.0;
  for (const auto &r : results) {
    const double expected = static_cast<double>(r.inferences) / r.total_grams;
    worst = std::max(worst, std::abs(r.carbon_efficiency - expected) / expected);
  }
  const double fixture = 1.0 / 0.0041;
  const double reported = 245.8;
  const double gap = std::abs(fixture - reported) / reported;
  const bool ok = worst <= 1e-9 && gap <= 0.01;
  return {ok, fmt::format("{} runs, max rel err {:.2e}; 1/0.0041={:.1f} vs {} ({:.2f}%)",
                          results.size(), worst, fixture, reported, 100 * gap)};
}

Outcome EnergyIntegration() {
  std::mt19937_64 rng(6);
  std::uniform_real_distribution<double> coef(0.0, 300.0);
  std::uniform_real_distribution<double> step(0.001, 10.0);
  double worst = 0.0;
  for (int trial = 0; trial < 100; ++trial) {
    const double a = coef(rng);
    const double b = trial % 2 ? coef(rng) / 50.0 : 0.0;
    std::vector<carbon::PowerSample> trace;
    double t = step(rng);
    const double t0 = t;
    for (int i = 0; i < 2 + trial % 50; ++i, t += step(rng)) {
      const double p = a + b * t;
      trace.push_back({t, 0.25 * p, 0.5 * p, 0.25 * p});
    }
    const double expected = oracle::LinearEnergyKwh(a, b, t0, trace.back().timestamp_s);
    const double got = carbon::IntegrateEnergy(trace).kwh;
    worst = std::max(worst, std::abs(got - expected) / expected);
  }
  return {worst <= 1e-12, fmt::format("100 traces, max rel err {:.2e}", worst)};
}

Outcome PartitionerOracle() {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> cost(0, 25);
  std::uniform_int_distribution<int> act(0, 6);
  std::uniform_int_distribution<std::size_t> layers(1, 12);
  std::uniform_real_distribution<double> cap(0.1, 3.0);
  int mismatches = 0;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t L = layers(rng);
    const std::size_t K = std::uniform_int_distribution<std::size_t>(1, std::min<std::size_t>(4, L))(rng);
    std::vector<double> costs(L);
    std::vector<std::int64_t> acts(L);
    partitioner::ModelDescriptor model{"rand", "rand", {}, 1.0, true};
    for (std::size_t i = 0; i < L; ++i) {
      costs[i] = cost(rng);
      acts[i] = act(rng);
      model.layers.push_back(partitioner::LayerDescriptor::Other(
          "l", static_cast<std::int64_t>(costs[i]), acts[i]));
    }
    std::vector<double> caps(K);
    for (auto &c : caps) c = trial % 3 == 0 ? 1.0 : cap(rng);
    const auto plan = partitioner::PartitionModel(model, caps);
    const auto brute = oracle::BrutePartition(costs, acts, caps);
    std::vector<std::size_t> cuts;
    for (std::size_t i = 0; i + 1 < plan.segments.size(); ++i) cuts.push_back(plan.segments[i].end);
    if (plan.bottleneck != brute.bottleneck || cuts != brute.cuts ||
        plan.total_cut_activation != brute.comm) {
      ++mismatches;
    }
  }
  return {mismatches == 0, fmt::format("200 instances, {} mismatches", mismatches)};
}

Outcome ScoreProperties() {
  std::mt19937_64 rng(88);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int bound_violations = 0;
  int monotone_violations = 0;
  const std::vector<scheduler::ScoreWeights> presets{scheduler::Mode::Performance().weights,
                                                     scheduler::Mode::Green().weights,
                                                     scheduler::Mode::Balanced().weights};
  for (int trial = 0; trial < 1000; ++trial) {
    NodeSpec node;
    node.id = "n";
    node.cpu_quota = 0.05 + 2 * u(rng);
    node.mem_gb = 0.05 + 4 * u(rng);
    node.intensity.grams_per_kwh = 1000 * u(rng);
    node.power = carbon::PowerModel{30 * u(rng), 300 * u(rng), 0.375};
    scheduler::NodeStats stats;
    stats.cpu_in_use = u(rng) * node.cpu_quota;
    stats.mem_in_use_gb = u(rng) * node.mem_gb;
    stats.load = stats.cpu_in_use / node.cpu_quota;
    stats.avg_time_s = 3 * u(rng);
    stats.task_count = static_cast<std::int64_t>(10 * u(rng));
    const scheduler::TaskRequest task{0.2 * u(rng), 0.2 * u(rng)};
    scheduler::ScoreWeights w{u(rng), u(rng), u(rng), u(rng), u(rng)};
    const double sum = w.Sum();
    w = trial % 4 < 3 ? presets[trial % 4]
                      : scheduler::ScoreWeights{w.resource / sum, w.load / sum,
                                                w.performance / sum, w.balance / sum,
                                                w.carbon / sum};
    const auto b = scheduler::ScoreNode(node, stats, task, w);
    for (double s : {b.resource, b.load, b.performance, b.balance, b.carbon, b.total}) {
      if (!(s >= 0.0 && s <= 1.0 + 1e-12)) ++bound_violations;
    }
    auto dirtier = node;
    dirtier.intensity.grams_per_kwh += 500 * u(rng);
    if (scheduler::ScoreNode(dirtier, stats, task, w).total > b.total) ++monotone_violations;
  }
  return {bound_violations == 0 && monotone_violations == 0,
          fmt::format("1000 draws, {} bound / {} monotonicity violations", bound_violations,
                      monotone_violations)};
}

Outcome Determinism() {
  auto render = [] {
    auto config = experiment::DefaultConfig();
    config.workload.arrival = sim::ArrivalKind::kPoisson;
    config.workload.poisson_rate_per_s = 5;
    config.sweep->carbon_weights = {0.0, 0.4, 0.5, 0.6, 1.0};
    const auto compare = experiment::RunCompare(config);
    const auto sweep = experiment::RunSweep(config);
    return experiment::RenderSummaryCsv(compare) + experiment::RenderNodeUsageCsv(compare) +
           experiment::RenderJson(compare) + experiment::RenderSummaryCsv(sweep) +
           experiment::RenderSweepCsv(sweep) + experiment::RenderJson(sweep);
  };
  const auto a = render();
  const auto b = render();
  return {a == b, fmt::format("{} bytes, identical={}", a.size(), a == b)};
}

Outcome ScoreSpread() {
  const auto config = experiment::DefaultConfig();
  const auto &model = config.Model("MobileNetV2");
  std::vector<double> s_c, s_p;
  for (const auto &node : config.nodes) {
    const double t_ms = sim::ExecutionTimeMs(model, node, config.sim.overhead_frac);
    s_c.push_back(scheduler::CarbonScore(node.intensity.grams_per_kwh, node.PowerWatts(), t_ms));
    s_p.push_back(scheduler::PerformanceScore(scheduler::NodeStats{.avg_time_s = t_ms / 1000.0}));
  }
  auto spread = [](const std::vector<double> &v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    return *hi - *lo;
  };
  const double c = spread(s_c), p = spread(s_p);
  return {c >= 0.02 && c <= 0.10 && p > c,
          fmt::format("S_C spread {:.4f}, S_P spread {:.4f}", c, p)};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"routing reproduction", RoutingReproduction},
      {"weight-sweep transition", SweepTransition},
      {"carbon-reduction identity", CarbonReductionIdentity},
      {"scheduling overhead", SchedulingOverhead},
      {"carbon-efficiency arithmetic", CarbonEfficiencyArithmetic},
      {"energy integration exactness", EnergyIntegration},
      {"partitioner oracle equivalence", PartitionerOracle},
      {"score bounds and monotonicity", ScoreProperties},
      {"determinism", Determinism},
      {"S_C spread sanity", ScoreSpread},
  };
  int failures = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome outcome;
    try {
      outcome = criteria[i].second();
    } catch (const std::exception &e) {
      outcome = {false, fmt::format("threw: {}", e.what())};
    }
    failures += !outcome.pass;
    fmt::print("[{}] AC{:<2} {}: {}\n", outcome.pass ? "PASS" : "FAIL", i + 1, criteria[i].first,
               outcome.detail);
  }
  fmt::print("{}/{} criteria passed\n", criteria.size() - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
