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

#include <algorithm>
#include <future>
#include <utility>

#include <fmt/format.h>

#include "ecoroute/error.h"
#include "ecoroute/experiment.h"

namespace ecoroute::experiment {

namespace {

sim::Workload WorkloadFor(const ExperimentConfig &config, const std::string &model_id) {
  sim::Workload w = config.workload;
  w.model_id = model_id;
  w.seed = config.seed;
  return w;
}

sim::SimResult RunMonolithic(const ExperimentConfig &config, const std::string &model_id) {
  const auto &model = config.Model(model_id);
  const auto workload = WorkloadFor(config, model_id);
  if (config.monolithic_pinned.empty()) {
    const std::vector<NodeSpec> single{config.monolithic_node};
    return sim::RunWorkload(single, model, workload,
                            sim::Baseline{sim::BaselineKind::kMonolithic, config.monolithic_node.id},
                            config.sim);
  }
  return sim::RunWorkload(config.nodes, model, workload,
                          sim::Baseline{sim::BaselineKind::kMonolithic, config.monolithic_pinned},
                          config.sim);
}

ComparisonRow MakeRow(const sim::SimResult &result, std::size_t index,
                      const sim::SimResult *monolithic) {
  ComparisonRow row;
  row.model_id = result.model_id;
  row.configuration = result.label;
  row.result_index = index;
  row.latency_ms = result.mean_latency_ms;
  row.throughput_rps = result.throughput_rps;
  row.grams_per_inference = result.grams_per_inference;
  if (result.inferences > 0) {
    row.energy_kwh_per_inference =
        result.total_energy_kwh / static_cast<double>(result.inferences);
  }
  if (monolithic && monolithic != &result && monolithic->grams_per_inference > 0.0) {
    row.reduction_pct = sim::CarbonReduction(result, *monolithic);
  }
  row.carbon_efficiency = result.carbon_efficiency;
  return row;
}

RunReport NewReport(const ExperimentConfig &config, std::string kind) {
  config.Validate();
  RunReport report;
  report.kind = std::move(kind);
  report.config_digest = ConfigDigest(config);
  report.seed = config.seed;
  for (const auto &node : config.nodes) report.node_ids.push_back(node.id);
  return report;
}

}  // namespace

RunReport RunCompare(const ExperimentConfig &config) {
  RunReport report = NewReport(config, "compare");

  // Models run concurrently; each task owns its results and the merge below
  // follows configuration order.
  struct ModelRuns {
    std::vector<sim::SimResult> results;
    std::vector<RunError> errors;
    bool has_monolithic = false;
  };
  std::vector<std::future<ModelRuns>> futures;
  for (const auto &model_id : config.models) {
    futures.push_back(std::async(std::launch::async, [&config, model_id] {
      ModelRuns runs;
      auto attempt = [&](std::string label, auto &&run) {
        try {
          runs.results.push_back(run());
          return true;
        } catch (const std::exception &e) {
          runs.errors.push_back(RunError{model_id, std::move(label), e.what()});
          return false;
        }
      };
      const auto &model = config.Model(model_id);
      const auto workload = WorkloadFor(config, model_id);
      runs.has_monolithic = attempt(std::string(sim::ToString(sim::BaselineKind::kMonolithic)),
                                    [&] { return RunMonolithic(config, model_id); });
      if (config.round_robin_baseline) {
        attempt(std::string(sim::ToString(sim::BaselineKind::kRoundRobinNoCarbon)), [&] {
          return sim::RunWorkload(config.nodes, model, workload,
                                  sim::Baseline{sim::BaselineKind::kRoundRobinNoCarbon, ""},
                                  config.sim);
        });
      }
      for (const auto &mode : config.modes) {
        attempt("CE-" + mode.name,
                [&] { return sim::RunWorkload(config.nodes, model, workload, mode, config.sim); });
      }
      return runs;
    }));
  }
  for (auto &f : futures) {
    auto runs = f.get();
    const std::size_t base = report.results.size();
    const sim::SimResult *monolithic = runs.has_monolithic ? &runs.results.front() : nullptr;
    for (std::size_t i = 0; i < runs.results.size(); ++i) {
      report.rows.push_back(MakeRow(runs.results[i], base + i, monolithic));
    }
    for (auto &r : runs.results) report.results.push_back(std::move(r));
    for (auto &e : runs.errors) report.errors.push_back(std::move(e));
  }
  return report;
}

RunReport RunSweep(const ExperimentConfig &config) {
  if (!config.sweep || config.sweep->carbon_weights.empty()) {
    throw InvalidInput("sweep axis is empty");
  }
  RunReport report = NewReport(config, "sweep");
  const auto &model_id = config.workload.model_id;
  const auto &model = config.Model(model_id);
  const auto workload = WorkloadFor(config, model_id);

  std::vector<double> axis = config.sweep->carbon_weights;
  std::sort(axis.begin(), axis.end());
  axis.erase(std::unique(axis.begin(), axis.end()), axis.end());

  auto monolithic_future =
      std::async(std::launch::async, [&config, &model_id] { return RunMonolithic(config, model_id); });
  std::vector<std::future<sim::SimResult>> futures;
  for (double w_c : axis) {
    const auto mode = scheduler::Mode::Custom(fmt::format("sweep(w_c={})", w_c),
                                              SweepWeights(w_c, config.sweep->redistribution));
    futures.push_back(std::async(std::launch::async, [&, mode] {
      return sim::RunWorkload(config.nodes, model, workload, mode, config.sim);
    }));
  }

  report.results.push_back(monolithic_future.get());
  report.rows.push_back(MakeRow(report.results.front(), 0, nullptr));
  const sim::SimResult &monolithic = report.results.front();

  std::size_t lowest = 0;
  for (std::size_t n = 1; n < config.nodes.size(); ++n) {
    if (config.nodes[n].intensity.grams_per_kwh < config.nodes[lowest].intensity.grams_per_kwh) {
      lowest = n;
    }
  }
  SweepSummary summary;
  summary.model_id = model_id;
  summary.lowest_intensity_node = config.nodes[lowest].id;

  for (std::size_t i = 0; i < axis.size(); ++i) {
    report.results.push_back(futures[i].get());
    const auto &result = report.results.back();
    SweepPoint point;
    point.w_c = axis[i];
    point.weights = SweepWeights(axis[i], config.sweep->redistribution);
    point.result_index = report.results.size() - 1;
    std::int64_t best_tasks = -1;
    for (const auto &u : result.usage) {
      point.usage_percent.push_back(u.percent);
      if (u.tasks > best_tasks) {
        best_tasks = u.tasks;
        point.majority_node = u.node_id;
      }
    }
    point.grams_per_inference = result.grams_per_inference;
    point.latency_ms = result.mean_latency_ms;
    if (monolithic.grams_per_inference > 0.0) {
      point.reduction_pct = sim::CarbonReduction(result, monolithic);
    }
    report.rows.push_back(MakeRow(result, point.result_index, &monolithic));
    report.sweep.push_back(std::move(point));
  }

  for (std::size_t i = 0; i < report.sweep.size(); ++i) {
    if (report.sweep[i].majority_node == summary.lowest_intensity_node) {
      summary.transition_w_c = report.sweep[i].w_c;
      summary.upward_closed = std::all_of(
          report.sweep.begin() + static_cast<std::ptrdiff_t>(i), report.sweep.end(),
          [&](const SweepPoint &p) { return p.majority_node == summary.lowest_intensity_node; });
      break;
    }
  }
  report.sweep_summary = std::move(summary);
  return report;
}

}  // namespace ecoroute::experiment
