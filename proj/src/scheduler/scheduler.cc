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

#include "ecoroute/scheduler.h"

#include <algorithm>
#include <cmath>
#include <utility>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute::scheduler {

namespace {

// Absorbs round-off from repeated reserve/release of fractional quotas.
constexpr double kCapacityEpsilon = 1e-12;

double Clamp01(double x) { return std::clamp(x, 0.0, 1.0); }

double FreeCpu(const NodeSpec &node, const NodeStats &stats) {
  return node.cpu_quota - stats.cpu_in_use;
}

double FreeMem(const NodeSpec &node, const NodeStats &stats) {
  return node.mem_gb - stats.mem_in_use_gb;
}

void RecomputeLoad(NodeStats &stats, const NodeSpec &node) {
  stats.load = Clamp01(stats.cpu_in_use / node.cpu_quota);
}

}  // namespace

void ScoreWeights::Validate(std::string_view owner) const {
  const std::pair<const char *, double> fields[] = {{"w_r", resource},
                                                    {"w_l", load},
                                                    {"w_p", performance},
                                                    {"w_b", balance},
                                                    {"w_c", carbon}};
  for (const auto &[name, value] : fields) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw InvalidInput(fmt::format("{}: {} must lie in [0,1], got {}", owner, name, value));
    }
  }
  if (std::abs(Sum() - 1.0) > kWeightSumTolerance) {
    throw InvalidInput(fmt::format("{}: weights must sum to 1, got {}", owner, Sum()));
  }
}

std::string_view ToString(ModeKind kind) {
  switch (kind) {
    case ModeKind::kPerformance:
      return "Performance";
    case ModeKind::kGreen:
      return "Green";
    case ModeKind::kBalanced:
      return "Balanced";
    case ModeKind::kCustom:
      return "Custom";
  }
  return "Custom";
}

Mode Mode::Performance() {
  return {"Performance", ModeKind::kPerformance, {0.25, 0.25, 0.30, 0.15, 0.05}};
}

Mode Mode::Green() { return {"Green", ModeKind::kGreen, {0.15, 0.15, 0.10, 0.10, 0.50}}; }

Mode Mode::Balanced() {
  return {"Balanced", ModeKind::kBalanced, {0.20, 0.20, 0.15, 0.15, 0.30}};
}

Mode Mode::Custom(std::string name, ScoreWeights weights) {
  return {std::move(name), ModeKind::kCustom, weights};
}

bool HasSufficientResources(const NodeSpec &node, const NodeStats &stats,
                            const TaskRequest &task) {
  return FreeCpu(node, stats) + kCapacityEpsilon >= task.required_cpu &&
         FreeMem(node, stats) + kCapacityEpsilon >= task.required_mem_gb;
}

double ResourceScore(const NodeSpec &node, const NodeStats &stats, const TaskRequest &task) {
  const double cpu_slack = (FreeCpu(node, stats) - task.required_cpu) / node.cpu_quota;
  const double mem_slack = (FreeMem(node, stats) - task.required_mem_gb) / node.mem_gb;
  return Clamp01(std::min(cpu_slack, mem_slack));
}

double LoadScore(const NodeStats &stats) { return 1.0 - Clamp01(stats.load); }

double PerformanceScore(const NodeStats &stats) { return 1.0 / (1.0 + stats.avg_time_s); }

double BalanceScore(const NodeStats &stats) {
  return 1.0 / (1.0 + static_cast<double>(stats.task_count) * 2.0);
}

double CarbonScore(double grams_per_kwh, double node_power_w, double avg_time_ms) {
  if (!(grams_per_kwh >= 0.0)) {
    throw InvalidInput(fmt::format("carbon intensity must be >= 0, got {}", grams_per_kwh));
  }
  return 1.0 / (1.0 + grams_per_kwh * carbon::EstimateTaskEnergy(node_power_w, avg_time_ms));
}

ScoreBreakdown ScoreNode(const NodeSpec &node, const NodeStats &stats, const TaskRequest &task,
                         const ScoreWeights &weights) {
  ScoreBreakdown b;
  b.resource = ResourceScore(node, stats, task);
  b.load = LoadScore(stats);
  b.performance = PerformanceScore(stats);
  b.balance = BalanceScore(stats);
  b.carbon = CarbonScore(node.intensity.grams_per_kwh, node.PowerWatts(),
                         stats.avg_time_s * 1000.0);
  b.total = weights.resource * b.resource + weights.load * b.load +
            weights.performance * b.performance + weights.balance * b.balance +
            weights.carbon * b.carbon;
  return b;
}

bool PassesFilters(const NodeStats &stats, const SelectionFilters &filters) {
  return !(stats.load > filters.load_max || stats.latency_ms > filters.latency_threshold_ms);
}

std::optional<Selection> SelectNode(const TaskRequest &task, std::span<const NodeSpec> nodes,
                                    std::span<const NodeStats> stats,
                                    const ScoreWeights &weights,
                                    const SelectionFilters &filters) {
  if (nodes.size() != stats.size()) {
    throw InvalidInput(fmt::format("SelectNode: {} nodes but {} stats entries", nodes.size(),
                                   stats.size()));
  }
  std::optional<Selection> best;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (!PassesFilters(stats[i], filters)) continue;
    if (!HasSufficientResources(nodes[i], stats[i], task)) continue;
    ScoreBreakdown b = ScoreNode(nodes[i], stats[i], task, weights);
    if (!best || b.total > best->breakdown.total) {
      best = Selection{i, b};
    }
  }
  return best;
}

NodeStats UpdateStats(NodeStats stats, double completed_task_time_s) {
  if (!(completed_task_time_s >= 0.0)) {
    throw InvalidInput(
        fmt::format("completed task time must be >= 0, got {}", completed_task_time_s));
  }
  stats.completed += 1;
  stats.avg_time_s += (completed_task_time_s - stats.avg_time_s) /
                      static_cast<double>(stats.completed);
  return stats;
}

void RecordDispatch(NodeStats &stats, const NodeSpec &node, const TaskRequest &task) {
  stats.task_count += 1;
  stats.cpu_in_use += task.required_cpu;
  stats.mem_in_use_gb += task.required_mem_gb;
  RecomputeLoad(stats, node);
}

void RecordCompletion(NodeStats &stats, const NodeSpec &node, const TaskRequest &task,
                      double execution_time_s) {
  stats = UpdateStats(stats, execution_time_s);
  stats.task_count = std::max<std::int64_t>(0, stats.task_count - 1);
  if (stats.task_count == 0) {
    stats.cpu_in_use = 0.0;
    stats.mem_in_use_gb = 0.0;
  } else {
    stats.cpu_in_use = std::max(0.0, stats.cpu_in_use - task.required_cpu);
    stats.mem_in_use_gb = std::max(0.0, stats.mem_in_use_gb - task.required_mem_gb);
  }
  RecomputeLoad(stats, node);
}

}  // namespace ecoroute::scheduler
