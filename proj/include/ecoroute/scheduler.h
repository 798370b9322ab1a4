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

#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>

#include "ecoroute/node.h"

namespace ecoroute::scheduler {

/// Weights of the five score components. Valid weights lie in [0,1] and sum
/// to one within kWeightSumTolerance.
struct ScoreWeights {
  double resource = 0.0;
  double load = 0.0;
  double performance = 0.0;
  double balance = 0.0;
  double carbon = 0.0;

  static constexpr double kWeightSumTolerance = 1e-9;

  double Sum() const { return resource + load + performance + balance + carbon; }
  /// Throws InvalidInput; `owner` is used in the message.
  void Validate(std::string_view owner = "weights") const;

  bool operator==(const ScoreWeights &) const = default;
};

enum class ModeKind { kPerformance, kGreen, kBalanced, kCustom };

std::string_view ToString(ModeKind kind);

struct Mode {
  std::string name;
  ModeKind kind = ModeKind::kCustom;
  ScoreWeights weights;

  static Mode Performance();
  static Mode Green();
  static Mode Balanced();
  static Mode Custom(std::string name, ScoreWeights weights);

  bool operator==(const Mode &) const = default;
};

/// Runtime statistics the selector reads. `task_count` counts in-flight tasks;
/// `completed` drives the running mean in `avg_time_s`.
struct NodeStats {
  double load = 0.0;
  double avg_time_s = 0.0;
  std::int64_t task_count = 0;
  double latency_ms = 0.0;
  std::int64_t completed = 0;
  double cpu_in_use = 0.0;
  double mem_in_use_gb = 0.0;

  bool operator==(const NodeStats &) const = default;
};

struct TaskRequest {
  double required_cpu = 0.0;
  double required_mem_gb = 0.0;
  std::string model_id;
  std::optional<double> segment_cost;
};

struct ScoreBreakdown {
  double resource = 0.0;
  double load = 0.0;
  double performance = 0.0;
  double balance = 0.0;
  double carbon = 0.0;
  double total = 0.0;

  bool operator==(const ScoreBreakdown &) const = default;
};

struct SelectionFilters {
  double load_max = 0.8;
  double latency_threshold_ms = 500.0;

  bool operator==(const SelectionFilters &) const = default;
};

struct Selection {
  std::size_t index = 0;
  ScoreBreakdown breakdown;
};

bool HasSufficientResources(const NodeSpec &node, const NodeStats &stats,
                            const TaskRequest &task);

/// min(free cpu / quota, free mem / capacity) after hypothetically placing the
/// task, clamped to [0,1].
double ResourceScore(const NodeSpec &node, const NodeStats &stats, const TaskRequest &task);
double LoadScore(const NodeStats &stats);
/// 1 / (1 + avg_time) with avg_time in seconds.
double PerformanceScore(const NodeStats &stats);
double BalanceScore(const NodeStats &stats);
/// 1 / (1 + intensity * EstimateTaskEnergy(power, avg_time_ms)).
double CarbonScore(double grams_per_kwh, double node_power_w, double avg_time_ms);

ScoreBreakdown ScoreNode(const NodeSpec &node, const NodeStats &stats, const TaskRequest &task,
                         const ScoreWeights &weights);

/// Whether the node survives the load/latency filter.
bool PassesFilters(const NodeStats &stats, const SelectionFilters &filters);

/// Visits nodes in order, skipping filtered or infeasible ones, and keeps the
/// first node with the strictly greatest total. `nodes` and `stats` are
/// parallel. Returns nullopt when no node qualifies.
std::optional<Selection> SelectNode(const TaskRequest &task, std::span<const NodeSpec> nodes,
                                    std::span<const NodeStats> stats,
                                    const ScoreWeights &weights,
                                    const SelectionFilters &filters = {});

/// Folds one completed execution time into the running mean.
NodeStats UpdateStats(NodeStats stats, double completed_task_time_s);

/// In-flight bookkeeping: task_count, reserved resources and load.
void RecordDispatch(NodeStats &stats, const NodeSpec &node, const TaskRequest &task);
void RecordCompletion(NodeStats &stats, const NodeSpec &node, const TaskRequest &task,
                      double execution_time_s);

}  // namespace ecoroute::scheduler
