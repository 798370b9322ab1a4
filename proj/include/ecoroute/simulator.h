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
#include <variant>
#include <vector>

#include "ecoroute/carbon.h"
#include "ecoroute/node.h"
#include "ecoroute/partitioner.h"
#include "ecoroute/scheduler.h"

namespace ecoroute::sim {

/// Latency added to every scheduled (distributed) configuration relative to
/// monolithic execution.
inline constexpr double kDefaultOverheadFrac = 0.0674;
inline constexpr double kDefaultRequiredCpu = 0.01;

enum class ArrivalKind { kClosedLoop, kPoisson };

std::string_view ToString(ArrivalKind kind);

struct Workload {
  std::string model_id;
  std::int64_t iterations = 50;
  std::int64_t batch_size = 1;
  ArrivalKind arrival = ArrivalKind::kClosedLoop;
  double poisson_rate_per_s = 1.0;
  std::uint64_t seed = 42;
  // Per-task demand. When required_mem_gb is unset it defaults to the fp32
  // weight footprint of the model.
  double required_cpu = kDefaultRequiredCpu;
  std::optional<double> required_mem_gb;
  // Untimed profiling runs per node before the measured tasks, seeding the
  // execution-time history the scorer reads. Zero leaves nodes cold.
  std::int64_t warmup_per_node = 1;

  void Validate() const;
  bool operator==(const Workload &) const = default;
};

enum class BaselineKind { kMonolithic, kRoundRobinNoCarbon };

std::string_view ToString(BaselineKind kind);

struct Baseline {
  BaselineKind kind = BaselineKind::kMonolithic;
  std::string pinned_node_id;  // Monolithic only

  bool operator==(const Baseline &) const = default;
};

using Policy = std::variant<scheduler::Mode, Baseline>;

struct SimOptions {
  scheduler::SelectionFilters filters;
  double overhead_frac = kDefaultOverheadFrac;
  double pue = carbon::kDefaultPue;
  double apportion_cpu_weight = carbon::kDefaultApportionCpuWeight;
  // Cadence of the host power trace used for apportioned accounting.
  double sample_period_s = 1.0;

  void Validate() const;
  bool operator==(const SimOptions &) const = default;
};

struct TaskRecord {
  std::int64_t index = 0;
  bool rejected = false;
  std::string node_id;
  double arrival_ms = 0.0;
  double completion_ms = 0.0;
  double latency_ms = 0.0;
  double energy_kwh = 0.0;
  double grams_co2 = 0.0;
  // Absent for baselines, which never consult the scorer.
  std::optional<scheduler::ScoreBreakdown> breakdown;

  bool operator==(const TaskRecord &) const = default;
};

struct NodeUsage {
  std::string node_id;
  std::int64_t tasks = 0;
  double percent = 0.0;
  double energy_kwh = 0.0;
  double grams_co2 = 0.0;
  // Share of the sampled host energy assigned by quota.
  double apportioned_kwh = 0.0;

  bool operator==(const NodeUsage &) const = default;
};

struct SimResult {
  std::string label;
  std::string model_id;
  std::vector<TaskRecord> tasks;
  std::int64_t completed = 0;
  std::int64_t rejected = 0;
  // completed * batch_size
  std::int64_t inferences = 0;
  double mean_latency_ms = 0.0;
  double makespan_s = 0.0;
  double throughput_rps = 0.0;
  double total_energy_kwh = 0.0;
  double total_grams = 0.0;
  double grams_per_inference = 0.0;
  // Inferences per gram; zero when nothing was emitted.
  double carbon_efficiency = 0.0;
  std::vector<NodeUsage> usage;
  carbon::EnergyRecord host_energy;
  // Wall-clock select_node durations. Not part of the deterministic record.
  std::vector<double> overhead_samples_ms;

  /// Equality over every deterministic field (overhead samples excluded).
  bool SameOutcome(const SimResult &other) const;
};

/// base_latency_ms * (1.0 / cpu_quota) * (1 + overhead_frac).
double ExecutionTimeMs(const partitioner::ModelDescriptor &model, const NodeSpec &node,
                       double overhead_frac);

/// Task demand used for every request of `workload` on `model`.
scheduler::TaskRequest MakeTaskRequest(const partitioner::ModelDescriptor &model,
                                       const Workload &workload);

/// Replays the workload against `nodes` on a virtual clock. Tasks no node can
/// take are recorded as rejected and the run continues. Deterministic given
/// the inputs, apart from overhead_samples_ms.
SimResult RunWorkload(std::span<const NodeSpec> nodes, const partitioner::ModelDescriptor &model,
                      const Workload &workload, const Policy &policy,
                      const SimOptions &options = {});

/// (baseline - result) / baseline * 100 on per-inference grams.
double CarbonReduction(double result_grams_per_inference, double baseline_grams_per_inference);
double CarbonReduction(const SimResult &result, const SimResult &baseline);

/// Mean wall-clock select_node time in ms. Throws InvalidInput when the run
/// scheduled nothing.
double MeasureSchedulingOverhead(const SimResult &result);

}  // namespace ecoroute::sim
