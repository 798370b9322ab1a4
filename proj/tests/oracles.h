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

// Test-only reference implementations. Each one recomputes a library result
// from its definition, with no shared code beyond the public types.

#pragma once

#include <algorithm>
#include <cstdint>
#include <limits>
#include <optional>
#include <vector>

#include "ecoroute/node.h"
#include "ecoroute/partitioner.h"
#include "ecoroute/scheduler.h"

namespace ecoroute::oracle {

// Energy of P(t) = a + b*t over [t0, t1], in kWh.
inline double LinearEnergyKwh(double a, double b, double t0, double t1) {
  return (a * (t1 - t0) + 0.5 * b * (t1 * t1 - t0 * t0)) / 3.6e6;
}

struct BrutePlan {
  std::vector<std::size_t> cuts;  // segment end positions, excluding L
  double bottleneck = std::numeric_limits<double>::infinity();
  std::int64_t comm = 0;
};

// Enumerates every placement of K-1 cuts in lexicographic order and keeps a
// strictly better (bottleneck, traffic) pair, so ties resolve to the earliest
// cut vector.
inline BrutePlan BrutePartition(const std::vector<double> &costs,
                                const std::vector<std::int64_t> &activations,
                                const std::vector<double> &caps) {
  const std::size_t L = costs.size();
  const std::size_t K = caps.size();
  BrutePlan best;
  bool have = false;
  std::vector<std::size_t> cuts(K - 1);
  for (std::size_t i = 0; i + 1 < K; ++i) cuts[i] = i + 1;
  while (true) {
    double bottleneck = 0.0;
    std::int64_t comm = 0;
    std::size_t begin = 0;
    for (std::size_t k = 0; k < K; ++k) {
      const std::size_t end = k + 1 < K ? cuts[k] : L;
      double cost = 0.0;
      for (std::size_t i = begin; i < end; ++i) cost += costs[i];
      bottleneck = std::max(bottleneck, cost / caps[k]);
      if (k + 1 < K) comm += activations[end - 1];
      begin = end;
    }
    if (!have || bottleneck < best.bottleneck ||
        (bottleneck == best.bottleneck && comm < best.comm)) {
      best = BrutePlan{cuts, bottleneck, comm};
      have = true;
    }
    // Next combination of K-1 values from [1, L-1].
    std::size_t pos = K - 1;
    while (pos > 0 && cuts[pos - 1] == L - 1 - (K - 1 - pos)) --pos;
    if (pos == 0) break;
    ++cuts[pos - 1];
    for (std::size_t i = pos; i + 1 < K; ++i) cuts[i] = cuts[i - 1] + 1;
  }
  return best;
}

// Score recomputed straight from the component formulas.
inline double ReferenceTotal(const NodeSpec &node, const scheduler::NodeStats &stats,
                             double required_cpu, double required_mem,
                             const scheduler::ScoreWeights &w) {
  const double free_cpu = (node.cpu_quota - stats.cpu_in_use - required_cpu) / node.cpu_quota;
  const double free_mem = (node.mem_gb - stats.mem_in_use_gb - required_mem) / node.mem_gb;
  const double s_r = std::clamp(std::min(free_cpu, free_mem), 0.0, 1.0);
  const double s_l = 1.0 - std::clamp(stats.load, 0.0, 1.0);
  const double s_p = 1.0 / (1.0 + stats.avg_time_s);
  const double s_b = 1.0 / (1.0 + 2.0 * static_cast<double>(stats.task_count));
  const double power = node.power.base_w + node.power.per_cpu_w * node.cpu_quota +
                       node.power.ram_w_per_gb * node.mem_gb;
  const double e_est = power * stats.avg_time_s * 1000.0 / 3.6e6;
  const double s_c = 1.0 / (1.0 + node.intensity.grams_per_kwh * e_est);
  return w.resource * s_r + w.load * s_l + w.performance * s_p + w.balance * s_b +
         w.carbon * s_c;
}

}  // namespace ecoroute::oracle
