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

#include "ecoroute/simulator.h"

#include <chrono>
#include <cmath>
#include <queue>
#include <random>
#include <set>
#include <utility>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute::sim {

namespace {

using scheduler::NodeStats;
using scheduler::TaskRequest;

enum class EventKind : int { kCompletion = 0, kArrival = 1 };

struct Event {
  double time_ms;
  EventKind kind;
  std::int64_t seq;
  std::int64_t task;
  std::size_t node;
  double exec_ms;
};

// Min-heap on (time, kind, seq): completions at an instant release capacity
// before arrivals at the same instant are placed.
struct EventAfter {
  bool operator()(const Event &a, const Event &b) const {
    if (a.time_ms != b.time_ms) return a.time_ms > b.time_ms;
    if (a.kind != b.kind) return a.kind > b.kind;
    return a.seq > b.seq;
  }
};

struct BusyInterval {
  double start_ms;
  double end_ms;
};

double UniformOpen(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

std::string PolicyLabel(const Policy &policy) {
  if (const auto *mode = std::get_if<scheduler::Mode>(&policy)) return "CE-" + mode->name;
  return std::string(ToString(std::get<Baseline>(policy).kind));
}

// Sampled host power trace over [0, end_ms], integrated with the trapezoid
// rule. A node draws its full power while any task runs on it and its
// base + memory power otherwise.
carbon::EnergyRecord HostEnergy(std::span<const NodeSpec> nodes,
                                const std::vector<std::vector<BusyInterval>> &busy,
                                double end_ms, double period_s) {
  auto host_watts = [&](double t_ms) {
    double watts = 0.0;
    for (std::size_t n = 0; n < nodes.size(); ++n) {
      bool active = false;
      for (const auto &iv : busy[n]) {
        if (iv.start_ms <= t_ms && t_ms < iv.end_ms) {
          active = true;
          break;
        }
      }
      watts += active ? nodes[n].PowerWatts()
                      : nodes[n].power.base_w + nodes[n].power.ram_w_per_gb * nodes[n].mem_gb;
    }
    return watts;
  };
  std::vector<carbon::PowerSample> trace;
  const double period_ms = period_s * 1000.0;
  for (std::int64_t i = 0;; ++i) {
    const double t = static_cast<double>(i) * period_ms;
    if (t >= end_ms && i > 0) break;
    trace.push_back({t / 1000.0, 0.0, host_watts(t), 0.0});
  }
  if (trace.back().timestamp_s * 1000.0 < end_ms) {
    trace.push_back({end_ms / 1000.0, 0.0, host_watts(end_ms), 0.0});
  }
  return carbon::IntegrateEnergy(trace);
}

}  // namespace

std::string_view ToString(ArrivalKind kind) {
  return kind == ArrivalKind::kClosedLoop ? "closed-loop" : "poisson";
}

std::string_view ToString(BaselineKind kind) {
  return kind == BaselineKind::kMonolithic ? "Monolithic" : "RoundRobin-NoCarbon";
}

void Workload::Validate() const {
  if (iterations < 1) {
    throw InvalidInput(fmt::format("workload.iterations must be >= 1, got {}", iterations));
  }
  if (batch_size < 1) {
    throw InvalidInput(fmt::format("workload.batch_size must be >= 1, got {}", batch_size));
  }
  if (arrival == ArrivalKind::kPoisson && !(poisson_rate_per_s > 0.0)) {
    throw InvalidInput(
        fmt::format("workload.rate must be > 0 for poisson arrivals, got {}", poisson_rate_per_s));
  }
  if (!(required_cpu >= 0.0)) {
    throw InvalidInput(fmt::format("workload.required_cpu must be >= 0, got {}", required_cpu));
  }
  if (required_mem_gb && !(*required_mem_gb >= 0.0)) {
    throw InvalidInput(
        fmt::format("workload.required_mem_gb must be >= 0, got {}", *required_mem_gb));
  }
  if (warmup_per_node < 0) {
    throw InvalidInput(
        fmt::format("workload.warmup_per_node must be >= 0, got {}", warmup_per_node));
  }
}

void SimOptions::Validate() const {
  if (!(overhead_frac >= 0.0)) {
    throw InvalidInput(fmt::format("overhead_frac must be >= 0, got {}", overhead_frac));
  }
  if (!(pue >= 1.0)) throw InvalidInput(fmt::format("pue must be >= 1.0, got {}", pue));
  if (!(apportion_cpu_weight >= 0.0 && apportion_cpu_weight <= 1.0)) {
    throw InvalidInput(fmt::format("apportion cpu weight must lie in [0,1], got {}",
                                   apportion_cpu_weight));
  }
  if (!(sample_period_s > 0.0)) {
    throw InvalidInput(fmt::format("sample_period_s must be > 0, got {}", sample_period_s));
  }
  if (!(filters.load_max >= 0.0 && filters.load_max <= 1.0)) {
    throw InvalidInput(fmt::format("load_max must lie in [0,1], got {}", filters.load_max));
  }
  if (!(filters.latency_threshold_ms >= 0.0)) {
    throw InvalidInput(fmt::format("latency_threshold_ms must be >= 0, got {}",
                                   filters.latency_threshold_ms));
  }
}

bool SimResult::SameOutcome(const SimResult &o) const {
  return label == o.label && model_id == o.model_id && tasks == o.tasks &&
         completed == o.completed && rejected == o.rejected && inferences == o.inferences &&
         mean_latency_ms == o.mean_latency_ms && makespan_s == o.makespan_s &&
         throughput_rps == o.throughput_rps && total_energy_kwh == o.total_energy_kwh &&
         total_grams == o.total_grams && grams_per_inference == o.grams_per_inference &&
         carbon_efficiency == o.carbon_efficiency && usage == o.usage &&
         host_energy == o.host_energy;
}

double ExecutionTimeMs(const partitioner::ModelDescriptor &model, const NodeSpec &node,
                       double overhead_frac) {
  if (!(overhead_frac >= 0.0)) {
    throw InvalidInput(fmt::format("overhead_frac must be >= 0, got {}", overhead_frac));
  }
  constexpr double kReferenceCpu = 1.0;
  return model.base_latency_ms * (kReferenceCpu / node.cpu_quota) * (1.0 + overhead_frac);
}

TaskRequest MakeTaskRequest(const partitioner::ModelDescriptor &model, const Workload &workload) {
  TaskRequest req;
  req.model_id = model.id;
  req.required_cpu = workload.required_cpu;
  // fp32 weights
  req.required_mem_gb = workload.required_mem_gb.value_or(partitioner::ModelCost(model) * 4.0 / 1e9);
  return req;
}

SimResult RunWorkload(std::span<const NodeSpec> nodes, const partitioner::ModelDescriptor &model,
                      const Workload &workload, const Policy &policy,
                      const SimOptions &options) {
  if (nodes.empty()) throw InvalidInput("simulation needs at least one node");
  workload.Validate();
  options.Validate();
  model.Validate();
  {
    std::set<std::string> ids;
    for (const auto &node : nodes) {
      node.Validate();
      if (!ids.insert(node.id).second) {
        throw InvalidInput(fmt::format("duplicate node id '{}'", node.id));
      }
    }
  }

  const auto *mode = std::get_if<scheduler::Mode>(&policy);
  const auto *baseline = std::get_if<Baseline>(&policy);
  if (mode) mode->weights.Validate(mode->name);
  std::size_t pinned = 0;
  if (baseline && baseline->kind == BaselineKind::kMonolithic) {
    bool found = false;
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      if (nodes[i].id == baseline->pinned_node_id) {
        pinned = i;
        found = true;
      }
    }
    if (!found) {
      throw InvalidInput(
          fmt::format("monolithic baseline pins unknown node '{}'", baseline->pinned_node_id));
    }
  }
  const bool monolithic = baseline && baseline->kind == BaselineKind::kMonolithic;
  const double overhead_frac = monolithic ? 0.0 : options.overhead_frac;
  const TaskRequest request = MakeTaskRequest(model, workload);
  auto exec_ms_on = [&](std::size_t n) {
    return ExecutionTimeMs(model, nodes[n], overhead_frac) *
           static_cast<double>(workload.batch_size);
  };

  std::vector<NodeStats> stats(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) {
    stats[n].latency_ms = nodes[n].latency_ms;
    if (mode) {
      for (std::int64_t w = 0; w < workload.warmup_per_node; ++w) {
        stats[n] = scheduler::UpdateStats(stats[n], exec_ms_on(n) / 1000.0);
      }
    }
  }

  SimResult result;
  result.label = PolicyLabel(policy);
  result.model_id = model.id;
  result.tasks.resize(static_cast<std::size_t>(workload.iterations));
  std::vector<std::vector<BusyInterval>> busy(nodes.size());

  std::priority_queue<Event, std::vector<Event>, EventAfter> events;
  std::int64_t seq = 0;
  std::int64_t next_task = 0;
  auto push_arrival = [&](double t_ms) {
    if (next_task >= workload.iterations) return;
    events.push(Event{t_ms, EventKind::kArrival, seq++, next_task++, 0, 0.0});
  };
  const bool closed_loop = workload.arrival == ArrivalKind::kClosedLoop;
  if (closed_loop) {
    push_arrival(0.0);
  } else {
    std::mt19937_64 rng(workload.seed);
    double t_ms = 0.0;
    for (std::int64_t i = 0; i < workload.iterations; ++i) {
      push_arrival(t_ms);
      t_ms += -std::log1p(-UniformOpen(rng)) / workload.poisson_rate_per_s * 1000.0;
    }
  }

  std::size_t rr_cursor = 0;
  while (!events.empty()) {
    const Event ev = events.top();
    events.pop();
    TaskRecord &rec = result.tasks[static_cast<std::size_t>(ev.task)];

    if (ev.kind == EventKind::kCompletion) {
      const NodeSpec &node = nodes[ev.node];
      scheduler::RecordCompletion(stats[ev.node], node, request, ev.exec_ms / 1000.0);
      const auto energy = carbon::TaskEnergy(node.PowerWatts(), ev.exec_ms);
      const auto emission = carbon::ComputeEmissions(energy, node.intensity, options.pue);
      rec.completion_ms = ev.time_ms;
      rec.latency_ms = rec.completion_ms - rec.arrival_ms;
      rec.energy_kwh = energy.kwh;
      rec.grams_co2 = emission.grams_co2;
      if (closed_loop) push_arrival(ev.time_ms);
      continue;
    }

    rec.index = ev.task;
    rec.arrival_ms = ev.time_ms;
    std::optional<std::size_t> chosen;
    if (mode) {
      const auto start = std::chrono::steady_clock::now();
      auto selection = scheduler::SelectNode(request, nodes, stats, mode->weights, options.filters);
      const auto stop = std::chrono::steady_clock::now();
      result.overhead_samples_ms.push_back(
          std::chrono::duration<double, std::milli>(stop - start).count());
      if (selection) {
        chosen = selection->index;
        rec.breakdown = selection->breakdown;
      }
    } else if (monolithic) {
      if (scheduler::HasSufficientResources(nodes[pinned], stats[pinned], request)) {
        chosen = pinned;
      }
    } else {
      for (std::size_t k = 0; k < nodes.size(); ++k) {
        const std::size_t n = (rr_cursor + k) % nodes.size();
        if (scheduler::PassesFilters(stats[n], options.filters) &&
            scheduler::HasSufficientResources(nodes[n], stats[n], request)) {
          chosen = n;
          rr_cursor = n + 1;
          break;
        }
      }
    }

    if (!chosen) {
      rec.rejected = true;
      rec.completion_ms = ev.time_ms;
      if (closed_loop) push_arrival(ev.time_ms);
      continue;
    }
    const std::size_t n = *chosen;
    const double exec_ms = exec_ms_on(n);
    rec.node_id = nodes[n].id;
    scheduler::RecordDispatch(stats[n], nodes[n], request);
    busy[n].push_back({ev.time_ms, ev.time_ms + exec_ms});
    events.push(Event{ev.time_ms + exec_ms, EventKind::kCompletion, seq++, ev.task, n, exec_ms});
  }

  // Aggregates.
  result.usage.resize(nodes.size());
  for (std::size_t n = 0; n < nodes.size(); ++n) result.usage[n].node_id = nodes[n].id;
  double latency_sum = 0.0;
  double first_arrival = result.tasks.front().arrival_ms;
  double last_completion = first_arrival;
  for (const auto &rec : result.tasks) {
    last_completion = std::max(last_completion, rec.completion_ms);
    if (rec.rejected) {
      ++result.rejected;
      continue;
    }
    ++result.completed;
    latency_sum += rec.latency_ms;
    result.total_energy_kwh += rec.energy_kwh;
    result.total_grams += rec.grams_co2;
    for (auto &u : result.usage) {
      if (u.node_id == rec.node_id) {
        ++u.tasks;
        u.energy_kwh += rec.energy_kwh;
        u.grams_co2 += rec.grams_co2;
      }
    }
  }
  result.inferences = result.completed * workload.batch_size;
  const auto inferences = static_cast<double>(result.inferences);
  result.makespan_s = (last_completion - first_arrival) / 1000.0;
  if (result.completed > 0) {
    result.mean_latency_ms = latency_sum / static_cast<double>(result.completed);
    result.grams_per_inference = result.total_grams / inferences;
    for (auto &u : result.usage) {
      u.percent = 100.0 * static_cast<double>(u.tasks) / static_cast<double>(result.completed);
    }
  }
  if (result.makespan_s > 0.0) {
    result.throughput_rps = static_cast<double>(result.completed) / result.makespan_s;
  }
  if (result.total_grams > 0.0) result.carbon_efficiency = inferences / result.total_grams;

  result.host_energy = HostEnergy(nodes, busy, last_completion, options.sample_period_s);
  std::vector<carbon::NodeQuota> quotas;
  for (const auto &node : nodes) quotas.push_back({node.cpu_quota, node.mem_gb});
  const auto apportioned =
      carbon::ApportionHostEnergy(result.host_energy, quotas, options.apportion_cpu_weight);
  for (std::size_t n = 0; n < nodes.size(); ++n) result.usage[n].apportioned_kwh = apportioned[n].kwh;
  return result;
}

double CarbonReduction(double result_grams_per_inference, double baseline_grams_per_inference) {
  if (!(baseline_grams_per_inference > 0.0)) {
    throw InvalidInput(fmt::format("carbon reduction needs a positive baseline, got {}",
                                   baseline_grams_per_inference));
  }
  return (baseline_grams_per_inference - result_grams_per_inference) /
         baseline_grams_per_inference * 100.0;
}

double CarbonReduction(const SimResult &result, const SimResult &baseline) {
  return CarbonReduction(result.grams_per_inference, baseline.grams_per_inference);
}

double MeasureSchedulingOverhead(const SimResult &result) {
  if (result.overhead_samples_ms.empty()) {
    throw InvalidInput(fmt::format("run '{}' made no scheduling decisions", result.label));
  }
  double sum = 0.0;
  for (double s : result.overhead_samples_ms) sum += s;
  return sum / static_cast<double>(result.overhead_samples_ms.size());
}

}  // namespace ecoroute::sim
