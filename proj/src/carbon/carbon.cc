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

#include "ecoroute/carbon.h"

#include <cmath>
#include <numeric>
#include <utility>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute::carbon {

namespace {

void RequireNonNegative(double value, std::string_view what) {
  if (!(value >= 0.0) || !std::isfinite(value)) {
    throw InvalidInput(fmt::format("{} must be a finite non-negative number, got {}",
                                   what, value));
  }
}

}  // namespace

void PowerModel::Validate() const {
  RequireNonNegative(base_w, "power.base_w");
  RequireNonNegative(per_cpu_w, "power.per_cpu_w");
  RequireNonNegative(ram_w_per_gb, "power.ram_w_per_gb");
}

void CarbonIntensity::Validate() const {
  if (!(grams_per_kwh > 0.0) || !std::isfinite(grams_per_kwh)) {
    throw InvalidInput(fmt::format("carbon intensity for region '{}' must be > 0, got {}",
                                   region_label, grams_per_kwh));
  }
}

std::string_view ToString(EnergySource source) {
  switch (source) {
    case EnergySource::kMeasuredTrace:
      return "measured-trace";
    case EnergySource::kModelEstimate:
      return "model-estimate";
    case EnergySource::kApportioned:
      return "apportioned";
  }
  return "unknown";
}

EnergyRecord IntegrateEnergy(std::span<const PowerSample> trace) {
  if (trace.empty()) {
    throw InvalidInput("power trace is empty");
  }
  for (const auto &sample : trace) {
    RequireNonNegative(sample.timestamp_s, "sample timestamp");
    RequireNonNegative(sample.gpu_w, "gpu_w");
    RequireNonNegative(sample.cpu_w, "cpu_w");
    RequireNonNegative(sample.ram_w, "ram_w");
  }
  double joules = 0.0;
  for (std::size_t i = 1; i < trace.size(); ++i) {
    const double dt = trace[i].timestamp_s - trace[i - 1].timestamp_s;
    if (!(dt > 0.0)) {
      throw InvalidInput(fmt::format(
          "power trace timestamps must strictly increase (sample {} at {} s follows {} s)",
          i, trace[i].timestamp_s, trace[i - 1].timestamp_s));
    }
    joules += 0.5 * dt * (trace[i - 1].TotalWatts() + trace[i].TotalWatts());
  }
  return EnergyRecord{.kwh = joules / kJoulesPerKwh,
                      .duration_s = trace.back().timestamp_s - trace.front().timestamp_s,
                      .source = EnergySource::kMeasuredTrace};
}

EmissionRecord ComputeEmissions(const EnergyRecord &energy,
                                const CarbonIntensity &intensity, double pue) {
  if (!(pue >= 1.0) || !std::isfinite(pue)) {
    throw InvalidInput(fmt::format("PUE must be >= 1.0, got {}", pue));
  }
  RequireNonNegative(energy.kwh, "energy.kwh");
  RequireNonNegative(intensity.grams_per_kwh, "grams_per_kwh");
  return EmissionRecord{.grams_co2 = energy.kwh * intensity.grams_per_kwh * pue,
                        .energy = energy,
                        .intensity = intensity,
                        .pue = pue};
}

std::vector<double> ApportionShares(std::span<const NodeQuota> nodes, double cpu_weight) {
  if (nodes.empty()) {
    throw InvalidInput("apportionment needs at least one node");
  }
  if (!(cpu_weight >= 0.0 && cpu_weight <= 1.0)) {
    throw InvalidInput(fmt::format("apportionment cpu weight must lie in [0,1], got {}",
                                   cpu_weight));
  }
  double cpu_total = 0.0;
  double mem_total = 0.0;
  for (const auto &node : nodes) {
    RequireNonNegative(node.cpu_quota, "cpu_quota");
    RequireNonNegative(node.mem_gb, "mem_gb");
    cpu_total += node.cpu_quota;
    mem_total += node.mem_gb;
  }
  if (cpu_total <= 0.0) {
    throw InvalidInput("apportionment needs a positive total cpu quota");
  }
  std::vector<double> shares;
  shares.reserve(nodes.size());
  for (const auto &node : nodes) {
    const double cpu_share = node.cpu_quota / cpu_total;
    const double mem_share = mem_total > 0.0 ? node.mem_gb / mem_total : cpu_share;
    shares.push_back(cpu_weight * cpu_share + (1.0 - cpu_weight) * mem_share);
  }
  return shares;
}

std::vector<EnergyRecord> ApportionHostEnergy(const EnergyRecord &host,
                                              std::span<const NodeQuota> nodes,
                                              double cpu_weight) {
  RequireNonNegative(host.kwh, "host energy");
  const auto shares = ApportionShares(nodes, cpu_weight);
  std::vector<EnergyRecord> out;
  out.reserve(shares.size());
  for (double share : shares) {
    out.push_back(EnergyRecord{.kwh = host.kwh * share,
                               .duration_s = host.duration_s,
                               .source = EnergySource::kApportioned});
  }
  return out;
}

double EstimateTaskEnergy(double node_power_w, double avg_time_ms) {
  RequireNonNegative(node_power_w, "node power");
  RequireNonNegative(avg_time_ms, "average execution time");
  return node_power_w * avg_time_ms / kScoringEnergyDivisor;
}

EnergyRecord TaskEnergy(double power_w, double duration_ms) {
  RequireNonNegative(power_w, "power");
  RequireNonNegative(duration_ms, "duration");
  return EnergyRecord{.kwh = power_w * duration_ms / kWattMillisPerKwh,
                      .duration_s = duration_ms / 1000.0,
                      .source = EnergySource::kModelEstimate};
}

double NodePower(double cpus, double mem_gb, const PowerModel &model) {
  RequireNonNegative(cpus, "cpus");
  RequireNonNegative(mem_gb, "mem_gb");
  model.Validate();
  return model.base_w + model.per_cpu_w * cpus + model.ram_w_per_gb * mem_gb;
}

StaticIntensityProvider::StaticIntensityProvider(std::vector<CarbonIntensity> entries)
    : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    entries_[i].Validate();
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[j].region_label == entries_[i].region_label) {
        throw InvalidInput(
            fmt::format("duplicate region '{}' in intensity catalog", entries_[i].region_label));
      }
    }
  }
}

std::optional<CarbonIntensity> StaticIntensityProvider::Lookup(std::string_view region) const {
  for (const auto &entry : entries_) {
    if (entry.region_label == region) return entry;
  }
  return std::nullopt;
}

}  // namespace ecoroute::carbon
