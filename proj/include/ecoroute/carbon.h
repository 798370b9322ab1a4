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

#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecoroute::carbon {

inline constexpr double kJoulesPerKwh = 3.6e6;
/// W x ms -> kWh.
inline constexpr double kWattMillisPerKwh = 3.6e9;
/// Divisor applied to W x ms when estimating task energy for scoring. It is
/// three orders of magnitude short of a true kWh conversion; scoring keeps it
/// so the carbon score lands in its historical range. Accounting uses
/// kWattMillisPerKwh.
inline constexpr double kScoringEnergyDivisor = 3.6e6;
inline constexpr double kDefaultRamWattsPerGb = 0.375;
inline constexpr double kDefaultPue = 1.0;
inline constexpr double kDefaultApportionCpuWeight = 0.5;

/// One instantaneous power reading. Timestamps are seconds since run start.
struct PowerSample {
  double timestamp_s = 0.0;
  double gpu_w = 0.0;
  double cpu_w = 0.0;
  double ram_w = 0.0;

  double TotalWatts() const { return gpu_w + cpu_w + ram_w; }
};

/// Affine node power: base_w + per_cpu_w * cpus + ram_w_per_gb * mem_gb.
struct PowerModel {
  double base_w = 0.0;
  double per_cpu_w = 0.0;
  double ram_w_per_gb = kDefaultRamWattsPerGb;

  void Validate() const;
  bool operator==(const PowerModel &) const = default;
};

struct CarbonIntensity {
  double grams_per_kwh = 0.0;
  std::string region_label;

  void Validate() const;
  bool operator==(const CarbonIntensity &) const = default;
};

enum class EnergySource { kMeasuredTrace, kModelEstimate, kApportioned };

std::string_view ToString(EnergySource source);

struct EnergyRecord {
  double kwh = 0.0;
  double duration_s = 0.0;
  EnergySource source = EnergySource::kModelEstimate;

  bool operator==(const EnergyRecord &) const = default;
};

struct EmissionRecord {
  double grams_co2 = 0.0;
  EnergyRecord energy;
  CarbonIntensity intensity;
  double pue = kDefaultPue;
};

/// Resource quota used to split host energy across co-located nodes.
struct NodeQuota {
  double cpu_quota = 0.0;
  double mem_gb = 0.0;
};

/// Trapezoidal integral of the total power of `trace`, in kWh. Throws
/// InvalidInput on an empty trace, negative power, or timestamps that do not
/// strictly increase.
EnergyRecord IntegrateEnergy(std::span<const PowerSample> trace);

/// grams = kwh * grams_per_kwh * pue. Throws InvalidInput when pue < 1.
EmissionRecord ComputeEmissions(const EnergyRecord &energy,
                                const CarbonIntensity &intensity,
                                double pue = kDefaultPue);

/// Blended quota shares: cpu_weight * cpu_i / sum(cpu) + (1 - cpu_weight) *
/// mem_i / sum(mem). When every node has zero memory the cpu share stands in
/// for the memory term. Shares sum to one.
std::vector<double> ApportionShares(std::span<const NodeQuota> nodes,
                                    double cpu_weight = kDefaultApportionCpuWeight);

/// Splits host energy across nodes using ApportionShares. Each record carries
/// the host duration and EnergySource::kApportioned.
std::vector<EnergyRecord> ApportionHostEnergy(
    const EnergyRecord &host, std::span<const NodeQuota> nodes,
    double cpu_weight = kDefaultApportionCpuWeight);

/// Scoring-side energy estimate: power_w * avg_time_ms / kScoringEnergyDivisor.
double EstimateTaskEnergy(double node_power_w, double avg_time_ms);

/// Accounting-side energy of one execution, W x ms converted to kWh.
EnergyRecord TaskEnergy(double power_w, double duration_ms);

double NodePower(double cpus, double mem_gb, const PowerModel &model);

/// Resolves region labels to grid intensities. Only a static catalog backs it
/// today.
class IntensityProvider {
 public:
  virtual ~IntensityProvider() = default;
  virtual std::optional<CarbonIntensity> Lookup(std::string_view region) const = 0;
};

class StaticIntensityProvider final : public IntensityProvider {
 public:
  explicit StaticIntensityProvider(std::vector<CarbonIntensity> entries);

  std::optional<CarbonIntensity> Lookup(std::string_view region) const override;
  const std::vector<CarbonIntensity> &entries() const { return entries_; }

 private:
  std::vector<CarbonIntensity> entries_;
};

}  // namespace ecoroute::carbon
