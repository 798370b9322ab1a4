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
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "ecoroute/carbon.h"
#include "ecoroute/node.h"
#include "ecoroute/partitioner.h"
#include "ecoroute/scheduler.h"
#include "ecoroute/simulator.h"

namespace ecoroute::experiment {

inline constexpr int kSchemaVersion = 1;

/// How the weight left over after fixing w_c is spread across the other four
/// components during a sweep.
enum class Redistribution {
  // Scaled from the Performance preset's 0.25/0.25/0.30/0.15.
  kProportional,
  kUniform,
};

std::string_view ToString(Redistribution rule);

struct SweepSpec {
  std::vector<double> carbon_weights;
  Redistribution redistribution = Redistribution::kProportional;

  bool operator==(const SweepSpec &) const = default;
};

enum class ReportFormat { kCsv, kJson, kMarkdown };

std::string_view ToString(ReportFormat format);
/// "csv", "json", "md"/"markdown". Throws InvalidInput.
ReportFormat ParseReportFormat(std::string_view text);
/// Comma-separated list, e.g. "csv,json,md".
std::vector<ReportFormat> ParseReportFormats(std::string_view text);

struct OutputSpec {
  std::string dir = "out";
  std::vector<ReportFormat> formats = {ReportFormat::kCsv, ReportFormat::kJson,
                                       ReportFormat::kMarkdown};

  bool operator==(const OutputSpec &) const = default;
};

struct ExperimentConfig {
  int schema_version = kSchemaVersion;
  std::uint64_t seed = 42;
  std::vector<carbon::CarbonIntensity> intensity_catalog;
  // Scheduler pool, in declaration order.
  std::vector<NodeSpec> nodes;
  std::vector<scheduler::Mode> modes;
  std::vector<partitioner::ModelDescriptor> catalog;
  bool builtin_catalog = true;
  // Models evaluated by `compare`; the sweep uses workload.model_id.
  std::vector<std::string> models;
  sim::Workload workload;
  sim::SimOptions sim;
  // Reference node for the monolithic baseline. When monolithic_pinned names
  // a pool node, that node is used instead.
  NodeSpec monolithic_node;
  std::string monolithic_pinned;
  bool round_robin_baseline = true;
  std::optional<SweepSpec> sweep;
  OutputSpec output;

  /// Throws ConfigError naming the offending field.
  void Validate() const;
  const partitioner::ModelDescriptor &Model(std::string_view id) const;

  bool operator==(const ExperimentConfig &) const = default;
};

/// Per-CPU power for the default nodes, back-solved so the 1.0-CPU, 1 GB
/// monolithic reference emits 0.0053 g per 254.85 ms inference at 530 g/kWh.
double CalibratedPerCpuWatts();
carbon::PowerModel CalibratedPowerModel();

/// Three-node heterogeneous setup (High/Medium/Green at 620/530/380 g/kWh),
/// the three mode presets, bundled models and a 0.05-step sweep.
ExperimentConfig DefaultConfig();

/// Parses YAML text. `source` labels error messages; relative file
/// references resolve against `base_dir`.
ExperimentConfig ParseConfig(std::string_view yaml_text, std::string_view source = "<config>",
                             const std::filesystem::path &base_dir = {});
ExperimentConfig LoadConfig(const std::filesystem::path &path);
/// Canonical, fully resolved YAML. ParseConfig(EmitConfig(c)) == c.
std::string EmitConfig(const ExperimentConfig &config);
/// SHA-256 (hex) of the canonical form, ignoring the output section.
std::string ConfigDigest(const ExperimentConfig &config);

/// Carbon weight `w_c` plus the remaining mass spread per `rule`.
scheduler::ScoreWeights SweepWeights(double w_c, Redistribution rule);
/// 0, step, 2*step, ... up to and including 1 (within round-off).
std::vector<double> SweepGrid(double step);

struct ComparisonRow {
  std::string model_id;
  std::string configuration;
  std::size_t result_index = 0;
  double latency_ms = 0.0;
  double throughput_rps = 0.0;
  double grams_per_inference = 0.0;
  double energy_kwh_per_inference = 0.0;
  std::optional<double> reduction_pct;
  double carbon_efficiency = 0.0;
};

struct SweepPoint {
  double w_c = 0.0;
  scheduler::ScoreWeights weights;
  std::size_t result_index = 0;
  std::string majority_node;
  std::vector<double> usage_percent;  // parallel to RunReport::node_ids
  double grams_per_inference = 0.0;
  double latency_ms = 0.0;
  std::optional<double> reduction_pct;
};

struct SweepSummary {
  std::string model_id;
  std::string lowest_intensity_node;
  // Smallest w_c whose majority node is the lowest-intensity node.
  std::optional<double> transition_w_c;
  // Every point at or above the transition keeps that node.
  bool upward_closed = false;
};

// A configuration that failed; the remaining configurations still run.
struct RunError {
  std::string model_id;
  std::string configuration;
  std::string message;
};

struct RunReport {
  int schema_version = kSchemaVersion;
  std::string kind;
  std::string config_digest;
  std::uint64_t seed = 0;
  std::vector<std::string> node_ids;
  std::vector<sim::SimResult> results;
  std::vector<ComparisonRow> rows;
  std::vector<SweepPoint> sweep;
  std::optional<SweepSummary> sweep_summary;
  std::vector<RunError> errors;
};

/// Monolithic baseline, the optional round-robin baseline and every mode, for
/// each configured model.
RunReport RunCompare(const ExperimentConfig &config);
/// One full workload per sweep point plus a monolithic reference.
RunReport RunSweep(const ExperimentConfig &config);

/// Writes report files into `dir` and returns their paths. Throws IoError.
std::vector<std::filesystem::path> EmitReport(const RunReport &report,
                                              const std::filesystem::path &dir,
                                              const std::vector<ReportFormat> &formats);

/// Individual renderers, exposed for tests and the CLI.
std::string RenderSummaryCsv(const RunReport &report);
std::string RenderNodeUsageCsv(const RunReport &report);
std::string RenderSweepCsv(const RunReport &report);
std::string RenderJson(const RunReport &report);
std::string RenderOverheadJson(const RunReport &report);
std::string RenderMarkdown(const RunReport &report);

}  // namespace ecoroute::experiment
