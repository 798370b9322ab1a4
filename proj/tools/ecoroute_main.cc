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

// Command-line front end: compare, sweep, partition and validate.

#include <cstdio>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "ecoroute/error.h"
#include "ecoroute/experiment.h"
#include "ecoroute/partitioner.h"

namespace {

using namespace ecoroute;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitInvalidInput = 3;
constexpr int kExitIo = 4;

struct CommonFlags {
  std::string config_path;
  std::string out_dir;
  std::string formats;
  std::optional<std::uint64_t> seed;
};

experiment::ExperimentConfig ResolveConfig(const CommonFlags &flags) {
  auto config = flags.config_path.empty() ? experiment::DefaultConfig()
                                          : experiment::LoadConfig(flags.config_path);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.workload.seed = *flags.seed;
  }
  if (!flags.out_dir.empty()) config.output.dir = flags.out_dir;
  if (!flags.formats.empty()) config.output.formats = experiment::ParseReportFormats(flags.formats);
  config.Validate();
  return config;
}

void PrintComparison(const experiment::RunReport &report) {
  for (const auto &row : report.rows) {
    std::string reduction = "-";
    if (row.reduction_pct) reduction = fmt::format("{:+.1f}%", *row.reduction_pct);
    fmt::print("{:<16} {:<22} {:>9.2f} ms {:>9.6f} g/inf {:>8}\n", row.model_id,
               row.configuration, row.latency_ms, row.grams_per_inference, reduction);
  }
}

int EmitAndList(const experiment::RunReport &report, const experiment::ExperimentConfig &config) {
  for (const auto &path : experiment::EmitReport(report, config.output.dir, config.output.formats)) {
    fmt::print("wrote {}\n", path.string());
  }
  for (const auto &e : report.errors) {
    fmt::print(stderr, "error[simulation]: {} {}: {}\n", e.model_id, e.configuration, e.message);
  }
  return report.errors.empty() ? kExitOk : kExitOther;
}

int RunCompareCommand(const CommonFlags &flags) {
  const auto config = ResolveConfig(flags);
  const auto report = experiment::RunCompare(config);
  PrintComparison(report);
  return EmitAndList(report, config);
}

int RunSweepCommand(const CommonFlags &flags, std::optional<double> step) {
  auto config = ResolveConfig(flags);
  if (step) {
    if (!(*step > 0.0 && *step <= 1.0)) throw InvalidInput("--sweep-step must be in (0, 1]");
    auto sweep = config.sweep.value_or(experiment::SweepSpec{});
    sweep.carbon_weights = experiment::SweepGrid(*step);
    config.sweep = sweep;
  }
  if (!config.sweep) config.sweep = experiment::DefaultConfig().sweep;
  const auto report = experiment::RunSweep(config);
  for (const auto &p : report.sweep) {
    fmt::print("w_c={:<5.2f} majority={:<14} {:.6f} g/inf\n", p.w_c, p.majority_node,
               p.grams_per_inference);
  }
  if (report.sweep_summary && report.sweep_summary->transition_w_c) {
    fmt::print("transition at w_c={} ({})\n", *report.sweep_summary->transition_w_c,
               report.sweep_summary->upward_closed ? "upward-closed" : "not upward-closed");
  }
  return EmitAndList(report, config);
}

std::vector<double> ParseCapacities(const std::string &text) {
  std::vector<double> caps;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    try {
      std::size_t used = 0;
      caps.push_back(std::stod(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception &) {
      throw InvalidInput(fmt::format("--capacities: '{}' is not a number", item));
    }
  }
  return caps;
}

int RunPartitionCommand(const CommonFlags &flags, const std::string &model_id,
                        const std::string &capacities) {
  const auto config = ResolveConfig(flags);
  const auto &model = config.Model(model_id.empty() ? config.workload.model_id : model_id);
  std::vector<double> caps;
  if (capacities.empty()) {
    for (const auto &node : config.nodes) caps.push_back(node.cpu_quota);
  } else {
    caps = ParseCapacities(capacities);
  }
  const auto plan = partitioner::PartitionModel(model, caps);
  fmt::print("model {} ({} layers, cost {})\n", model.id, model.layers.size(),
             partitioner::ModelCost(model));
  for (const auto &seg : plan.segments) {
    fmt::print("  node {} layers [{}, {}) cost {} ratio {:.6g} cut_activation {}\n",
               seg.node_index, seg.begin, seg.end, seg.cost, seg.cost / caps[seg.node_index],
               seg.cut_activation_size);
  }
  fmt::print("bottleneck {:.6g}, total cut activation {}\n", plan.bottleneck,
             plan.total_cut_activation);
  return kExitOk;
}

int RunValidateCommand(const CommonFlags &flags, bool print_resolved) {
  const auto config = ResolveConfig(flags);
  if (print_resolved) {
    std::cout << experiment::EmitConfig(config);
  } else {
    fmt::print("ok: {} nodes, {} modes, {} models, digest {}\n", config.nodes.size(),
               config.modes.size(), config.models.size(), experiment::ConfigDigest(config));
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char **argv) {
  CLI::App app{"Carbon-aware scheduling simulator for partitioned inference"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::optional<double> sweep_step;
  std::string model_id;
  std::string capacities;
  bool print_resolved = false;

  auto add_common = [&](CLI::App *cmd) {
    cmd->add_option("--config", flags.config_path, "YAML experiment file (default: built-in setup)");
    cmd->add_option("--seed", flags.seed, "Override the workload seed");
  };
  auto add_output = [&](CLI::App *cmd) {
    cmd->add_option("--out", flags.out_dir, "Report directory");
    cmd->add_option("--format", flags.formats, "Comma-separated: csv,json,md");
  };

  auto *compare = app.add_subcommand("compare", "Baselines and every mode for each model");
  add_common(compare);
  add_output(compare);
  auto *sweep = app.add_subcommand("sweep", "Vary the carbon weight and track node choice");
  add_common(sweep);
  add_output(sweep);
  sweep->add_option("--sweep-step", sweep_step, "Grid step for w_c in [0, 1]");
  auto *partition = app.add_subcommand("partition", "Split a model's layers across nodes");
  add_common(partition);
  partition->add_option("--model", model_id, "Model id (default: workload model)");
  partition->add_option("--capacities", capacities,
                        "Comma-separated capacities (default: node CPU quotas)");
  auto *validate = app.add_subcommand("validate", "Check a config file");
  add_common(validate);
  validate->add_flag("--print-resolved", print_resolved, "Print the canonical resolved YAML");

  CLI11_PARSE(app, argc, argv);

  try {
    if (compare->parsed()) return RunCompareCommand(flags);
    if (sweep->parsed()) return RunSweepCommand(flags, sweep_step);
    if (partition->parsed()) return RunPartitionCommand(flags, model_id, capacities);
    if (validate->parsed()) return RunValidateCommand(flags, print_resolved);
  } catch (const ConfigError &e) {
    fmt::print(stderr, "error[config]: {}\n", e.what());
    return kExitConfig;
  } catch (const InvalidInput &e) {
    fmt::print(stderr, "error[invalid-input]: {}\n", e.what());
    return kExitInvalidInput;
  } catch (const IoError &e) {
    fmt::print(stderr, "error[io]: {}\n", e.what());
    return kExitIo;
  } catch (const std::exception &e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return kExitOther;
  }
  return kExitOther;
}
