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
#include <cmath>
#include <fstream>
#include <iomanip>
#include <set>
#include <sstream>
#include <utility>

#include <fmt/format.h>
#include <openssl/evp.h>
#include <yaml-cpp/yaml.h>

#include "ecoroute/error.h"
#include "ecoroute/experiment.h"
#include "ecoroute/model_catalog.h"

namespace ecoroute::experiment {

namespace {

using partitioner::LayerDescriptor;
using partitioner::LayerKind;
using partitioner::ModelDescriptor;

// Monolithic reference calibration point.
constexpr double kReferenceGramsPerInference = 0.0053;
constexpr double kReferenceLatencyMs = 254.85;
constexpr double kReferenceGramsPerKwh = 530.0;

std::vector<carbon::CarbonIntensity> DefaultIntensityCatalog() {
  return {{620.0, "high-carbon"}, {530.0, "average"}, {380.0, "low-carbon"}};
}

NodeSpec DefaultMonolithicNode() {
  NodeSpec node;
  node.id = "Monolithic";
  node.cpu_quota = 1.0;
  node.mem_gb = 1.0;
  node.intensity = {kReferenceGramsPerKwh, "average"};
  node.power = CalibratedPowerModel();
  return node;
}

std::vector<scheduler::Mode> PresetModes() {
  return {scheduler::Mode::Performance(), scheduler::Mode::Green(), scheduler::Mode::Balanced()};
}

std::optional<scheduler::Mode> PresetByName(std::string_view name) {
  for (auto &mode : PresetModes()) {
    if (mode.name == name) return mode;
  }
  return std::nullopt;
}

// Reads YAML while keeping enough context to name the failing field and its
// line/column.
class Reader {
 public:
  Reader(std::string_view source, std::filesystem::path base_dir)
      : source_(source), base_dir_(std::move(base_dir)) {}

  [[noreturn]] void Fail(const YAML::Node &node, std::string_view field,
                         std::string_view message) const {
    const YAML::Mark mark = node.Mark();
    if (mark.is_null()) {
      throw ConfigError(fmt::format("{}: {}: {}", source_, field, message));
    }
    throw ConfigError(
        fmt::format("{}:{}:{}: {}: {}", source_, mark.line + 1, mark.column + 1, field, message));
  }

  void RequireMap(const YAML::Node &node, std::string_view field) const {
    if (!node.IsMap()) Fail(node, field, "expected a mapping");
  }

  void CheckKeys(const YAML::Node &node, std::string_view field,
                 std::initializer_list<std::string_view> allowed) const {
    RequireMap(node, field);
    for (const auto &kv : node) {
      const auto key = kv.first.as<std::string>();
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        Fail(kv.first, fmt::format("{}.{}", field, key), "unknown key");
      }
    }
  }

  template <typename T>
  T Scalar(const YAML::Node &node, std::string_view field) const {
    if (!node.IsScalar()) Fail(node, field, "expected a scalar");
    try {
      return node.as<T>();
    } catch (const YAML::Exception &) {
      Fail(node, field, fmt::format("cannot parse '{}'", node.Scalar()));
    }
  }

  template <typename T>
  T Get(const YAML::Node &map, const char *key, std::string_view path, T fallback) const {
    const YAML::Node v = map[key];
    if (!v) return fallback;
    return Scalar<T>(v, fmt::format("{}.{}", path, key));
  }

  template <typename T>
  T Require(const YAML::Node &map, const char *key, std::string_view path) const {
    const YAML::Node v = map[key];
    if (!v) Fail(map, fmt::format("{}.{}", path, key), "required key is missing");
    return Scalar<T>(v, fmt::format("{}.{}", path, key));
  }

  YAML::Node LoadFile(const YAML::Node &ref, std::string_view field) const {
    const auto rel = Scalar<std::string>(ref, field);
    const std::filesystem::path path = base_dir_.empty() ? std::filesystem::path(rel) : base_dir_ / rel;
    try {
      return YAML::LoadFile(path.string());
    } catch (const YAML::BadFile &) {
      Fail(ref, field, fmt::format("cannot open '{}'", path.string()));
    } catch (const YAML::Exception &e) {
      Fail(ref, field, fmt::format("'{}': {}", path.string(), e.what()));
    }
  }

  const std::string &source() const { return source_; }

 private:
  std::string source_;
  std::filesystem::path base_dir_;
};

carbon::PowerModel ParsePower(const Reader &r, const YAML::Node &node, std::string_view path,
                              const carbon::PowerModel &fallback) {
  r.CheckKeys(node, path, {"base_w", "per_cpu_w", "ram_w_per_gb"});
  carbon::PowerModel pm;
  pm.base_w = r.Get<double>(node, "base_w", path, fallback.base_w);
  pm.per_cpu_w = r.Get<double>(node, "per_cpu_w", path, fallback.per_cpu_w);
  pm.ram_w_per_gb = r.Get<double>(node, "ram_w_per_gb", path, fallback.ram_w_per_gb);
  try {
    pm.Validate();
  } catch (const InvalidInput &e) {
    r.Fail(node, path, e.what());
  }
  return pm;
}

std::vector<carbon::CarbonIntensity> ParseIntensityList(const Reader &r, const YAML::Node &list,
                                                        std::string_view path) {
  if (!list.IsSequence()) r.Fail(list, path, "expected a list of {region_label, grams_per_kwh}");
  std::vector<carbon::CarbonIntensity> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto entry_path = fmt::format("{}[{}]", path, i);
    const YAML::Node e = list[i];
    r.CheckKeys(e, entry_path, {"region_label", "grams_per_kwh"});
    carbon::CarbonIntensity ci;
    ci.region_label = r.Require<std::string>(e, "region_label", entry_path);
    ci.grams_per_kwh = r.Require<double>(e, "grams_per_kwh", entry_path);
    if (!(ci.grams_per_kwh > 0.0)) r.Fail(e, entry_path + ".grams_per_kwh", "must be > 0");
    for (const auto &prev : out) {
      if (prev.region_label == ci.region_label) {
        r.Fail(e, entry_path, fmt::format("duplicate region '{}'", ci.region_label));
      }
    }
    out.push_back(std::move(ci));
  }
  return out;
}

NodeSpec ParseNode(const Reader &r, const YAML::Node &n, std::string_view path,
                   const carbon::StaticIntensityProvider &intensities,
                   const carbon::PowerModel &power_defaults) {
  r.CheckKeys(n, path,
              {"id", "cpu_quota", "mem_gb", "region", "grams_per_kwh", "latency_ms", "power"});
  NodeSpec node;
  node.id = r.Require<std::string>(n, "id", path);
  node.cpu_quota = r.Require<double>(n, "cpu_quota", path);
  node.mem_gb = r.Require<double>(n, "mem_gb", path);
  node.latency_ms = r.Get<double>(n, "latency_ms", path, 0.0);
  const auto region = r.Get<std::string>(n, "region", path, "");
  if (n["grams_per_kwh"]) {
    node.intensity = {r.Require<double>(n, "grams_per_kwh", path), region};
  } else if (!region.empty()) {
    auto found = intensities.Lookup(region);
    if (!found) {
      r.Fail(n["region"], fmt::format("{}.region", path),
             fmt::format("region '{}' is not in the intensity catalog", region));
    }
    node.intensity = *found;
  } else {
    r.Fail(n, path, "node needs either 'region' or 'grams_per_kwh'");
  }
  node.power = n["power"] ? ParsePower(r, n["power"], fmt::format("{}.power", path), power_defaults)
                          : power_defaults;
  try {
    node.Validate();
  } catch (const InvalidInput &e) {
    r.Fail(n, path, e.what());
  }
  return node;
}

LayerDescriptor ParseLayer(const Reader &r, const YAML::Node &n, std::string_view path) {
  r.CheckKeys(n, path, {"kind", "name", "k_h", "k_w", "c_in", "c_out", "n_in", "n_out",
                        "params_count", "output_activation_size"});
  LayerDescriptor l;
  try {
    l.kind = partitioner::ParseLayerKind(r.Require<std::string>(n, "kind", path));
  } catch (const InvalidInput &e) {
    r.Fail(n["kind"], fmt::format("{}.kind", path), e.what());
  }
  l.name = r.Get<std::string>(n, "name", path, "");
  l.kernel_h = r.Get<std::int64_t>(n, "k_h", path, 0);
  l.kernel_w = r.Get<std::int64_t>(n, "k_w", path, 0);
  l.in_channels = r.Get<std::int64_t>(n, "c_in", path, 0);
  l.out_channels = r.Get<std::int64_t>(n, "c_out", path, 0);
  l.in_features = r.Get<std::int64_t>(n, "n_in", path, 0);
  l.out_features = r.Get<std::int64_t>(n, "n_out", path, 0);
  l.params_count = r.Get<std::int64_t>(n, "params_count", path, 0);
  l.output_activation_size = r.Get<std::int64_t>(n, "output_activation_size", path, 0);
  try {
    l.Validate();
  } catch (const InvalidInput &e) {
    r.Fail(n, path, e.what());
  }
  return l;
}

std::vector<ModelDescriptor> ParseModelList(const Reader &r, const YAML::Node &list,
                                            std::string_view path) {
  if (!list.IsSequence()) r.Fail(list, path, "expected a list of models");
  std::vector<ModelDescriptor> out;
  for (std::size_t i = 0; i < list.size(); ++i) {
    const auto mpath = fmt::format("{}[{}]", path, i);
    const YAML::Node m = list[i];
    r.CheckKeys(m, mpath, {"id", "name", "base_latency_ms", "synthetic", "layers"});
    ModelDescriptor model;
    model.id = r.Require<std::string>(m, "id", mpath);
    model.name = r.Get<std::string>(m, "name", mpath, model.id);
    model.base_latency_ms = r.Require<double>(m, "base_latency_ms", mpath);
    model.synthetic = r.Get<bool>(m, "synthetic", mpath, false);
    const YAML::Node layers = m["layers"];
    if (!layers || !layers.IsSequence() || layers.size() == 0) {
      r.Fail(layers ? layers : m, mpath + ".layers", "expected a non-empty list of layers");
    }
    for (std::size_t j = 0; j < layers.size(); ++j) {
      model.layers.push_back(ParseLayer(r, layers[j], fmt::format("{}.layers[{}]", mpath, j)));
    }
    try {
      model.Validate();
    } catch (const InvalidInput &e) {
      r.Fail(m, mpath, e.what());
    }
    for (const auto &prev : out) {
      if (prev.id == model.id) r.Fail(m, mpath, fmt::format("duplicate model id '{}'", model.id));
    }
    out.push_back(std::move(model));
  }
  return out;
}

scheduler::Mode ParseMode(const Reader &r, const YAML::Node &n, std::string_view path) {
  if (n.IsScalar()) {
    const auto name = n.as<std::string>();
    if (auto preset = PresetByName(name)) return *preset;
    r.Fail(n, path, fmt::format("unknown preset '{}' (Performance, Green, Balanced)", name));
  }
  r.CheckKeys(n, path, {"name", "weights"});
  const auto name = r.Require<std::string>(n, "name", path);
  const YAML::Node w = n["weights"];
  if (!w) {
    if (auto preset = PresetByName(name)) return *preset;
    r.Fail(n, path, fmt::format("mode '{}' needs weights", name));
  }
  const auto wpath = fmt::format("{} '{}'.weights", path, name);
  r.CheckKeys(w, wpath, {"w_r", "w_l", "w_p", "w_b", "w_c"});
  scheduler::ScoreWeights weights{r.Require<double>(w, "w_r", wpath),
                                  r.Require<double>(w, "w_l", wpath),
                                  r.Require<double>(w, "w_p", wpath),
                                  r.Require<double>(w, "w_b", wpath),
                                  r.Require<double>(w, "w_c", wpath)};
  try {
    weights.Validate(fmt::format("mode '{}'", name));
  } catch (const InvalidInput &e) {
    r.Fail(w, fmt::format("{}.weights", path), e.what());
  }
  auto preset = PresetByName(name);
  if (preset && preset->weights == weights) return *preset;
  return scheduler::Mode::Custom(name, weights);
}

std::string FormatDouble(double v) { return fmt::format("{}", v); }

void EmitPower(YAML::Emitter &out, const carbon::PowerModel &pm) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "base_w" << YAML::Value << FormatDouble(pm.base_w);
  out << YAML::Key << "per_cpu_w" << YAML::Value << FormatDouble(pm.per_cpu_w);
  out << YAML::Key << "ram_w_per_gb" << YAML::Value << FormatDouble(pm.ram_w_per_gb);
  out << YAML::EndMap;
}

void EmitNode(YAML::Emitter &out, const NodeSpec &node) {
  out << YAML::BeginMap;
  out << YAML::Key << "id" << YAML::Value << node.id;
  out << YAML::Key << "cpu_quota" << YAML::Value << FormatDouble(node.cpu_quota);
  out << YAML::Key << "mem_gb" << YAML::Value << FormatDouble(node.mem_gb);
  if (!node.intensity.region_label.empty()) {
    out << YAML::Key << "region" << YAML::Value << node.intensity.region_label;
  }
  out << YAML::Key << "grams_per_kwh" << YAML::Value
      << FormatDouble(node.intensity.grams_per_kwh);
  out << YAML::Key << "latency_ms" << YAML::Value << FormatDouble(node.latency_ms);
  out << YAML::Key << "power" << YAML::Value;
  EmitPower(out, node.power);
  out << YAML::EndMap;
}

void EmitLayer(YAML::Emitter &out, const LayerDescriptor &l) {
  out << YAML::Flow << YAML::BeginMap;
  out << YAML::Key << "kind" << YAML::Value << std::string(partitioner::ToString(l.kind));
  if (!l.name.empty()) out << YAML::Key << "name" << YAML::Value << l.name;
  switch (l.kind) {
    case LayerKind::kConv2D:
      out << YAML::Key << "k_h" << YAML::Value << l.kernel_h;
      out << YAML::Key << "k_w" << YAML::Value << l.kernel_w;
      out << YAML::Key << "c_in" << YAML::Value << l.in_channels;
      out << YAML::Key << "c_out" << YAML::Value << l.out_channels;
      break;
    case LayerKind::kLinear:
      out << YAML::Key << "n_in" << YAML::Value << l.in_features;
      out << YAML::Key << "n_out" << YAML::Value << l.out_features;
      break;
    case LayerKind::kOther:
      out << YAML::Key << "params_count" << YAML::Value << l.params_count;
      break;
  }
  out << YAML::Key << "output_activation_size" << YAML::Value << l.output_activation_size;
  out << YAML::EndMap;
}

}  // namespace

std::string_view ToString(Redistribution rule) {
  return rule == Redistribution::kProportional ? "proportional" : "uniform";
}

std::string_view ToString(ReportFormat format) {
  switch (format) {
    case ReportFormat::kCsv:
      return "csv";
    case ReportFormat::kJson:
      return "json";
    case ReportFormat::kMarkdown:
      return "md";
  }
  return "csv";
}

ReportFormat ParseReportFormat(std::string_view text) {
  if (text == "csv") return ReportFormat::kCsv;
  if (text == "json") return ReportFormat::kJson;
  if (text == "md" || text == "markdown") return ReportFormat::kMarkdown;
  throw InvalidInput(fmt::format("unknown report format '{}' (csv, json, md)", text));
}

std::vector<ReportFormat> ParseReportFormats(std::string_view text) {
  std::vector<ReportFormat> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = text.find(',', pos);
    const auto token = text.substr(pos, comma == std::string_view::npos ? text.npos : comma - pos);
    if (!token.empty()) {
      const ReportFormat f = ParseReportFormat(token);
      if (std::find(out.begin(), out.end(), f) == out.end()) out.push_back(f);
    }
    if (comma == std::string_view::npos) break;
    pos = comma + 1;
  }
  if (out.empty()) throw InvalidInput("no report formats given");
  return out;
}

double CalibratedPerCpuWatts() {
  const double reference_watts = kReferenceGramsPerInference * carbon::kWattMillisPerKwh /
                                 (kReferenceGramsPerKwh * kReferenceLatencyMs);
  return reference_watts - carbon::kDefaultRamWattsPerGb * 1.0;
}

carbon::PowerModel CalibratedPowerModel() {
  return carbon::PowerModel{0.0, CalibratedPerCpuWatts(), carbon::kDefaultRamWattsPerGb};
}

ExperimentConfig DefaultConfig() {
  ExperimentConfig c;
  c.intensity_catalog = DefaultIntensityCatalog();
  const auto power = CalibratedPowerModel();
  c.nodes = {
      NodeSpec{"Node-High", 1.0, 1.0, {620.0, "high-carbon"}, power, 0.0, 0},
      NodeSpec{"Node-Medium", 0.6, 0.5, {530.0, "average"}, power, 0.0, 1},
      NodeSpec{"Node-Green", 0.4, 0.5, {380.0, "low-carbon"}, power, 0.0, 2},
  };
  c.modes = PresetModes();
  c.catalog = partitioner::BuiltinCatalog();
  c.builtin_catalog = true;
  for (const auto &m : c.catalog) c.models.push_back(m.id);
  c.workload.model_id = "MobileNetV2";
  c.workload.seed = c.seed;
  c.monolithic_node = DefaultMonolithicNode();
  c.sweep = SweepSpec{SweepGrid(0.05), Redistribution::kProportional};
  return c;
}

void ExperimentConfig::Validate() const {
  auto fail = [](std::string_view field, std::string_view msg) {
    throw ConfigError(fmt::format("{}: {}", field, msg));
  };
  if (schema_version != kSchemaVersion) {
    fail("schema_version", fmt::format("unsupported version {}", schema_version));
  }
  if (nodes.empty()) fail("nodes", "at least one node is required");
  std::set<std::string> ids;
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    try {
      nodes[i].Validate();
    } catch (const InvalidInput &e) {
      fail(fmt::format("nodes[{}]", i), e.what());
    }
    if (!ids.insert(nodes[i].id).second) {
      fail(fmt::format("nodes[{}]", i), fmt::format("duplicate node id '{}'", nodes[i].id));
    }
  }
  if (modes.empty()) fail("modes", "at least one mode is required");
  for (std::size_t i = 0; i < modes.size(); ++i) {
    try {
      modes[i].weights.Validate(fmt::format("mode '{}'", modes[i].name));
    } catch (const InvalidInput &e) {
      fail(fmt::format("modes[{}]", i), e.what());
    }
  }
  if (models.empty()) fail("models", "at least one model is required");
  for (std::size_t i = 0; i < models.size(); ++i) {
    if (!partitioner::FindModel(catalog, models[i])) {
      fail(fmt::format("models[{}]", i), fmt::format("unknown model id '{}'", models[i]));
    }
  }
  if (!partitioner::FindModel(catalog, workload.model_id)) {
    fail("workload.model", fmt::format("unknown model id '{}'", workload.model_id));
  }
  try {
    workload.Validate();
    sim.Validate();
  } catch (const InvalidInput &e) {
    fail("workload/scheduler/carbon", e.what());
  }
  if (monolithic_pinned.empty()) {
    try {
      monolithic_node.Validate();
    } catch (const InvalidInput &e) {
      fail("baselines.monolithic.node", e.what());
    }
  } else if (!ids.count(monolithic_pinned)) {
    fail("baselines.monolithic.pinned", fmt::format("unknown node '{}'", monolithic_pinned));
  }
  if (sweep) {
    if (sweep->carbon_weights.empty()) fail("sweep.w_c", "sweep axis is empty");
    for (double w : sweep->carbon_weights) {
      if (!(w >= 0.0 && w <= 1.0)) fail("sweep.w_c", fmt::format("{} is outside [0,1]", w));
    }
  }
  if (output.formats.empty()) fail("output.formats", "at least one format is required");
}

const ModelDescriptor &ExperimentConfig::Model(std::string_view id) const {
  for (const auto &m : catalog) {
    if (m.id == id) return m;
  }
  throw ConfigError(fmt::format("unknown model id '{}'", id));
}

ExperimentConfig ParseConfig(std::string_view yaml_text, std::string_view source,
                             const std::filesystem::path &base_dir) {
  const Reader r(source, base_dir);
  YAML::Node root;
  try {
    root = YAML::Load(std::string(yaml_text));
  } catch (const YAML::ParserException &e) {
    throw ConfigError(fmt::format("{}:{}:{}: parse error: {}", source, e.mark.line + 1,
                                  e.mark.column + 1, e.msg));
  }
  if (!root || root.IsNull()) throw ConfigError(fmt::format("{}: config is empty", source));
  r.CheckKeys(root, "config",
              {"schema_version", "seed", "intensity_catalog", "power_defaults", "nodes", "models",
               "model_catalog", "modes", "workload", "scheduler", "carbon", "baselines", "sweep",
               "output"});

  ExperimentConfig c;
  c.schema_version = r.Get<int>(root, "schema_version", "config", kSchemaVersion);
  if (c.schema_version != kSchemaVersion) {
    r.Fail(root["schema_version"], "schema_version",
           fmt::format("unsupported version {}", c.schema_version));
  }
  c.seed = r.Get<std::uint64_t>(root, "seed", "config", c.seed);

  if (const YAML::Node ic = root["intensity_catalog"]) {
    c.intensity_catalog = ic.IsScalar()
                              ? ParseIntensityList(r, r.LoadFile(ic, "intensity_catalog"),
                                                   "intensity_catalog")
                              : ParseIntensityList(r, ic, "intensity_catalog");
  } else {
    c.intensity_catalog = DefaultIntensityCatalog();
  }
  const carbon::StaticIntensityProvider intensities(c.intensity_catalog);

  carbon::PowerModel power_defaults = CalibratedPowerModel();
  if (const YAML::Node pd = root["power_defaults"]) {
    power_defaults = ParsePower(r, pd, "power_defaults", power_defaults);
  }

  const YAML::Node nodes = root["nodes"];
  if (!nodes || !nodes.IsSequence() || nodes.size() == 0) {
    r.Fail(nodes ? nodes : root, "nodes", "expected a non-empty list of nodes");
  }
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    NodeSpec node =
        ParseNode(r, nodes[i], fmt::format("nodes[{}]", i), intensities, power_defaults);
    node.declaration_index = static_cast<int>(i);
    for (const auto &prev : c.nodes) {
      if (prev.id == node.id) {
        r.Fail(nodes[i], fmt::format("nodes[{}]", i), fmt::format("duplicate node id '{}'", node.id));
      }
    }
    c.nodes.push_back(std::move(node));
  }

  if (const YAML::Node mc = root["model_catalog"]) {
    if (mc.IsScalar() && mc.as<std::string>() == "builtin") {
      c.catalog = partitioner::BuiltinCatalog();
    } else if (mc.IsScalar()) {
      YAML::Node file = r.LoadFile(mc, "model_catalog");
      if (file.IsMap() && file["models"]) file = file["models"];
      c.catalog = ParseModelList(r, file, "model_catalog");
      c.builtin_catalog = false;
    } else {
      c.catalog = ParseModelList(r, mc, "model_catalog");
      c.builtin_catalog = false;
    }
  } else {
    c.catalog = partitioner::BuiltinCatalog();
  }

  if (const YAML::Node models = root["models"]) {
    if (!models.IsSequence()) r.Fail(models, "models", "expected a list of model ids");
    for (std::size_t i = 0; i < models.size(); ++i) {
      const auto field = fmt::format("models[{}]", i);
      auto id = r.Scalar<std::string>(models[i], field);
      if (!partitioner::FindModel(c.catalog, id)) {
        r.Fail(models[i], field, fmt::format("unknown model id '{}'", id));
      }
      c.models.push_back(std::move(id));
    }
  }

  if (const YAML::Node modes = root["modes"]) {
    if (!modes.IsSequence()) r.Fail(modes, "modes", "expected a list of modes");
    for (std::size_t i = 0; i < modes.size(); ++i) {
      c.modes.push_back(ParseMode(r, modes[i], fmt::format("modes[{}]", i)));
    }
  } else {
    c.modes = PresetModes();
  }

  if (const YAML::Node w = root["workload"]) {
    r.CheckKeys(w, "workload",
                {"model", "iterations", "batch_size", "arrival", "rate", "required_cpu",
                 "required_mem_gb", "warmup_per_node"});
    c.workload.model_id = r.Get<std::string>(w, "model", "workload", "");
    if (!c.workload.model_id.empty() && !partitioner::FindModel(c.catalog, c.workload.model_id)) {
      r.Fail(w["model"], "workload.model",
             fmt::format("unknown model id '{}'", c.workload.model_id));
    }
    c.workload.iterations = r.Get<std::int64_t>(w, "iterations", "workload", 50);
    c.workload.batch_size = r.Get<std::int64_t>(w, "batch_size", "workload", 1);
    const auto arrival = r.Get<std::string>(w, "arrival", "workload", "closed-loop");
    if (arrival == "closed-loop") {
      c.workload.arrival = sim::ArrivalKind::kClosedLoop;
    } else if (arrival == "poisson") {
      c.workload.arrival = sim::ArrivalKind::kPoisson;
    } else {
      r.Fail(w["arrival"], "workload.arrival",
             fmt::format("expected closed-loop or poisson, got '{}'", arrival));
    }
    c.workload.poisson_rate_per_s = r.Get<double>(w, "rate", "workload", 1.0);
    c.workload.required_cpu = r.Get<double>(w, "required_cpu", "workload", sim::kDefaultRequiredCpu);
    if (w["required_mem_gb"]) {
      c.workload.required_mem_gb = r.Require<double>(w, "required_mem_gb", "workload");
    }
    c.workload.warmup_per_node = r.Get<std::int64_t>(w, "warmup_per_node", "workload", 1);
    try {
      c.workload.Validate();
    } catch (const InvalidInput &e) {
      r.Fail(w, "workload", e.what());
    }
  }
  if (c.models.empty()) {
    c.models.push_back(c.workload.model_id.empty() ? c.catalog.front().id : c.workload.model_id);
  }
  if (c.workload.model_id.empty()) c.workload.model_id = c.models.front();
  c.workload.seed = c.seed;

  if (const YAML::Node s = root["scheduler"]) {
    r.CheckKeys(s, "scheduler", {"load_max", "latency_threshold_ms", "overhead_frac"});
    c.sim.filters.load_max = r.Get<double>(s, "load_max", "scheduler", c.sim.filters.load_max);
    c.sim.filters.latency_threshold_ms = r.Get<double>(
        s, "latency_threshold_ms", "scheduler", c.sim.filters.latency_threshold_ms);
    c.sim.overhead_frac = r.Get<double>(s, "overhead_frac", "scheduler", c.sim.overhead_frac);
  }
  if (const YAML::Node cb = root["carbon"]) {
    r.CheckKeys(cb, "carbon", {"pue", "apportion_cpu_weight", "sample_period_s"});
    c.sim.pue = r.Get<double>(cb, "pue", "carbon", c.sim.pue);
    c.sim.apportion_cpu_weight =
        r.Get<double>(cb, "apportion_cpu_weight", "carbon", c.sim.apportion_cpu_weight);
    c.sim.sample_period_s = r.Get<double>(cb, "sample_period_s", "carbon", c.sim.sample_period_s);
  }
  try {
    c.sim.Validate();
  } catch (const InvalidInput &e) {
    r.Fail(root["scheduler"] ? root["scheduler"] : root, "scheduler/carbon", e.what());
  }

  c.monolithic_node = DefaultMonolithicNode();
  c.monolithic_node.power = power_defaults;
  if (const YAML::Node b = root["baselines"]) {
    r.CheckKeys(b, "baselines", {"monolithic", "round_robin"});
    c.round_robin_baseline = r.Get<bool>(b, "round_robin", "baselines", true);
    if (const YAML::Node m = b["monolithic"]) {
      r.CheckKeys(m, "baselines.monolithic", {"node", "pinned"});
      if (m["node"] && m["pinned"]) {
        r.Fail(m, "baselines.monolithic", "give either 'node' or 'pinned', not both");
      }
      if (m["node"]) {
        c.monolithic_node = ParseNode(r, m["node"], "baselines.monolithic.node", intensities,
                                      power_defaults);
      }
      if (m["pinned"]) {
        c.monolithic_pinned = r.Require<std::string>(m, "pinned", "baselines.monolithic");
        const bool known = std::any_of(c.nodes.begin(), c.nodes.end(),
                                       [&](const NodeSpec &n) { return n.id == c.monolithic_pinned; });
        if (!known) {
          r.Fail(m["pinned"], "baselines.monolithic.pinned",
                 fmt::format("unknown node '{}'", c.monolithic_pinned));
        }
      }
    }
  }

  if (const YAML::Node s = root["sweep"]) {
    r.CheckKeys(s, "sweep", {"w_c", "step", "redistribution"});
    SweepSpec spec;
    if (s["w_c"] && s["step"]) r.Fail(s, "sweep", "give either 'w_c' or 'step', not both");
    if (const YAML::Node axis = s["w_c"]) {
      if (!axis.IsSequence() || axis.size() == 0) {
        r.Fail(axis, "sweep.w_c", "sweep axis must be a non-empty list");
      }
      for (std::size_t i = 0; i < axis.size(); ++i) {
        const auto field = fmt::format("sweep.w_c[{}]", i);
        const double w = r.Scalar<double>(axis[i], field);
        if (!(w >= 0.0 && w <= 1.0)) r.Fail(axis[i], field, fmt::format("{} is outside [0,1]", w));
        spec.carbon_weights.push_back(w);
      }
    } else {
      const double step = r.Get<double>(s, "step", "sweep", 0.05);
      try {
        spec.carbon_weights = SweepGrid(step);
      } catch (const InvalidInput &e) {
        r.Fail(s, "sweep.step", e.what());
      }
    }
    const auto rule = r.Get<std::string>(s, "redistribution", "sweep", "proportional");
    if (rule == "proportional") {
      spec.redistribution = Redistribution::kProportional;
    } else if (rule == "uniform") {
      spec.redistribution = Redistribution::kUniform;
    } else {
      r.Fail(s["redistribution"], "sweep.redistribution",
             fmt::format("expected proportional or uniform, got '{}'", rule));
    }
    c.sweep = std::move(spec);
  }

  if (const YAML::Node o = root["output"]) {
    r.CheckKeys(o, "output", {"dir", "formats"});
    c.output.dir = r.Get<std::string>(o, "dir", "output", c.output.dir);
    if (const YAML::Node f = o["formats"]) {
      if (!f.IsSequence()) r.Fail(f, "output.formats", "expected a list");
      c.output.formats.clear();
      for (std::size_t i = 0; i < f.size(); ++i) {
        const auto field = fmt::format("output.formats[{}]", i);
        try {
          c.output.formats.push_back(ParseReportFormat(r.Scalar<std::string>(f[i], field)));
        } catch (const InvalidInput &e) {
          r.Fail(f[i], field, e.what());
        }
      }
    }
  }

  try {
    c.Validate();
  } catch (const ConfigError &e) {
    throw ConfigError(fmt::format("{}: {}", source, e.what()));
  }
  return c;
}

ExperimentConfig LoadConfig(const std::filesystem::path &path) {
  std::ifstream in(path);
  if (!in) throw IoError(fmt::format("{}: cannot open config file", path.string()));
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str(), path.string(), path.parent_path());
}

std::string EmitConfig(const ExperimentConfig &c) {
  YAML::Emitter out;
  out << YAML::BeginMap;
  out << YAML::Key << "schema_version" << YAML::Value << c.schema_version;
  out << YAML::Key << "seed" << YAML::Value << c.seed;

  out << YAML::Key << "intensity_catalog" << YAML::Value << YAML::BeginSeq;
  for (const auto &ci : c.intensity_catalog) {
    out << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "region_label" << YAML::Value << ci.region_label;
    out << YAML::Key << "grams_per_kwh" << YAML::Value << FormatDouble(ci.grams_per_kwh);
    out << YAML::EndMap;
  }
  out << YAML::EndSeq;

  out << YAML::Key << "nodes" << YAML::Value << YAML::BeginSeq;
  for (const auto &node : c.nodes) EmitNode(out, node);
  out << YAML::EndSeq;

  out << YAML::Key << "model_catalog" << YAML::Value;
  if (c.builtin_catalog) {
    out << "builtin";
  } else {
    out << YAML::BeginSeq;
    for (const auto &m : c.catalog) {
      out << YAML::BeginMap;
      out << YAML::Key << "id" << YAML::Value << m.id;
      out << YAML::Key << "name" << YAML::Value << m.name;
      out << YAML::Key << "base_latency_ms" << YAML::Value << FormatDouble(m.base_latency_ms);
      out << YAML::Key << "synthetic" << YAML::Value << m.synthetic;
      out << YAML::Key << "layers" << YAML::Value << YAML::BeginSeq;
      for (const auto &l : m.layers) EmitLayer(out, l);
      out << YAML::EndSeq << YAML::EndMap;
    }
    out << YAML::EndSeq;
  }

  out << YAML::Key << "models" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (const auto &id : c.models) out << id;
  out << YAML::EndSeq;

  out << YAML::Key << "modes" << YAML::Value << YAML::BeginSeq;
  for (const auto &mode : c.modes) {
    if (mode.kind != scheduler::ModeKind::kCustom) {
      out << mode.name;
      continue;
    }
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << mode.name;
    out << YAML::Key << "weights" << YAML::Value << YAML::Flow << YAML::BeginMap;
    out << YAML::Key << "w_r" << YAML::Value << FormatDouble(mode.weights.resource);
    out << YAML::Key << "w_l" << YAML::Value << FormatDouble(mode.weights.load);
    out << YAML::Key << "w_p" << YAML::Value << FormatDouble(mode.weights.performance);
    out << YAML::Key << "w_b" << YAML::Value << FormatDouble(mode.weights.balance);
    out << YAML::Key << "w_c" << YAML::Value << FormatDouble(mode.weights.carbon);
    out << YAML::EndMap << YAML::EndMap;
  }
  out << YAML::EndSeq;

  const auto &w = c.workload;
  out << YAML::Key << "workload" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "model" << YAML::Value << w.model_id;
  out << YAML::Key << "iterations" << YAML::Value << w.iterations;
  out << YAML::Key << "batch_size" << YAML::Value << w.batch_size;
  out << YAML::Key << "arrival" << YAML::Value << std::string(sim::ToString(w.arrival));
  out << YAML::Key << "rate" << YAML::Value << FormatDouble(w.poisson_rate_per_s);
  out << YAML::Key << "required_cpu" << YAML::Value << FormatDouble(w.required_cpu);
  if (w.required_mem_gb) {
    out << YAML::Key << "required_mem_gb" << YAML::Value << FormatDouble(*w.required_mem_gb);
  }
  out << YAML::Key << "warmup_per_node" << YAML::Value << w.warmup_per_node;
  out << YAML::EndMap;

  out << YAML::Key << "scheduler" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "load_max" << YAML::Value << FormatDouble(c.sim.filters.load_max);
  out << YAML::Key << "latency_threshold_ms" << YAML::Value
      << FormatDouble(c.sim.filters.latency_threshold_ms);
  out << YAML::Key << "overhead_frac" << YAML::Value << FormatDouble(c.sim.overhead_frac);
  out << YAML::EndMap;

  out << YAML::Key << "carbon" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "pue" << YAML::Value << FormatDouble(c.sim.pue);
  out << YAML::Key << "apportion_cpu_weight" << YAML::Value
      << FormatDouble(c.sim.apportion_cpu_weight);
  out << YAML::Key << "sample_period_s" << YAML::Value << FormatDouble(c.sim.sample_period_s);
  out << YAML::EndMap;

  out << YAML::Key << "baselines" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "monolithic" << YAML::Value << YAML::BeginMap;
  if (c.monolithic_pinned.empty()) {
    out << YAML::Key << "node" << YAML::Value;
    EmitNode(out, c.monolithic_node);
  } else {
    out << YAML::Key << "pinned" << YAML::Value << c.monolithic_pinned;
  }
  out << YAML::EndMap;
  out << YAML::Key << "round_robin" << YAML::Value << c.round_robin_baseline;
  out << YAML::EndMap;

  if (c.sweep) {
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "w_c" << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (double v : c.sweep->carbon_weights) out << FormatDouble(v);
    out << YAML::EndSeq;
    out << YAML::Key << "redistribution" << YAML::Value
        << std::string(ToString(c.sweep->redistribution));
    out << YAML::EndMap;
  }

  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "dir" << YAML::Value << c.output.dir;
  out << YAML::Key << "formats" << YAML::Value << YAML::Flow << YAML::BeginSeq;
  for (auto f : c.output.formats) out << std::string(ToString(f));
  out << YAML::EndSeq << YAML::EndMap;

  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

std::string ConfigDigest(const ExperimentConfig &config) {
  ExperimentConfig canonical = config;
  canonical.output = OutputSpec{};
  const std::string text = EmitConfig(canonical);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int length = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &length, EVP_sha256(), nullptr) != 1) {
    throw std::runtime_error("SHA-256 digest failed");
  }
  std::string hex;
  hex.reserve(length * 2);
  for (unsigned int i = 0; i < length; ++i) hex += fmt::format("{:02x}", digest[i]);
  return hex;
}

scheduler::ScoreWeights SweepWeights(double w_c, Redistribution rule) {
  if (!(w_c >= 0.0 && w_c <= 1.0)) {
    throw InvalidInput(fmt::format("sweep weight w_c must lie in [0,1], got {}", w_c));
  }
  const double rest = 1.0 - w_c;
  if (rule == Redistribution::kUniform) {
    return {rest / 4.0, rest / 4.0, rest / 4.0, rest / 4.0, w_c};
  }
  const auto perf = scheduler::Mode::Performance().weights;
  const double mass = perf.resource + perf.load + perf.performance + perf.balance;
  return {rest * perf.resource / mass, rest * perf.load / mass, rest * perf.performance / mass,
          rest * perf.balance / mass, w_c};
}

std::vector<double> SweepGrid(double step) {
  if (!(step > 0.0 && step <= 1.0)) {
    throw InvalidInput(fmt::format("sweep step must lie in (0,1], got {}", step));
  }
  std::vector<double> grid;
  const auto count = static_cast<std::int64_t>(std::floor(1.0 / step + 1e-9));
  for (std::int64_t i = 0; i <= count; ++i) {
    // Snap to 1e-9 so 0.05 * 11 prints as 0.55.
    grid.push_back(std::round(static_cast<double>(i) * step * 1e9) / 1e9);
  }
  return grid;
}

}  // namespace ecoroute::experiment
