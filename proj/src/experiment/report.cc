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

#include <fstream>
#include <algorithm>

#include <fmt/format.h>
#include <json.hpp>

#include "ecoroute/error.h"
#include "ecoroute/experiment.h"

namespace ecoroute::experiment {

namespace {

using Json = nlohmann::ordered_json;

std::string CsvField(const std::string &s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string quoted = "\"";
  for (char c : s) {
    if (c == '"') quoted += '"';
    quoted += c;
  }
  return quoted + "\"";
}

std::string Num(double v) { return fmt::format("{}", v); }

std::string OptNum(const std::optional<double> &v) { return v ? Num(*v) : ""; }

Json OptJson(const std::optional<double> &v) { return v ? Json(*v) : Json(nullptr); }

Json BreakdownJson(const scheduler::ScoreBreakdown &b) {
  return Json{{"s_r", b.resource}, {"s_l", b.load},   {"s_p", b.performance},
              {"s_b", b.balance},  {"s_c", b.carbon}, {"total", b.total}};
}

Json WeightsJson(const scheduler::ScoreWeights &w) {
  return Json{{"w_r", w.resource}, {"w_l", w.load},   {"w_p", w.performance},
              {"w_b", w.balance},  {"w_c", w.carbon}};
}

Json ResultJson(const sim::SimResult &r) {
  Json usage = Json::array();
  for (const auto &u : r.usage) {
    usage.push_back(Json{{"node_id", u.node_id},
                         {"tasks", u.tasks},
                         {"percent", u.percent},
                         {"energy_kwh", u.energy_kwh},
                         {"grams_co2", u.grams_co2},
                         {"apportioned_kwh", u.apportioned_kwh}});
  }
  Json tasks = Json::array();
  for (const auto &t : r.tasks) {
    tasks.push_back(Json{{"index", t.index},
                         {"node_id", t.rejected ? Json(nullptr) : Json(t.node_id)},
                         {"rejected", t.rejected},
                         {"arrival_ms", t.arrival_ms},
                         {"completion_ms", t.completion_ms},
                         {"latency_ms", t.latency_ms},
                         {"energy_kwh", t.energy_kwh},
                         {"grams_co2", t.grams_co2},
                         {"breakdown", t.breakdown ? BreakdownJson(*t.breakdown) : Json(nullptr)}});
  }
  return Json{{"label", r.label},
              {"model_id", r.model_id},
              {"completed", r.completed},
              {"rejected", r.rejected},
              {"inferences", r.inferences},
              {"mean_latency_ms", r.mean_latency_ms},
              {"makespan_s", r.makespan_s},
              {"throughput_rps", r.throughput_rps},
              {"total_energy_kwh", r.total_energy_kwh},
              {"total_grams", r.total_grams},
              {"grams_per_inference", r.grams_per_inference},
              {"carbon_efficiency", r.carbon_efficiency},
              {"host_energy",
               Json{{"kwh", r.host_energy.kwh},
                    {"duration_s", r.host_energy.duration_s},
                    {"source", std::string(carbon::ToString(r.host_energy.source))}}},
              {"usage", usage},
              {"tasks", tasks}};
}

void WriteFile(const std::filesystem::path &path, const std::string &content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("{}: cannot open for writing", path.string()));
  out << content;
  out.close();
  if (!out) throw IoError(fmt::format("{}: write failed", path.string()));
}

std::string Fixed(double v, int decimals) { return fmt::format("{:.{}f}", v, decimals); }

std::string Pct(const std::optional<double> &v) {
  if (!v) return "-";
  return fmt::format("{}{:.1f}%", *v > 0.0 ? "+" : "", *v);
}

}  // namespace

std::string RenderSummaryCsv(const RunReport &report) {
  std::string out =
      "model_id,configuration,completed,rejected,mean_latency_ms,throughput_rps,"
      "grams_per_inference,total_grams,total_energy_kwh,energy_kwh_per_inference,"
      "reduction_pct,carbon_efficiency\n";
  for (const auto &row : report.rows) {
    const auto &r = report.results.at(row.result_index);
    out += fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", CsvField(row.model_id),
                       CsvField(row.configuration), r.completed, r.rejected, Num(row.latency_ms),
                       Num(row.throughput_rps), Num(row.grams_per_inference), Num(r.total_grams),
                       Num(r.total_energy_kwh), Num(row.energy_kwh_per_inference),
                       OptNum(row.reduction_pct), Num(row.carbon_efficiency));
  }
  return out;
}

std::string RenderNodeUsageCsv(const RunReport &report) {
  std::string out =
      "model_id,configuration,node_id,tasks,percent,energy_kwh,grams_co2,apportioned_kwh\n";
  for (const auto &r : report.results) {
    for (const auto &u : r.usage) {
      out += fmt::format("{},{},{},{},{},{},{},{}\n", CsvField(r.model_id), CsvField(r.label),
                         CsvField(u.node_id), u.tasks, Num(u.percent), Num(u.energy_kwh),
                         Num(u.grams_co2), Num(u.apportioned_kwh));
    }
  }
  return out;
}

std::string RenderSweepCsv(const RunReport &report) {
  std::string out = "w_c,w_r,w_l,w_p,w_b,majority_node,grams_per_inference,mean_latency_ms,reduction_pct";
  for (const auto &id : report.node_ids) out += ",usage_pct_" + CsvField(id);
  out += "\n";
  for (const auto &p : report.sweep) {
    out += fmt::format("{},{},{},{},{},{},{},{},{}", Num(p.w_c), Num(p.weights.resource),
                       Num(p.weights.load), Num(p.weights.performance), Num(p.weights.balance),
                       CsvField(p.majority_node), Num(p.grams_per_inference), Num(p.latency_ms),
                       OptNum(p.reduction_pct));
    for (double u : p.usage_percent) out += "," + Num(u);
    out += "\n";
  }
  return out;
}

std::string RenderJson(const RunReport &report) {
  Json root;
  root["schema_version"] = report.schema_version;
  root["kind"] = report.kind;
  root["config_digest"] = report.config_digest;
  root["seed"] = report.seed;
  root["nodes"] = report.node_ids;
  Json rows = Json::array();
  for (const auto &row : report.rows) {
    rows.push_back(Json{{"model_id", row.model_id},
                        {"configuration", row.configuration},
                        {"result_index", row.result_index},
                        {"latency_ms", row.latency_ms},
                        {"throughput_rps", row.throughput_rps},
                        {"grams_per_inference", row.grams_per_inference},
                        {"energy_kwh_per_inference", row.energy_kwh_per_inference},
                        {"reduction_pct", OptJson(row.reduction_pct)},
                        {"carbon_efficiency", row.carbon_efficiency}});
  }
  root["comparison"] = rows;
  if (report.sweep_summary) {
    const auto &s = *report.sweep_summary;
    Json points = Json::array();
    for (const auto &p : report.sweep) {
      Json usage = Json::object();
      for (std::size_t i = 0; i < p.usage_percent.size() && i < report.node_ids.size(); ++i) {
        usage[report.node_ids[i]] = p.usage_percent[i];
      }
      points.push_back(Json{{"w_c", p.w_c},
                            {"weights", WeightsJson(p.weights)},
                            {"result_index", p.result_index},
                            {"majority_node", p.majority_node},
                            {"usage_percent", usage},
                            {"grams_per_inference", p.grams_per_inference},
                            {"latency_ms", p.latency_ms},
                            {"reduction_pct", OptJson(p.reduction_pct)}});
    }
    root["sweep"] = Json{{"model_id", s.model_id},
                         {"lowest_intensity_node", s.lowest_intensity_node},
                         {"transition_w_c", OptJson(s.transition_w_c)},
                         {"upward_closed", s.upward_closed},
                         {"points", points}};
  }
  Json results = Json::array();
  for (const auto &r : report.results) results.push_back(ResultJson(r));
  root["results"] = results;
  Json errors = Json::array();
  for (const auto &e : report.errors) {
    errors.push_back(
        Json{{"model_id", e.model_id}, {"configuration", e.configuration}, {"message", e.message}});
  }
  root["errors"] = errors;
  return root.dump(2) + "\n";
}

std::string RenderOverheadJson(const RunReport &report) {
  Json runs = Json::array();
  for (const auto &r : report.results) {
    Json entry{{"label", r.label},
               {"model_id", r.model_id},
               {"decisions", r.overhead_samples_ms.size()}};
    if (r.overhead_samples_ms.empty()) {
      entry["mean_ms"] = nullptr;
      entry["max_ms"] = nullptr;
    } else {
      entry["mean_ms"] = sim::MeasureSchedulingOverhead(r);
      entry["max_ms"] =
          *std::max_element(r.overhead_samples_ms.begin(), r.overhead_samples_ms.end());
    }
    runs.push_back(entry);
  }
  Json root{{"schema_version", report.schema_version},
            {"config_digest", report.config_digest},
            {"runs", runs}};
  return root.dump(2) + "\n";
}

std::string RenderMarkdown(const RunReport &report) {
  std::string md = fmt::format("# ecoroute {} report\n\nconfig digest: `{}`, seed: {}\n",
                               report.kind, report.config_digest, report.seed);

  // Rows grouped by model, in first-seen order.
  std::vector<std::string> models;
  for (const auto &row : report.rows) {
    if (std::find(models.begin(), models.end(), row.model_id) == models.end()) {
      models.push_back(row.model_id);
    }
  }

  if (report.kind == "compare") {
    for (const auto &model : models) {
      md += fmt::format("\n## Carbon footprint comparison ({})\n\n", model);
      md += "| Configuration | Latency (ms) | Throughput (req/s) | Carbon (gCO2/inf) | "
            "Reduction vs Mono (%) | Carbon efficiency (inf/gCO2) |\n";
      md += "|---|---:|---:|---:|---:|---:|\n";
      for (const auto &row : report.rows) {
        if (row.model_id != model) continue;
        md += fmt::format("| {} | {} | {} | {} | {} | {} |\n", row.configuration,
                          Fixed(row.latency_ms, 2), Fixed(row.throughput_rps, 2),
                          Fixed(row.grams_per_inference, 6), Pct(row.reduction_pct),
                          Fixed(row.carbon_efficiency, 1));
      }
    }

    md += "\n## Multi-model comparison\n\n";
    md += "| Model | Mode | Latency (ms) | Carbon (gCO2/inf) | Reduction (%) |\n";
    md += "|---|---|---:|---:|---:|\n";
    for (const auto &row : report.rows) {
      if (row.configuration != "Monolithic" && row.configuration != "CE-Green") continue;
      md += fmt::format("| {} | {} | {} | {} | {} |\n", row.model_id, row.configuration,
                        Fixed(row.latency_ms, 2), Fixed(row.grams_per_inference, 6),
                        Pct(row.reduction_pct));
    }

    for (const auto &model : models) {
      md += fmt::format("\n## Node usage distribution, % of tasks ({})\n\n| Mode |", model);
      for (const auto &id : report.node_ids) md += fmt::format(" {} |", id);
      md += "\n|---|";
      for (std::size_t i = 0; i < report.node_ids.size(); ++i) md += "---:|";
      md += "\n";
      for (const auto &row : report.rows) {
        const auto &r = report.results.at(row.result_index);
        if (row.model_id != model || r.usage.size() != report.node_ids.size()) continue;
        md += fmt::format("| {} |", row.configuration);
        for (const auto &u : r.usage) md += fmt::format(" {}% |", Fixed(u.percent, 1));
        md += "\n";
      }
    }
  }

  if (report.sweep_summary) {
    const auto &s = *report.sweep_summary;
    md += fmt::format("\n## Weight sweep ({})\n\n| w_c | Majority node |", s.model_id);
    for (const auto &id : report.node_ids) md += fmt::format(" {} |", id);
    md += " Carbon (gCO2/inf) | Latency (ms) | Reduction vs Mono (%) |\n|---:|---|";
    for (std::size_t i = 0; i < report.node_ids.size(); ++i) md += "---:|";
    md += "---:|---:|---:|\n";
    for (const auto &p : report.sweep) {
      md += fmt::format("| {} | {} |", Fixed(p.w_c, 2), p.majority_node);
      for (double u : p.usage_percent) md += fmt::format(" {}% |", Fixed(u, 1));
      md += fmt::format(" {} | {} | {} |\n", Fixed(p.grams_per_inference, 6),
                        Fixed(p.latency_ms, 2), Pct(p.reduction_pct));
    }
    if (s.transition_w_c) {
      md += fmt::format("\nTransition to {} at w_c = {} ({}).\n", s.lowest_intensity_node,
                        Fixed(*s.transition_w_c, 2),
                        s.upward_closed ? "holds for every larger w_c"
                                        : "not stable for larger w_c");
    } else {
      md += fmt::format("\nNo sweep point routes a majority of tasks to {}.\n",
                        s.lowest_intensity_node);
    }
  }
  if (!report.errors.empty()) {
    md += "\n## Failed configurations\n\n| Model | Configuration | Error |\n|---|---|---|\n";
    for (const auto &e : report.errors) {
      md += fmt::format("| {} | {} | {} |\n", e.model_id, e.configuration, e.message);
    }
  }
  return md;
}

std::vector<std::filesystem::path> EmitReport(const RunReport &report,
                                              const std::filesystem::path &dir,
                                              const std::vector<ReportFormat> &formats) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("{}: cannot create directory: {}", dir.string(), ec.message()));
  std::vector<std::filesystem::path> written;
  auto write = [&](const char *name, const std::string &content) {
    const auto path = dir / name;
    WriteFile(path, content);
    written.push_back(path);
  };
  for (auto format : formats) {
    switch (format) {
      case ReportFormat::kCsv:
        write("summary.csv", RenderSummaryCsv(report));
        write("node_usage.csv", RenderNodeUsageCsv(report));
        if (report.kind == "sweep") write("sweep.csv", RenderSweepCsv(report));
        break;
      case ReportFormat::kJson:
        write("report.json", RenderJson(report));
        write("overhead.json", RenderOverheadJson(report));
        break;
      case ReportFormat::kMarkdown:
        write("report.md", RenderMarkdown(report));
        break;
    }
  }
  return written;
}

}  // namespace ecoroute::experiment
