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

#include "ecoroute/partitioner.h"

#include <algorithm>
#include <cctype>
#include <limits>
#include <optional>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute::partitioner {

std::string_view ToString(LayerKind kind) {
  switch (kind) {
    case LayerKind::kConv2D:
      return "Conv2D";
    case LayerKind::kLinear:
      return "Linear";
    case LayerKind::kOther:
      return "Other";
  }
  return "Other";
}

LayerKind ParseLayerKind(std::string_view text) {
  std::string lower(text);
  std::transform(lower.begin(), lower.end(), lower.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (lower == "conv2d") return LayerKind::kConv2D;
  if (lower == "linear") return LayerKind::kLinear;
  if (lower == "other") return LayerKind::kOther;
  throw InvalidInput(fmt::format("unknown layer kind '{}' (expected Conv2D, Linear or Other)",
                                 text));
}

LayerDescriptor LayerDescriptor::Conv2D(std::string name, std::int64_t kernel_h,
                                        std::int64_t kernel_w, std::int64_t in_channels,
                                        std::int64_t out_channels,
                                        std::int64_t output_activation_size) {
  LayerDescriptor l;
  l.kind = LayerKind::kConv2D;
  l.name = std::move(name);
  l.kernel_h = kernel_h;
  l.kernel_w = kernel_w;
  l.in_channels = in_channels;
  l.out_channels = out_channels;
  l.output_activation_size = output_activation_size;
  return l;
}

LayerDescriptor LayerDescriptor::Linear(std::string name, std::int64_t in_features,
                                        std::int64_t out_features,
                                        std::int64_t output_activation_size) {
  LayerDescriptor l;
  l.kind = LayerKind::kLinear;
  l.name = std::move(name);
  l.in_features = in_features;
  l.out_features = out_features;
  l.output_activation_size = output_activation_size;
  return l;
}

LayerDescriptor LayerDescriptor::Other(std::string name, std::int64_t params_count,
                                       std::int64_t output_activation_size) {
  LayerDescriptor l;
  l.kind = LayerKind::kOther;
  l.name = std::move(name);
  l.params_count = params_count;
  l.output_activation_size = output_activation_size;
  return l;
}

void LayerDescriptor::Validate() const {
  auto require_positive = [&](std::int64_t v, const char *field) {
    if (v <= 0) {
      throw InvalidInput(fmt::format("layer '{}' ({}): {} must be positive, got {}", name,
                                     ToString(kind), field, v));
    }
  };
  switch (kind) {
    case LayerKind::kConv2D:
      require_positive(kernel_h, "k_h");
      require_positive(kernel_w, "k_w");
      require_positive(in_channels, "c_in");
      require_positive(out_channels, "c_out");
      break;
    case LayerKind::kLinear:
      require_positive(in_features, "n_in");
      require_positive(out_features, "n_out");
      break;
    case LayerKind::kOther:
      if (params_count < 0) {
        throw InvalidInput(
            fmt::format("layer '{}': params_count must be >= 0, got {}", name, params_count));
      }
      break;
  }
  if (output_activation_size < 0) {
    throw InvalidInput(fmt::format("layer '{}': output_activation_size must be >= 0", name));
  }
}

void ModelDescriptor::Validate() const {
  if (id.empty()) throw InvalidInput("model id must not be empty");
  if (layers.empty()) throw InvalidInput(fmt::format("model '{}' has no layers", id));
  if (!(base_latency_ms > 0.0)) {
    throw InvalidInput(
        fmt::format("model '{}': base_latency_ms must be > 0, got {}", id, base_latency_ms));
  }
  for (const auto &layer : layers) {
    try {
      layer.Validate();
    } catch (const InvalidInput &e) {
      throw InvalidInput(fmt::format("model '{}': {}", id, e.what()));
    }
  }
}

double LayerCost(const LayerDescriptor &layer) {
  layer.Validate();
  switch (layer.kind) {
    case LayerKind::kConv2D:
      return static_cast<double>(layer.kernel_h * layer.kernel_w * layer.in_channels *
                                 layer.out_channels);
    case LayerKind::kLinear:
      return static_cast<double>(layer.in_features * layer.out_features);
    case LayerKind::kOther:
      return static_cast<double>(layer.params_count);
  }
  return 0.0;
}

double SegmentCost(const ModelDescriptor &model, std::size_t begin, std::size_t end) {
  if (begin > end || end > model.layers.size()) {
    throw InvalidInput(fmt::format("segment [{}, {}) out of range for {} layers", begin, end,
                                   model.layers.size()));
  }
  double total = 0.0;
  for (std::size_t i = begin; i < end; ++i) total += LayerCost(model.layers[i]);
  return total;
}

double ModelCost(const ModelDescriptor &model) {
  return SegmentCost(model, 0, model.layers.size());
}

PartitionPlan PartitionModel(const ModelDescriptor &model, std::span<const double> capacities) {
  const std::size_t num_layers = model.layers.size();
  const std::size_t k_total = capacities.size();
  if (k_total == 0) throw InvalidInput("partitioning needs at least one capacity");
  if (num_layers == 0) throw InvalidInput(fmt::format("model '{}' has no layers", model.id));
  if (k_total > num_layers) {
    throw InvalidInput(fmt::format("cannot split {} layers into {} non-empty segments",
                                   num_layers, k_total));
  }
  for (double c : capacities) {
    if (!(c > 0.0)) throw InvalidInput(fmt::format("capacities must be positive, got {}", c));
  }

  std::vector<double> prefix(num_layers + 1, 0.0);
  for (std::size_t i = 0; i < num_layers; ++i) {
    prefix[i + 1] = prefix[i] + LayerCost(model.layers[i]);
  }
  auto ratio = [&](std::size_t k, std::size_t i, std::size_t j) {
    return (prefix[j] - prefix[i]) / capacities[k];
  };

  // Pass 1: optimal bottleneck. best[k][j] covers layers [0, j) with k segments.
  constexpr double kInf = std::numeric_limits<double>::infinity();
  std::vector<std::vector<double>> best(k_total + 1, std::vector<double>(num_layers + 1, kInf));
  best[0][0] = -kInf;
  for (std::size_t k = 1; k <= k_total; ++k) {
    for (std::size_t j = k; j <= num_layers; ++j) {
      for (std::size_t i = k - 1; i < j; ++i) {
        if (best[k - 1][i] == kInf) continue;
        best[k][j] = std::min(best[k][j], std::max(best[k - 1][i], ratio(k - 1, i, j)));
      }
    }
  }
  const double bottleneck = best[k_total][num_layers];

  // Pass 2: minimal cut traffic over suffixes, every segment within the
  // bottleneck. comm[k][i] covers layers [i, L) with segments k..K-1.
  std::vector<std::vector<std::optional<std::int64_t>>> comm(
      k_total + 1, std::vector<std::optional<std::int64_t>>(num_layers + 1));
  comm[k_total][num_layers] = 0;
  auto cut_cost = [&](std::size_t j) -> std::int64_t {
    return j < num_layers ? model.layers[j - 1].output_activation_size : 0;
  };
  for (std::size_t k = k_total; k-- > 0;) {
    const std::size_t remaining_after = k_total - k - 1;
    for (std::size_t i = k; i + remaining_after < num_layers; ++i) {
      for (std::size_t j = i + 1; j + remaining_after <= num_layers; ++j) {
        if (!comm[k + 1][j] || ratio(k, i, j) > bottleneck) continue;
        const std::int64_t candidate = cut_cost(j) + *comm[k + 1][j];
        if (!comm[k][i] || candidate < *comm[k][i]) comm[k][i] = candidate;
      }
    }
  }

  // Walk forward taking the earliest cut that stays optimal.
  PartitionPlan plan;
  plan.bottleneck = bottleneck;
  plan.total_cut_activation = *comm[0][0];
  std::size_t begin = 0;
  for (std::size_t k = 0; k < k_total; ++k) {
    const std::size_t remaining_after = k_total - k - 1;
    std::size_t chosen = 0;
    for (std::size_t j = begin + 1; j + remaining_after <= num_layers; ++j) {
      if (!comm[k + 1][j] || ratio(k, begin, j) > bottleneck) continue;
      if (cut_cost(j) + *comm[k + 1][j] == *comm[k][begin]) {
        chosen = j;
        break;
      }
    }
    plan.segments.push_back(Segment{.begin = begin,
                                    .end = chosen,
                                    .node_index = k,
                                    .cost = prefix[chosen] - prefix[begin],
                                    .cut_activation_size = cut_cost(chosen)});
    begin = chosen;
  }
  return plan;
}

}  // namespace ecoroute::partitioner
