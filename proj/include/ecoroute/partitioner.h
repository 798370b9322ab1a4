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
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace ecoroute::partitioner {

enum class LayerKind { kConv2D, kLinear, kOther };

std::string_view ToString(LayerKind kind);
/// Accepts "Conv2D", "Linear", "Other" (case-insensitive). Throws InvalidInput.
LayerKind ParseLayerKind(std::string_view text);

/// One layer of an abstract model. Only the dimension fields of its kind are
/// meaningful; the others stay zero.
struct LayerDescriptor {
  LayerKind kind = LayerKind::kOther;
  std::string name;
  std::int64_t kernel_h = 0;
  std::int64_t kernel_w = 0;
  std::int64_t in_channels = 0;
  std::int64_t out_channels = 0;
  std::int64_t in_features = 0;
  std::int64_t out_features = 0;
  std::int64_t params_count = 0;
  // Element count of the output tensor; what crosses the wire if a cut
  // follows this layer.
  std::int64_t output_activation_size = 0;

  static LayerDescriptor Conv2D(std::string name, std::int64_t kernel_h, std::int64_t kernel_w,
                                std::int64_t in_channels, std::int64_t out_channels,
                                std::int64_t output_activation_size);
  static LayerDescriptor Linear(std::string name, std::int64_t in_features,
                                std::int64_t out_features, std::int64_t output_activation_size);
  static LayerDescriptor Other(std::string name, std::int64_t params_count,
                               std::int64_t output_activation_size);

  void Validate() const;
  bool operator==(const LayerDescriptor &) const = default;
};

struct ModelDescriptor {
  std::string id;
  std::string name;
  std::vector<LayerDescriptor> layers;
  // Calibrated single-node latency on a 1.0-CPU reference node.
  double base_latency_ms = 0.0;
  // Marks implementer-constructed layer lists.
  bool synthetic = false;

  void Validate() const;
  bool operator==(const ModelDescriptor &) const = default;
};

struct Segment {
  std::size_t begin = 0;  // inclusive layer index
  std::size_t end = 0;    // exclusive
  std::size_t node_index = 0;
  double cost = 0.0;
  // Activation size shipped to the next segment; zero for the last segment.
  std::int64_t cut_activation_size = 0;

  bool operator==(const Segment &) const = default;
};

struct PartitionPlan {
  std::vector<Segment> segments;
  double bottleneck = 0.0;  // max(cost_i / capacity_i)
  std::int64_t total_cut_activation = 0;

  bool operator==(const PartitionPlan &) const = default;
};

/// Conv2D: kh*kw*c_in*c_out; Linear: n_in*n_out; Other: params_count.
double LayerCost(const LayerDescriptor &layer);
double ModelCost(const ModelDescriptor &model);
/// Sum of layer costs over [begin, end). An empty range costs zero.
double SegmentCost(const ModelDescriptor &model, std::size_t begin, std::size_t end);

/// Splits the model into len(capacities) contiguous, non-empty segments, the
/// i-th running on capacity i. Minimizes the bottleneck max(cost_i /
/// capacity_i); ties go to the smallest total cut activation, then to the
/// lexicographically earliest cut positions. Exact, O(L^2 K).
PartitionPlan PartitionModel(const ModelDescriptor &model, std::span<const double> capacities);

}  // namespace ecoroute::partitioner
