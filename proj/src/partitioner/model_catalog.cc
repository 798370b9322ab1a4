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

#include "ecoroute/model_catalog.h"

#include <algorithm>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute::partitioner {

namespace {

// Tracks spatial size and channel count while stacking layers.
class Builder {
 public:
  Builder(std::int64_t spatial, std::int64_t channels) : hw_(spatial), channels_(channels) {}

  void Conv(std::string name, std::int64_t k, std::int64_t out, std::int64_t stride = 1) {
    hw_ /= stride;
    layers_.push_back(
        LayerDescriptor::Conv2D(std::move(name), k, k, channels_, out, hw_ * hw_ * out));
    channels_ = out;
  }

  void Depthwise(std::string name, std::int64_t k, std::int64_t stride = 1) {
    hw_ /= stride;
    layers_.push_back(LayerDescriptor::Other(std::move(name), k * k * channels_,
                                             hw_ * hw_ * channels_));
  }

  // Squeeze-excite pair; the output keeps the input shape.
  void SqueezeExcite(const std::string &prefix, std::int64_t reduced) {
    layers_.push_back(LayerDescriptor::Linear(prefix + ".se_reduce", channels_, reduced, reduced));
    layers_.push_back(
        LayerDescriptor::Linear(prefix + ".se_expand", reduced, channels_, hw_ * hw_ * channels_));
  }

  void Pool(std::string name) {
    hw_ = 1;
    layers_.push_back(LayerDescriptor::Other(std::move(name), 0, channels_));
  }

  void Dense(std::string name, std::int64_t out) {
    layers_.push_back(LayerDescriptor::Linear(std::move(name), channels_, out, out));
    channels_ = out;
  }

  std::int64_t channels() const { return channels_; }

  ModelDescriptor Finish(std::string id, std::string name, double base_latency_ms,
                         std::int64_t nominal_params) {
    ModelDescriptor m{std::move(id), std::move(name), std::move(layers_), base_latency_ms, true};
    const auto cost = static_cast<std::int64_t>(ModelCost(m));
    if (cost > nominal_params) {
      throw InvalidInput(fmt::format("catalog model '{}' exceeds its nominal parameter count",
                                     m.id));
    }
    m.layers.push_back(LayerDescriptor::Other("norm_and_bias", nominal_params - cost, channels_));
    return m;
  }

 private:
  std::int64_t hw_;
  std::int64_t channels_;
  std::vector<LayerDescriptor> layers_;
};

}  // namespace

ModelDescriptor MobileNetV2() {
  Builder b(224, 3);
  b.Conv("stem", 3, 32, 2);
  struct Stage {
    std::int64_t expand, out, repeats, stride;
  };
  const Stage stages[] = {{1, 16, 1, 1}, {6, 24, 2, 2},  {6, 32, 3, 2}, {6, 64, 4, 2},
                          {6, 96, 3, 1}, {6, 160, 3, 2}, {6, 320, 1, 1}};
  int block = 0;
  for (const auto &s : stages) {
    for (std::int64_t r = 0; r < s.repeats; ++r, ++block) {
      const auto prefix = fmt::format("block{}", block);
      const std::int64_t hidden = b.channels() * s.expand;
      if (s.expand != 1) b.Conv(prefix + ".expand", 1, hidden);
      b.Depthwise(prefix + ".dw", 3, r == 0 ? s.stride : 1);
      b.Conv(prefix + ".project", 1, s.out);
    }
  }
  b.Conv("head", 1, 1280);
  b.Pool("pool");
  b.Dense("classifier", 1000);
  return b.Finish("MobileNetV2", "MobileNetV2 (synthetic stand-in)", 254.85, kMobileNetV2Params);
}

ModelDescriptor MobileNetV4Small() {
  Builder b(224, 3);
  b.Conv("stem", 3, 32, 2);
  b.Conv("fused0.conv", 3, 32, 2);
  b.Conv("fused0.project", 1, 32);
  b.Conv("fused1.conv", 3, 96, 2);
  b.Conv("fused1.project", 1, 64);
  struct Block {
    std::int64_t kernel, expand, out, stride;
  };
  const Block blocks[] = {{5, 3, 96, 2},  {3, 2, 96, 1},  {3, 2, 96, 1},  {3, 2, 96, 1},
                          {3, 2, 96, 1},  {3, 4, 96, 1},  {3, 6, 128, 2}, {5, 4, 128, 1},
                          {3, 4, 128, 1}, {3, 3, 128, 1}, {3, 4, 128, 1}, {3, 4, 128, 1}};
  int i = 0;
  for (const auto &blk : blocks) {
    const auto prefix = fmt::format("uib{}", i++);
    b.Conv(prefix + ".expand", 1, b.channels() * blk.expand);
    b.Depthwise(prefix + ".dw", blk.kernel, blk.stride);
    b.Conv(prefix + ".project", 1, blk.out);
  }
  b.Conv("head", 1, 960);
  b.Pool("pool");
  b.Dense("head_fc", 1280);
  b.Dense("classifier", 1000);
  return b.Finish("MobileNetV4", "MobileNetV4-Conv-Small (synthetic stand-in)", 82.96,
                  kMobileNetV4Params);
}

ModelDescriptor EfficientNetB0() {
  Builder b(224, 3);
  b.Conv("stem", 3, 32, 2);
  struct Stage {
    std::int64_t expand, kernel, stride, out, repeats;
  };
  const Stage stages[] = {{1, 3, 1, 16, 1},  {6, 3, 2, 24, 2},  {6, 5, 2, 40, 2},
                          {6, 3, 2, 80, 3},  {6, 5, 1, 112, 3}, {6, 5, 2, 192, 4},
                          {6, 3, 1, 320, 1}};
  int block = 0;
  for (const auto &s : stages) {
    for (std::int64_t r = 0; r < s.repeats; ++r, ++block) {
      const auto prefix = fmt::format("mbconv{}", block);
      const std::int64_t in = b.channels();
      if (s.expand != 1) b.Conv(prefix + ".expand", 1, in * s.expand);
      b.Depthwise(prefix + ".dw", s.kernel, r == 0 ? s.stride : 1);
      b.SqueezeExcite(prefix, std::max<std::int64_t>(1, in / 4));
      b.Conv(prefix + ".project", 1, s.out);
    }
  }
  b.Conv("head", 1, 1280);
  b.Pool("pool");
  b.Dense("classifier", 1000);
  return b.Finish("EfficientNet-B0", "EfficientNet-B0 (synthetic stand-in)", 116.29,
                  kEfficientNetB0Params);
}

std::vector<ModelDescriptor> BuiltinCatalog() {
  return {MobileNetV2(), MobileNetV4Small(), EfficientNetB0()};
}

std::optional<ModelDescriptor> FindModel(const std::vector<ModelDescriptor> &catalog,
                                         std::string_view id) {
  for (const auto &m : catalog) {
    if (m.id == id) return m;
  }
  return std::nullopt;
}

}  // namespace ecoroute::partitioner
