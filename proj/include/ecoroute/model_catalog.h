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

#include <optional>
#include <string_view>
#include <vector>

#include "ecoroute/partitioner.h"

namespace ecoroute::partitioner {

/// Nominal parameter counts of the bundled stand-ins.
inline constexpr std::int64_t kMobileNetV2Params = 3'500'000;
inline constexpr std::int64_t kMobileNetV4Params = 3'800'000;
inline constexpr std::int64_t kEfficientNetB0Params = 5'300'000;

/// Synthetic layer lists shaped like the named architectures at 224x224
/// input. Depthwise convolutions are recorded as Other layers carrying their
/// true parameter count. A trailing "norm_and_bias" layer absorbs the
/// difference to the nominal parameter count, so ModelCost equals it exactly.
ModelDescriptor MobileNetV2();
ModelDescriptor MobileNetV4Small();
ModelDescriptor EfficientNetB0();

std::vector<ModelDescriptor> BuiltinCatalog();

std::optional<ModelDescriptor> FindModel(const std::vector<ModelDescriptor> &catalog,
                                         std::string_view id);

}  // namespace ecoroute::partitioner
