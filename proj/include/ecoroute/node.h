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

#include <string>

#include "ecoroute/carbon.h"

namespace ecoroute {

/// Static configuration of one simulated edge node.
struct NodeSpec {
  std::string id;
  double cpu_quota = 1.0;
  double mem_gb = 1.0;
  carbon::CarbonIntensity intensity;
  carbon::PowerModel power;
  // Control-plane probe latency, compared against the selection filter.
  double latency_ms = 0.0;
  int declaration_index = 0;

  /// Throws InvalidInput naming the node when a field is out of range.
  void Validate() const;
  double PowerWatts() const;

  bool operator==(const NodeSpec &) const = default;
};

}  // namespace ecoroute
