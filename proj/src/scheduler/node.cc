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

#include "ecoroute/node.h"

#include <cmath>

#include <fmt/format.h>

#include "ecoroute/error.h"

namespace ecoroute {

void NodeSpec::Validate() const {
  if (id.empty()) {
    throw InvalidInput("node id must not be empty");
  }
  if (!(cpu_quota > 0.0) || !std::isfinite(cpu_quota)) {
    throw InvalidInput(fmt::format("node '{}': cpu_quota must be > 0, got {}", id, cpu_quota));
  }
  if (!(mem_gb > 0.0) || !std::isfinite(mem_gb)) {
    throw InvalidInput(fmt::format("node '{}': mem_gb must be > 0, got {}", id, mem_gb));
  }
  if (!(latency_ms >= 0.0)) {
    throw InvalidInput(fmt::format("node '{}': latency_ms must be >= 0, got {}", id, latency_ms));
  }
  try {
    intensity.Validate();
    power.Validate();
  } catch (const InvalidInput &e) {
    throw InvalidInput(fmt::format("node '{}': {}", id, e.what()));
  }
}

double NodeSpec::PowerWatts() const { return carbon::NodePower(cpu_quota, mem_gb, power); }

}  // namespace ecoroute
