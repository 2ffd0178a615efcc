// Copyright 2026 The vloop Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "vloop/provider.hpp"

#include <cmath>

#include "vloop/error.hpp"

namespace vloop {

void ProviderRequest::validate() const {
  if (!std::isfinite(temperature) || temperature < 0.0) {
    throw ProviderError("temperature must be finite and >= 0");
  }
  if (max_tokens <= 0) throw ProviderError("max_tokens must be positive");
  if (visual_bias) {
    if (!std::isfinite(visual_bias->alpha) || visual_bias->alpha < 0.0) {
      throw ProviderError("bias alpha must be finite and >= 0");
    }
    try {
      visual_bias->vector.validate();
    } catch (const ShapeError& e) {
      throw ProviderError(e.what());
    }
  }
}

}  // namespace vloop
