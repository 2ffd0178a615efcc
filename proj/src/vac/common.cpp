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

#include <cmath>
#include <stdexcept>

#include "vloop/error.hpp"
#include "vloop/vac.hpp"

namespace vloop::vac {

void VisualAttentionVector::validate() const {
  for (double v : values) {
    if (!std::isfinite(v) || v < 0.0) {
      throw ShapeError("visual attention entries must be finite and non-negative");
    }
  }
}

void VacConfig::validate() const {
  if (!std::isfinite(alpha) || alpha < 0.0) throw std::invalid_argument("alpha must be finite and >= 0");
}

KeyMask causal_mask(std::size_t len, std::size_t query) {
  KeyMask mask(len, 0);
  for (std::size_t j = 0; j < len && j <= query; ++j) mask[j] = 1;
  return mask;
}

}  // namespace vloop::vac
