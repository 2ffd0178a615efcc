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

#include "vloop/types.hpp"

#include <cmath>
#include <string>

#include "vloop/error.hpp"

namespace vloop {

const char* to_string(QuestionKind kind) {
  return kind == QuestionKind::kClosedEnded ? "closed" : "open";
}

AttentionTrace::AttentionTrace(std::size_t layers, std::size_t heads, std::size_t text_len,
                               std::size_t visual_len)
    : layers_(layers),
      heads_(heads),
      text_len_(text_len),
      visual_len_(visual_len),
      weights_(layers * heads * text_len * visual_len, 0.0) {}

AttentionTrace::AttentionTrace(std::size_t layers, std::size_t heads, std::size_t text_len,
                               std::size_t visual_len, std::vector<double> weights)
    : layers_(layers),
      heads_(heads),
      text_len_(text_len),
      visual_len_(visual_len),
      weights_(std::move(weights)) {
  const std::size_t expected = layers * heads * text_len * visual_len;
  if (weights_.size() != expected) {
    throw ShapeError("attention trace has " + std::to_string(weights_.size()) +
                     " weights, expected L*H*N_t*N_v = " + std::to_string(expected));
  }
  for (double w : weights_) {
    if (!std::isfinite(w) || w < 0.0) {
      throw ShapeError("attention weights must be finite and non-negative");
    }
  }
}

void GenerationResult::validate() const {
  if (token_probs.size() != token_entropies.size()) {
    throw ShapeError("token_probs and token_entropies differ in length (" +
                     std::to_string(token_probs.size()) + " vs " +
                     std::to_string(token_entropies.size()) + ")");
  }
  for (double p : token_probs) {
    if (!(p > 0.0 && p <= 1.0)) throw ShapeError("token probability outside (0,1]");
  }
  for (double h : token_entropies) {
    if (!(h >= 0.0) || !std::isfinite(h)) throw ShapeError("token entropy must be >= 0");
  }
  if (!(temperature_used >= 0.0)) throw ShapeError("temperature must be >= 0");
}

}  // namespace vloop
