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

#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace vloop {

enum class QuestionKind { kOpenEnded, kClosedEnded };

const char* to_string(QuestionKind kind);

// One image-question-reference triple from a dataset split.
struct VqaRecord {
  std::string record_id;
  std::string image_ref;  // opaque; resolved by a provider
  std::string question;
  std::string reference_answer;
  QuestionKind question_kind = QuestionKind::kOpenEnded;

  bool operator==(const VqaRecord&) const = default;
};

// Text-to-image attention captured from one forward pass, laid out
// [layer][head][text_pos][visual_pos] in a flat row-major buffer.
class AttentionTrace {
 public:
  AttentionTrace() = default;
  AttentionTrace(std::size_t layers, std::size_t heads, std::size_t text_len,
                 std::size_t visual_len);
  // Takes ownership of `weights`; throws ShapeError on size mismatch or a
  // negative / non-finite entry.
  AttentionTrace(std::size_t layers, std::size_t heads, std::size_t text_len,
                 std::size_t visual_len, std::vector<double> weights);

  std::size_t layers() const { return layers_; }
  std::size_t heads() const { return heads_; }
  std::size_t text_len() const { return text_len_; }
  std::size_t visual_len() const { return visual_len_; }
  bool empty() const { return weights_.empty(); }

  double& at(std::size_t l, std::size_t h, std::size_t t, std::size_t v) {
    return weights_[index(l, h, t, v)];
  }
  double at(std::size_t l, std::size_t h, std::size_t t, std::size_t v) const {
    return weights_[index(l, h, t, v)];
  }

  // Row of N_v visual weights for one (layer, head, text position).
  std::span<double> row(std::size_t l, std::size_t h, std::size_t t) {
    return {weights_.data() + index(l, h, t, 0), visual_len_};
  }
  std::span<const double> row(std::size_t l, std::size_t h, std::size_t t) const {
    return {weights_.data() + index(l, h, t, 0), visual_len_};
  }

  std::span<const double> weights() const { return weights_; }

  bool operator==(const AttentionTrace&) const = default;

 private:
  std::size_t index(std::size_t l, std::size_t h, std::size_t t, std::size_t v) const {
    return ((l * heads_ + h) * text_len_ + t) * visual_len_ + v;
  }

  std::size_t layers_ = 0;
  std::size_t heads_ = 0;
  std::size_t text_len_ = 0;
  std::size_t visual_len_ = 0;
  std::vector<double> weights_;
};

// Model answer with its per-token trace.
struct GenerationResult {
  std::string answer_text;
  std::vector<double> token_probs;      // probability of each emitted token, (0,1]
  std::vector<double> token_entropies;  // nats, >= 0
  std::optional<AttentionTrace> attention;
  double temperature_used = 0.0;

  // Throws ShapeError if the trace violates the length / range invariants.
  void validate() const;

  bool operator==(const GenerationResult&) const = default;
};

}  // namespace vloop
