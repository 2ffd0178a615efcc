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
#include <cstdint>
#include <span>
#include <vector>

#include "vloop/types.hpp"

// Visual attention consistency math: aggregation of the primary-stage
// text-to-image attention, bias injection into the verification-stage
// attention, and row renormalization.
//
// The functions in vloop::vac are the OpenMP kernels used at runtime. The
// serial versions in vloop::vac::reference compute the same quantities with
// plain loops and are kept for tests and benchmarks.
namespace vloop::vac {

// Aggregated text-to-image attention, one entry per visual token.
struct VisualAttentionVector {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  // Throws ShapeError unless every entry is finite and >= 0.
  void validate() const;

  bool operator==(const VisualAttentionVector&) const = default;
};

struct VacConfig {
  double alpha = 0.7;
  bool enabled = true;

  void validate() const;  // alpha finite and >= 0
};

// Dense row-major N_t x N_v block.
struct AttentionBlock {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> data;

  double& operator()(std::size_t r, std::size_t c) { return data[r * cols + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data[r * cols + c]; }
  bool operator==(const AttentionBlock&) const = default;
};

// 1 = key position may be attended, 0 = masked.
using KeyMask = std::vector<std::uint8_t>;

// Mask for query position `query` under causal attention over `len` keys.
KeyMask causal_mask(std::size_t len, std::size_t query);

// values[v] = mean over layers, heads and text positions of weights[l][h][t][v].
// Throws ShapeError if any dimension is zero.
VisualAttentionVector aggregate(const AttentionTrace& trace);

// out[t][v] = block[t][v] + alpha * bias[v]. Identity when !cfg.enabled.
AttentionBlock inject(const AttentionBlock& block, const VisualAttentionVector& bias,
                      const VacConfig& cfg);

// Numerically stable softmax over allowed positions; masked positions are 0.
// Throws ShapeError if the sizes differ or every position is masked.
std::vector<double> renormalize_rows(std::span<const double> row, std::span<const std::uint8_t> mask);

// Layout of one square attention map over a sequence, used by providers that
// apply the consistency bias inside every attention head.
struct SequenceLayout {
  std::size_t seq_len = 0;
  std::size_t visual_begin = 0;  // visual tokens occupy [visual_begin, visual_end)
  std::size_t visual_end = 0;
  std::vector<std::size_t> text_rows;  // query rows that receive the bias
};

// In-place on a seq_len x seq_len row-major map of post-softmax causal
// attention probabilities: adds alpha * bias to the text-to-image block of
// every row in layout.text_rows, then re-applies a causal row-wise softmax to
// every row. With alpha = 0 this is still the renormalization path.
void reweight_attention(std::span<double> probs, const SequenceLayout& layout,
                        const VisualAttentionVector& bias, double alpha);

namespace reference {

VisualAttentionVector aggregate(const AttentionTrace& trace);
AttentionBlock inject(const AttentionBlock& block, const VisualAttentionVector& bias,
                      const VacConfig& cfg);
std::vector<double> renormalize_rows(std::span<const double> row, std::span<const std::uint8_t> mask);
void reweight_attention(std::span<double> probs, const SequenceLayout& layout,
                        const VisualAttentionVector& bias, double alpha);

}  // namespace reference
}  // namespace vloop::vac
