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

// Serial reference kernels. Plain loops in the textbook order; the OpenMP
// kernels in kernels.cpp are checked against these.

#include <cmath>
#include <limits>

#include "checks.hpp"

namespace vloop::vac::reference {

VisualAttentionVector aggregate(const AttentionTrace& trace) {
  detail::check_trace(trace);
  VisualAttentionVector out{std::vector<double>(trace.visual_len(), 0.0)};
  for (std::size_t l = 0; l < trace.layers(); ++l)
    for (std::size_t h = 0; h < trace.heads(); ++h)
      for (std::size_t t = 0; t < trace.text_len(); ++t)
        for (std::size_t v = 0; v < trace.visual_len(); ++v) out.values[v] += trace.at(l, h, t, v);
  const double count = static_cast<double>(trace.layers() * trace.heads() * trace.text_len());
  for (double& x : out.values) x /= count;
  return out;
}

AttentionBlock inject(const AttentionBlock& block, const VisualAttentionVector& bias,
                      const VacConfig& cfg) {
  detail::check_inject(block, bias, cfg);
  AttentionBlock out = block;
  if (!cfg.enabled) return out;
  for (std::size_t t = 0; t < block.rows; ++t)
    for (std::size_t v = 0; v < block.cols; ++v) out(t, v) = block(t, v) + cfg.alpha * bias.values[v];
  return out;
}

std::vector<double> renormalize_rows(std::span<const double> row, std::span<const std::uint8_t> mask) {
  detail::check_row(row, mask);
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < row.size(); ++j)
    if (mask[j]) max = std::max(max, row[j]);
  std::vector<double> out(row.size(), 0.0);
  double sum = 0.0;
  for (std::size_t j = 0; j < row.size(); ++j) {
    if (!mask[j]) continue;
    out[j] = std::exp(row[j] - max);
    sum += out[j];
  }
  for (double& x : out) x /= sum;
  return out;
}

void reweight_attention(std::span<double> probs, const SequenceLayout& layout,
                        const VisualAttentionVector& bias, double alpha) {
  detail::check_layout(probs, layout, bias);
  const std::size_t n = layout.seq_len;
  std::vector<std::uint8_t> is_text(n, 0);
  for (auto r : layout.text_rows) is_text[r] = 1;
  for (std::size_t i = 0; i < n; ++i) {
    std::span<double> row = probs.subspan(i * n, n);
    if (is_text[i]) {
      for (std::size_t v = layout.visual_begin; v < layout.visual_end; ++v)
        row[v] += alpha * bias.values[v - layout.visual_begin];
    }
    const KeyMask mask = causal_mask(n, i);
    const std::vector<double> renorm = renormalize_rows(row, mask);
    std::copy(renorm.begin(), renorm.end(), row.begin());
  }
}

}  // namespace vloop::vac::reference
