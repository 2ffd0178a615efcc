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

// OpenMP kernels. Every parallel loop owns disjoint outputs and keeps the
// per-element summation order of the serial reference, so results do not
// depend on the thread count.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

#include "checks.hpp"

namespace vloop::vac {
namespace {

// Softmax over the causal prefix [0, query] of `row`, in place.
void causal_softmax_inplace(std::span<double> row, std::size_t query) {
  const std::size_t allowed = std::min(query + 1, row.size());
  double max = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < allowed; ++j) max = std::max(max, row[j]);
  double sum = 0.0;
  for (std::size_t j = 0; j < allowed; ++j) {
    row[j] = std::exp(row[j] - max);
    sum += row[j];
  }
  for (std::size_t j = 0; j < allowed; ++j) row[j] /= sum;
  for (std::size_t j = allowed; j < row.size(); ++j) row[j] = 0.0;
}

}  // namespace

VisualAttentionVector aggregate(const AttentionTrace& trace) {
  detail::check_trace(trace);
  const std::size_t nv = trace.visual_len();
  const std::size_t rows = trace.layers() * trace.heads() * trace.text_len();
  const double* w = trace.weights().data();
  VisualAttentionVector out{std::vector<double>(nv, 0.0)};
  double* acc = out.values.data();
  // Each thread owns a contiguous column block and walks the rows in order,
  // so every column is summed in the same order as the serial reference.
  constexpr std::int64_t kBlock = 64;
  const auto blocks = static_cast<std::int64_t>((nv + kBlock - 1) / kBlock);
#pragma omp parallel for schedule(static) if (blocks >= 2 && rows * nv >= 65536)
  for (std::int64_t b = 0; b < blocks; ++b) {
    const std::size_t v0 = static_cast<std::size_t>(b * kBlock);
    const std::size_t v1 = std::min(nv, v0 + static_cast<std::size_t>(kBlock));
    for (std::size_t r = 0; r < rows; ++r) {
      const double* row = w + r * nv;
      for (std::size_t v = v0; v < v1; ++v) acc[v] += row[v];
    }
  }
  const double count = static_cast<double>(rows);
  for (std::size_t v = 0; v < nv; ++v) acc[v] /= count;
  return out;
}

AttentionBlock inject(const AttentionBlock& block, const VisualAttentionVector& bias,
                      const VacConfig& cfg) {
  detail::check_inject(block, bias, cfg);
  AttentionBlock out = block;
  if (!cfg.enabled) return out;
  const auto rows = static_cast<std::int64_t>(block.rows);
  const double alpha = cfg.alpha;
#pragma omp parallel for schedule(static) if (rows >= 64)
  for (std::int64_t t = 0; t < rows; ++t) {
    double* dst = out.data.data() + static_cast<std::size_t>(t) * block.cols;
    for (std::size_t v = 0; v < block.cols; ++v) dst[v] += alpha * bias.values[v];
  }
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
  const auto rows = static_cast<std::int64_t>(n);
#pragma omp parallel for schedule(static) if (rows >= 128)
  for (std::int64_t i = 0; i < rows; ++i) {
    const auto qi = static_cast<std::size_t>(i);
    std::span<double> row = probs.subspan(qi * n, n);
    if (is_text[qi]) {
      for (std::size_t v = layout.visual_begin; v < layout.visual_end; ++v)
        row[v] += alpha * bias.values[v - layout.visual_begin];
    }
    causal_softmax_inplace(row, qi);
  }
}

}  // namespace vloop::vac
