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

#include <span>
#include <string>

#include "vloop/error.hpp"
#include "vloop/vac.hpp"

namespace vloop::vac::detail {

inline void check_trace(const AttentionTrace& trace) {
  if (trace.layers() == 0 || trace.heads() == 0 || trace.text_len() == 0 ||
      trace.visual_len() == 0) {
    throw ShapeError("cannot aggregate an attention trace with a zero-sized dimension");
  }
}

inline void check_inject(const AttentionBlock& block, const VisualAttentionVector& bias,
                         const VacConfig& cfg) {
  cfg.validate();
  if (block.cols != bias.size()) {
    throw ShapeError("attention block has " + std::to_string(block.cols) +
                     " visual columns but bias has length " + std::to_string(bias.size()));
  }
  if (block.data.size() != block.rows * block.cols) {
    throw ShapeError("attention block buffer does not match rows x cols");
  }
}

inline void check_row(std::span<const double> row, std::span<const std::uint8_t> mask) {
  if (row.size() != mask.size()) {
    throw ShapeError("row and mask lengths differ");
  }
  bool any = false;
  for (auto m : mask) any = any || m != 0;
  if (!any) throw ShapeError("every key position is masked");
}

inline void check_layout(std::span<const double> probs, const SequenceLayout& layout,
                         const VisualAttentionVector& bias) {
  if (probs.size() != layout.seq_len * layout.seq_len) {
    throw ShapeError("attention map size does not match seq_len^2");
  }
  if (layout.visual_begin > layout.visual_end || layout.visual_end > layout.seq_len) {
    throw ShapeError("visual token range outside the sequence");
  }
  if (bias.size() != layout.visual_end - layout.visual_begin) {
    throw ShapeError("visual bias has length " + std::to_string(bias.size()) + ", expected N_v = " +
                     std::to_string(layout.visual_end - layout.visual_begin));
  }
  for (auto r : layout.text_rows) {
    if (r >= layout.seq_len) throw ShapeError("text row outside the sequence");
  }
}

}  // namespace vloop::vac::detail
