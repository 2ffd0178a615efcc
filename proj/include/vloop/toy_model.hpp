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

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include <Eigen/Dense>

#include "vloop/provider.hpp"
#include "vloop/vac.hpp"

namespace vloop {

struct ToyModelConfig {
  std::uint64_t seed = 20240607;
  int embed_dim = 16;
  int layers = 2;
  int heads = 2;
  int grid = 3;         // N_v = grid * grid
  int patch_vocab = 8;  // distinct symbolic patch tokens
  int max_seq = 512;
  std::vector<std::string> words;  // empty -> built-in vocabulary
};

using RowMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Immutable parameters of a small decoder-only transformer over a symbolic
// vocabulary. Identical configs give identical parameters.
struct ToyModelParams {
  struct Layer {
    RowMatrix wq, wk, wv, wo;  // d x d; wv produces the value matrix
    RowMatrix w1, w2;          // d x 2d, 2d x d
  };

  ToyModelConfig config;
  std::vector<std::string> vocab;
  std::unordered_map<std::string, int> index;
  RowMatrix embedding;   // |V| x d, tied with the output projection
  RowMatrix positional;  // max_seq x d
  std::vector<Layer> layers;

  int bos = 0, sep = 1, eos = 2, unk = 3;
  int first_patch = 4;
  int first_word = 0;

  static std::shared_ptr<const ToyModelParams> build(const ToyModelConfig& cfg);

  int visual_len() const { return config.grid * config.grid; }
  int token_id(const std::string& word) const;
};

// Token sequence with the positions that matter for attention bookkeeping:
//   <bos> patch... question... <sep> answer...
struct ToySequence {
  std::vector<int> tokens;
  vac::SequenceLayout layout;
  std::size_t answer_begin = 0;
};

struct ToyForward {
  Eigen::VectorXd last_logits;
  // Per layer, per head seq x seq attention actually used (post reweighting).
  std::vector<std::vector<RowMatrix>> attention;
};

class ToyModel {
 public:
  explicit ToyModel(std::shared_ptr<const ToyModelParams> params);

  const ToyModelParams& params() const { return *params_; }

  std::vector<int> image_tokens(const std::string& image_ref) const;
  std::vector<int> text_tokens(const std::string& text) const;
  ToySequence sequence(const std::string& image_ref, const std::string& question,
                       const std::vector<int>& answer) const;

  // Full causal forward pass. The reweighting path (bias injection + causal
  // re-softmax) runs in every head; a missing bias is treated as alpha = 0.
  ToyForward forward(const ToySequence& seq, const std::optional<VisualBias>& bias,
                     bool keep_attention) const;

 private:
  std::shared_ptr<const ToyModelParams> params_;
};

// Provider backed by ToyModel. Temperature 0 decodes greedily; sampling is
// seeded from the request, so identical requests give identical outputs.
class ToyProvider : public Provider {
 public:
  explicit ToyProvider(std::shared_ptr<const ToyModelParams> params,
                       std::unordered_set<std::string> image_catalog = {});

  std::string id() const override;
  ProviderCapabilities capabilities() const override { return {true, true}; }
  GenerationResult generate(const ProviderRequest& req) override;
  vac::VisualAttentionVector export_visual_attention(const ProviderRequest& req,
                                                    std::string_view answer) override;

  // Teacher-forced text-to-image attention for question + answer.
  AttentionTrace teacher_forced_trace(const ProviderRequest& req, std::string_view answer) const;

  // Per-step next-token distributions of the last generate() call, over the
  // full vocabulary. Exposed for invariant checks.
  const std::vector<Eigen::VectorXd>& last_step_distributions() const { return last_dists_; }

 private:
  void check_request(const ProviderRequest& req) const;

  ToyModel model_;
  std::unordered_set<std::string> catalog_;
  std::vector<Eigen::VectorXd> last_dists_;
};

}  // namespace vloop
