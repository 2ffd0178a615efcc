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

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include "vloop/types.hpp"
#include "vloop/vac.hpp"

namespace vloop {

// Consistency bias applied inside every attention head during generation.
struct VisualBias {
  vac::VisualAttentionVector vector;
  double alpha = 0.0;

  bool operator==(const VisualBias&) const = default;
};

struct ProviderRequest {
  std::string image_ref;
  std::string question;
  double temperature = 0.0;
  int max_tokens = 16;
  std::optional<VisualBias> visual_bias;
  bool want_attention = false;
  // Distinguishes independent draws of the same request when sampling.
  std::optional<int> sample_index;

  // Checks value ranges; throws ProviderError. Bias length is checked by the
  // provider, which knows N_v.
  void validate() const;

  bool operator==(const ProviderRequest&) const = default;
};

struct ProviderCapabilities {
  bool attention_export = false;
  bool bias_injection = false;

  bool operator==(const ProviderCapabilities&) const = default;
};

// A multimodal model. One in-flight call per instance; run concurrent
// workers on separate instances.
class Provider {
 public:
  virtual ~Provider() = default;

  virtual std::string id() const = 0;
  virtual ProviderCapabilities capabilities() const = 0;

  virtual GenerationResult generate(const ProviderRequest& req) = 0;

  // Aggregated text-to-image attention of `answer` under `req`, from one
  // teacher-forced pass over question + answer. Throws CapabilityError when
  // the provider cannot expose attention.
  virtual vac::VisualAttentionVector export_visual_attention(const ProviderRequest& req,
                                                            std::string_view answer) = 0;
};

using ProviderFactory = std::function<std::unique_ptr<Provider>()>;

}  // namespace vloop
