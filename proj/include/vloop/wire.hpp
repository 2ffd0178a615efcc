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

#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "vloop/provider.hpp"

// JSON shapes of the remote provider protocol.
//
//   GET  /capabilities -> {"attention_export": bool, "bias_injection": bool}
//   POST /generate     <- {"image_ref", "question", "temperature", "max_tokens",
//                          "want_attention", "visual_bias"?: {"vector": [], "alpha"},
//                          "sample_index"?, "teacher_forced_answer"?}
//                      -> {"answer", "token_probs": [], "token_entropies": [],
//                          "attention"?: {"L", "H", "N_t", "N_v",
//                                         "weights": [] | "aggregated": []}}
//   errors             -> non-2xx with {"error": "..."}
//
// `teacher_forced_answer` asks the server to skip generation and return the
// attention of that answer; it backs Provider::export_visual_attention.
namespace vloop::wire {

nlohmann::json to_json(const ProviderRequest& req);
// Throws ProviderError("protocol violation: ...") on malformed input.
ProviderRequest request_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ProviderCapabilities& caps);
ProviderCapabilities capabilities_from_json(const nlohmann::json& j);

struct Response {
  GenerationResult generation;  // attention filled when raw weights were sent
  std::optional<vac::VisualAttentionVector> aggregated;
  std::size_t visual_len = 0;  // N_v reported with any attention payload

  bool operator==(const Response&) const = default;
};

nlohmann::json to_json(const Response& resp);
Response response_from_json(const nlohmann::json& j, double temperature_used);

}  // namespace vloop::wire
