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

#include "vloop/wire.hpp"

#include "vloop/error.hpp"

namespace vloop::wire {
namespace {

using nlohmann::json;

[[noreturn]] void violation(const std::string& what) {
  throw ProviderError("protocol violation: " + what);
}

template <typename T>
T field(const json& j, const char* name) {
  auto it = j.find(name);
  if (it == j.end()) violation(std::string("missing field ") + name);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    violation(std::string("field ") + name + " has the wrong type");
  }
}

}  // namespace

json to_json(const ProviderRequest& req) {
  json j = {{"image_ref", req.image_ref},
            {"question", req.question},
            {"temperature", req.temperature},
            {"max_tokens", req.max_tokens},
            {"want_attention", req.want_attention}};
  if (req.visual_bias) {
    j["visual_bias"] = {{"vector", req.visual_bias->vector.values}, {"alpha", req.visual_bias->alpha}};
  }
  if (req.sample_index) j["sample_index"] = *req.sample_index;
  return j;
}

ProviderRequest request_from_json(const json& j) {
  if (!j.is_object()) violation("request is not an object");
  ProviderRequest req;
  req.image_ref = field<std::string>(j, "image_ref");
  req.question = field<std::string>(j, "question");
  req.temperature = field<double>(j, "temperature");
  req.max_tokens = field<int>(j, "max_tokens");
  req.want_attention = j.contains("want_attention") ? field<bool>(j, "want_attention") : false;
  if (auto it = j.find("visual_bias"); it != j.end() && !it->is_null()) {
    if (!it->is_object()) violation("visual_bias is not an object");
    VisualBias bias;
    bias.vector.values = field<std::vector<double>>(*it, "vector");
    bias.alpha = field<double>(*it, "alpha");
    req.visual_bias = std::move(bias);
  }
  if (auto it = j.find("sample_index"); it != j.end() && !it->is_null()) {
    req.sample_index = field<int>(j, "sample_index");
  }
  return req;
}

json to_json(const ProviderCapabilities& caps) {
  return {{"attention_export", caps.attention_export}, {"bias_injection", caps.bias_injection}};
}

ProviderCapabilities capabilities_from_json(const json& j) {
  if (!j.is_object()) violation("capabilities is not an object");
  return {field<bool>(j, "attention_export"), field<bool>(j, "bias_injection")};
}

json to_json(const Response& resp) {
  const auto& g = resp.generation;
  json j = {{"answer", g.answer_text},
            {"token_probs", g.token_probs},
            {"token_entropies", g.token_entropies}};
  if (g.attention) {
    const auto& a = *g.attention;
    j["attention"] = {{"L", a.layers()},
                      {"H", a.heads()},
                      {"N_t", a.text_len()},
                      {"N_v", a.visual_len()},
                      {"weights", std::vector<double>(a.weights().begin(), a.weights().end())}};
  } else if (resp.aggregated) {
    j["attention"] = {{"N_v", resp.aggregated->size()}, {"aggregated", resp.aggregated->values}};
  }
  return j;
}

Response response_from_json(const json& j, double temperature_used) {
  if (!j.is_object()) violation("response is not an object");
  Response r;
  r.generation.answer_text = field<std::string>(j, "answer");
  r.generation.token_probs = field<std::vector<double>>(j, "token_probs");
  r.generation.token_entropies = field<std::vector<double>>(j, "token_entropies");
  r.generation.temperature_used = temperature_used;
  try {
    r.generation.validate();
  } catch (const ShapeError& e) {
    violation(e.what());
  }
  if (auto it = j.find("attention"); it != j.end() && !it->is_null()) {
    const json& a = *it;
    if (!a.is_object()) violation("attention is not an object");
    r.visual_len = field<std::size_t>(a, "N_v");
    if (a.contains("weights")) {
      try {
        r.generation.attention =
            AttentionTrace(field<std::size_t>(a, "L"), field<std::size_t>(a, "H"),
                           field<std::size_t>(a, "N_t"), r.visual_len,
                           field<std::vector<double>>(a, "weights"));
      } catch (const ShapeError& e) {
        violation(e.what());
      }
    } else if (a.contains("aggregated")) {
      vac::VisualAttentionVector agg{field<std::vector<double>>(a, "aggregated")};
      if (agg.size() != r.visual_len) violation("aggregated attention length differs from N_v");
      try {
        agg.validate();
      } catch (const ShapeError& e) {
        violation(e.what());
      }
      r.aggregated = std::move(agg);
    } else {
      violation("attention carries neither weights nor aggregated");
    }
  }
  return r;
}

}  // namespace vloop::wire
