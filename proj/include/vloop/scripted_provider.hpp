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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "vloop/provider.hpp"

namespace vloop {

// Canned answer for one (image, question) key. An entry without a question
// is the fallback for every other question about that image.
struct ScriptEntry {
  struct Answer {
    std::string text;
    std::vector<double> token_probs;      // empty -> 1.0 per word token
    std::vector<double> token_entropies;  // empty -> 0.0 per word token
  };

  std::string image_ref;
  std::optional<std::string> question;
  Answer answer;
  std::vector<Answer> samples;  // served round-robin for sampling draws
  std::optional<AttentionTrace> attention;
};

// Fixture provider. Lookup is by image_ref and normalized question, falling
// back to the image's wildcard entry. Requests carrying a sample_index are
// served from `samples` when the entry has any.
//
// Script file: one JSON object per line with fields image_ref, question
// (optional), answer, token_probs, token_entropies, samples (optional list
// of {answer, token_probs, token_entropies}) and attention (optional
// {L, H, N_t, N_v, weights}).
class ScriptedProvider : public Provider {
 public:
  explicit ScriptedProvider(std::vector<ScriptEntry> entries, std::size_t visual_len = 4);

  static ScriptedProvider load(const std::filesystem::path& path, std::size_t visual_len = 4);

  std::string id() const override { return "scripted"; }
  ProviderCapabilities capabilities() const override { return {true, true}; }
  GenerationResult generate(const ProviderRequest& req) override;
  vac::VisualAttentionVector export_visual_attention(const ProviderRequest& req,
                                                    std::string_view answer) override;

  // Every request seen, in call order.
  const std::vector<ProviderRequest>& requests() const { return log_; }

  std::size_t visual_len_for(const std::string& image_ref) const;

 private:
  const ScriptEntry& lookup(const ProviderRequest& req) const;
  AttentionTrace synthetic_trace(const ProviderRequest& req, std::string_view answer) const;

  std::vector<ScriptEntry> entries_;
  std::map<std::pair<std::string, std::string>, std::size_t> exact_;
  std::map<std::string, std::size_t> wildcard_;
  std::size_t visual_len_;
  std::vector<ProviderRequest> log_;
};

std::vector<ScriptEntry> parse_script(std::string_view content);
nlohmann::json to_json(const ScriptEntry& e);
std::string serialize_script(const std::vector<ScriptEntry>& entries);

}  // namespace vloop
