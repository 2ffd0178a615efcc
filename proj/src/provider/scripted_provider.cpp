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

#include "vloop/scripted_provider.hpp"

#include <fstream>
#include <sstream>

#include "vloop/error.hpp"
#include "vloop/hash.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

using nlohmann::json;

ScriptEntry::Answer parse_answer(const json& j, std::size_t line) {
  ScriptEntry::Answer a;
  try {
    a.text = j.at("answer").get<std::string>();
    a.token_probs = j.value("token_probs", std::vector<double>{});
    a.token_entropies = j.value("token_entropies", std::vector<double>{});
  } catch (const json::exception& e) {
    throw DatasetError("bad script answer at line " + std::to_string(line) + ": " + e.what());
  }
  return a;
}

json answer_json(const ScriptEntry::Answer& a) {
  json j = {{"answer", a.text}};
  if (!a.token_probs.empty()) j["token_probs"] = a.token_probs;
  if (!a.token_entropies.empty()) j["token_entropies"] = a.token_entropies;
  return j;
}

GenerationResult materialize(const ScriptEntry::Answer& a, double temperature) {
  GenerationResult g;
  g.answer_text = a.text;
  g.temperature_used = temperature;
  const std::size_t n = word_tokens(normalize_text(a.text)).size();
  g.token_probs = a.token_probs.empty() ? std::vector<double>(n, 1.0) : a.token_probs;
  g.token_entropies =
      a.token_entropies.empty() ? std::vector<double>(g.token_probs.size(), 0.0) : a.token_entropies;
  try {
    g.validate();
  } catch (const ShapeError& e) {
    throw ProviderError(std::string("invalid scripted trace: ") + e.what());
  }
  return g;
}

}  // namespace

ScriptedProvider::ScriptedProvider(std::vector<ScriptEntry> entries, std::size_t visual_len)
    : entries_(std::move(entries)), visual_len_(visual_len) {
  if (visual_len_ == 0) throw ProviderError("scripted provider needs N_v >= 1");
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.question) {
      exact_[{e.image_ref, normalize_text(*e.question)}] = i;
    } else {
      wildcard_[e.image_ref] = i;
    }
  }
}

ScriptedProvider ScriptedProvider::load(const std::filesystem::path& path, std::size_t visual_len) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open script " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return ScriptedProvider(parse_script(buf.str()), visual_len);
}

std::size_t ScriptedProvider::visual_len_for(const std::string& image_ref) const {
  for (const auto& e : entries_) {
    if (e.image_ref == image_ref && e.attention) return e.attention->visual_len();
  }
  return visual_len_;
}

const ScriptEntry& ScriptedProvider::lookup(const ProviderRequest& req) const {
  if (auto it = exact_.find({req.image_ref, normalize_text(req.question)}); it != exact_.end()) {
    return entries_[it->second];
  }
  if (auto it = wildcard_.find(req.image_ref); it != wildcard_.end()) return entries_[it->second];
  for (const auto& e : entries_) {
    if (e.image_ref == req.image_ref) {
      throw ProviderError("no scripted answer for image '" + req.image_ref + "' and question '" +
                          req.question + "'");
    }
  }
  throw ProviderError("unknown image_ref '" + req.image_ref + "'");
}

AttentionTrace ScriptedProvider::synthetic_trace(const ProviderRequest& req,
                                                 std::string_view answer) const {
  // Single-map trace whose shape over the image depends on image_ref only;
  // each row carries mass 0.5 over the visual tokens.
  const std::size_t nv = visual_len_for(req.image_ref);
  const std::size_t nt = std::max<std::size_t>(
      1, word_tokens(normalize_text(req.question)).size() +
             word_tokens(normalize_text(answer)).size());
  const std::string digest = sha256_hex("scripted-attention|" + req.image_ref);
  std::vector<double> shape(nv);
  double total = 0.0;
  for (std::size_t v = 0; v < nv; ++v) {
    shape[v] = 1.0 + static_cast<double>(static_cast<unsigned char>(digest[v % digest.size()]) % 7);
    total += shape[v];
  }
  AttentionTrace trace(1, 1, nt, nv);
  for (std::size_t t = 0; t < nt; ++t)
    for (std::size_t v = 0; v < nv; ++v) trace.at(0, 0, t, v) = 0.5 * shape[v] / total;
  return trace;
}

GenerationResult ScriptedProvider::generate(const ProviderRequest& req) {
  req.validate();
  log_.push_back(req);
  const ScriptEntry& entry = lookup(req);
  if (req.visual_bias && req.visual_bias->vector.size() != visual_len_for(req.image_ref)) {
    throw ProviderError("visual bias has length " + std::to_string(req.visual_bias->vector.size()) +
                        ", provider has N_v = " + std::to_string(visual_len_for(req.image_ref)));
  }
  const ScriptEntry::Answer& a =
      (req.sample_index && !entry.samples.empty())
          ? entry.samples[static_cast<std::size_t>(*req.sample_index) % entry.samples.size()]
          : entry.answer;
  GenerationResult g = materialize(a, req.temperature);
  if (req.want_attention) {
    g.attention = entry.attention ? *entry.attention : synthetic_trace(req, g.answer_text);
  }
  return g;
}

vac::VisualAttentionVector ScriptedProvider::export_visual_attention(const ProviderRequest& req,
                                                                    std::string_view answer) {
  req.validate();
  const ScriptEntry& entry = lookup(req);
  return vac::aggregate(entry.attention ? *entry.attention : synthetic_trace(req, answer));
}

std::vector<ScriptEntry> parse_script(std::string_view content) {
  std::vector<ScriptEntry> out;
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;
    json j;
    try {
      j = json::parse(raw);
    } catch (const json::parse_error& e) {
      throw DatasetError("malformed JSON at line " + std::to_string(line) + ": " + e.what());
    }
    ScriptEntry e;
    try {
      e.image_ref = j.at("image_ref").get<std::string>();
      if (j.contains("question") && !j["question"].is_null()) {
        e.question = j["question"].get<std::string>();
      }
      if (j.contains("attention")) {
        const auto& a = j["attention"];
        e.attention = AttentionTrace(a.at("L").get<std::size_t>(), a.at("H").get<std::size_t>(),
                                     a.at("N_t").get<std::size_t>(), a.at("N_v").get<std::size_t>(),
                                     a.at("weights").get<std::vector<double>>());
      }
      for (const auto& s : j.value("samples", json::array())) e.samples.push_back(parse_answer(s, line));
    } catch (const json::exception& ex) {
      throw DatasetError("bad script entry at line " + std::to_string(line) + ": " + ex.what());
    } catch (const ShapeError& ex) {
      throw DatasetError("bad script attention at line " + std::to_string(line) + ": " + ex.what());
    }
    e.answer = parse_answer(j, line);
    out.push_back(std::move(e));
  }
  return out;
}

json to_json(const ScriptEntry& e) {
  json j = answer_json(e.answer);
  j["image_ref"] = e.image_ref;
  if (e.question) j["question"] = *e.question;
  if (!e.samples.empty()) {
    j["samples"] = json::array();
    for (const auto& s : e.samples) j["samples"].push_back(answer_json(s));
  }
  if (e.attention) {
    const auto& a = *e.attention;
    j["attention"] = {{"L", a.layers()},
                      {"H", a.heads()},
                      {"N_t", a.text_len()},
                      {"N_v", a.visual_len()},
                      {"weights", std::vector<double>(a.weights().begin(), a.weights().end())}};
  }
  return j;
}

std::string serialize_script(const std::vector<ScriptEntry>& entries) {
  std::string out;
  for (const auto& e : entries) {
    out += to_json(e).dump();
    out += '\n';
  }
  return out;
}

}  // namespace vloop
