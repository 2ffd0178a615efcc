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

#include "vloop/llm_client.hpp"

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "httplib.h"
#include "prompts_embedded.hpp"
#include "vloop/error.hpp"

namespace vloop {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

}  // namespace

PromptTemplate PromptTemplate::parse(std::string_view text) {
  PromptTemplate t;
  std::istringstream in{std::string(text)};
  std::string line;
  std::string* section = nullptr;
  while (std::getline(in, line)) {
    if (line.rfind("--- ", 0) == 0) {
      const std::string name = trim(line.substr(4));
      if (name == "system") {
        section = &t.system;
      } else if (name == "user") {
        section = &t.user;
      } else {
        throw EvaluatorError("unknown prompt section '" + name + "'", std::string(text));
      }
      continue;
    }
    if (section == nullptr) {
      if (line.rfind("id:", 0) == 0) t.id = trim(line.substr(3));
      if (line.rfind("version:", 0) == 0) t.version = std::atoi(line.substr(8).c_str());
      continue;
    }
    if (!section->empty()) section->push_back('\n');
    section->append(line);
  }
  t.system = trim(t.system);
  t.user = trim(t.user);
  if (t.id.empty() || t.user.empty()) {
    throw EvaluatorError("prompt template needs an id and a user section", std::string(text));
  }
  return t;
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw EvaluatorError("cannot open prompt template " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

PromptTemplate PromptTemplate::builtin(std::string_view id) {
  for (const auto& [name, text] : prompts::kEmbedded) {
    if (name == id) return parse(text);
  }
  throw EvaluatorError("no built-in prompt template '" + std::string(id) + "'");
}

std::vector<ChatMessage> PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  auto fill = [&](const std::string& src) {
    std::string out;
    for (std::size_t i = 0; i < src.size();) {
      if (src[i] == '{') {
        const auto close = src.find('}', i);
        const std::string key = close == std::string::npos ? "" : src.substr(i + 1, close - i - 1);
        const bool is_name = !key.empty() && key.find_first_not_of(
                                                 "abcdefghijklmnopqrstuvwxyz_") == std::string::npos;
        if (is_name) {
          auto it = values.find(key);
          if (it == values.end()) throw EvaluatorError("prompt " + id + " has no value for {" + key + "}");
          out += it->second;
          i = close + 1;
          continue;
        }
      }
      out.push_back(src[i++]);
    }
    return out;
  };
  std::vector<ChatMessage> msgs;
  if (!system.empty()) msgs.push_back({"system", fill(system)});
  msgs.push_back({"user", fill(user)});
  return msgs;
}

ChatClientConfig ChatClientConfig::from_env(std::string_view prefix) {
  auto get = [&](const char* suffix) {
    const std::string name = std::string(prefix) + suffix;
    const char* v = std::getenv(name.c_str());
    return v ? std::string(v) : std::string();
  };
  ChatClientConfig cfg;
  cfg.base_url = get("_URL");
  cfg.api_key = get("_TOKEN");
  cfg.model = get("_MODEL");
  if (const std::string t = get("_TIMEOUT"); !t.empty()) cfg.timeout_seconds = std::atof(t.c_str());
  return cfg;
}

HttpChatClient::HttpChatClient(ChatClientConfig cfg)
    : cfg_(std::move(cfg)), slots_(std::max(1, cfg_.max_concurrent)) {
  if (cfg_.base_url.empty()) throw EvaluatorError("auxiliary LLM URL is not configured");
}

std::string HttpChatClient::complete(const std::vector<ChatMessage>& messages, double temperature) {
  nlohmann::json body = {{"model", cfg_.model}, {"temperature", temperature}, {"messages", nlohmann::json::array()}};
  for (const auto& m : messages) body["messages"].push_back({{"role", m.role}, {"content", m.content}});

  slots_.acquire();
  httplib::Client cli(cfg_.base_url);
  const auto sec = static_cast<time_t>(cfg_.timeout_seconds);
  cli.set_connection_timeout(sec, 0);
  cli.set_read_timeout(sec, 0);
  if (!cfg_.api_key.empty()) cli.set_bearer_token_auth(cfg_.api_key);
  auto res = cli.Post("/v1/chat/completions", body.dump(), "application/json");
  slots_.release();

  if (!res) throw EvaluatorError("auxiliary LLM request failed: " + httplib::to_string(res.error()));
  if (res->status != 200) {
    throw EvaluatorError("auxiliary LLM returned HTTP " + std::to_string(res->status), res->body);
  }
  try {
    const auto j = nlohmann::json::parse(res->body);
    return j.at("choices").at(0).at("message").at("content").get<std::string>();
  } catch (const nlohmann::json::exception&) {
    throw EvaluatorError("auxiliary LLM response has no choices[0].message.content", res->body);
  }
}

std::string extract_json_object(std::string_view text) {
  const auto begin = text.find('{');
  if (begin != std::string_view::npos) {
    int depth = 0;
    bool in_string = false;
    for (std::size_t i = begin; i < text.size(); ++i) {
      const char c = text[i];
      if (in_string) {
        if (c == '\\') ++i;
        else if (c == '"') in_string = false;
        continue;
      }
      if (c == '"') in_string = true;
      else if (c == '{') ++depth;
      else if (c == '}' && --depth == 0) return std::string(text.substr(begin, i - begin + 1));
    }
  }
  throw EvaluatorError("no JSON object in model output", std::string(text));
}

}  // namespace vloop
