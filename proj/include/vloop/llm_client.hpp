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
#include <semaphore>
#include <string>
#include <string_view>
#include <vector>

namespace vloop {

struct ChatMessage {
  std::string role;  // "system" | "user"
  std::string content;
};

// Text-only auxiliary LLM used for unit extraction, rephrasing, and judging.
class LlmClient {
 public:
  virtual ~LlmClient() = default;
  virtual std::string id() const = 0;
  // Must be safe to call concurrently.
  virtual std::string complete(const std::vector<ChatMessage>& messages, double temperature) = 0;
};

// Versioned prompt with {name} placeholders.
//
// File format:
//   id: <name>
//   version: <n>
//   --- system
//   ...
//   --- user
//   ...
struct PromptTemplate {
  std::string id;
  int version = 0;
  std::string system;
  std::string user;

  static PromptTemplate parse(std::string_view text);
  static PromptTemplate load(const std::filesystem::path& path);
  // Built-in templates: extract_units, rephrase_question, consistency_judge,
  // green_judge.
  static PromptTemplate builtin(std::string_view id);

  // Throws EvaluatorError for a placeholder without a value.
  std::vector<ChatMessage> render(const std::map<std::string, std::string>& values) const;
};

// OpenAI-compatible /v1/chat/completions client.
struct ChatClientConfig {
  std::string base_url;
  std::string api_key;
  std::string model;
  double timeout_seconds = 120.0;
  int max_concurrent = 4;

  // <PREFIX>_URL, <PREFIX>_TOKEN, <PREFIX>_MODEL, <PREFIX>_TIMEOUT.
  static ChatClientConfig from_env(std::string_view prefix);
};

class HttpChatClient : public LlmClient {
 public:
  explicit HttpChatClient(ChatClientConfig cfg);

  std::string id() const override { return "chat:" + cfg_.model + "@" + cfg_.base_url; }
  std::string complete(const std::vector<ChatMessage>& messages, double temperature) override;

 private:
  ChatClientConfig cfg_;
  std::counting_semaphore<1024> slots_;
};

// Returns the first JSON object embedded in `text` (models often wrap JSON in
// prose or code fences). Throws EvaluatorError carrying `text` otherwise.
std::string extract_json_object(std::string_view text);

}  // namespace vloop
