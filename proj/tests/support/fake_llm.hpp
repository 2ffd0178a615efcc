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
#include <mutex>
#include <string>
#include <vector>

#include "vloop/llm_client.hpp"

namespace vloop::testing {

// Replies through a callback and records every prompt it was sent.
class FakeLlm : public LlmClient {
 public:
  using Reply = std::function<std::string(const std::vector<ChatMessage>&)>;
  explicit FakeLlm(Reply reply) : reply_(std::move(reply)) {}
  explicit FakeLlm(std::string fixed) : reply_([fixed](const auto&) { return fixed; }) {}

  std::string id() const override { return "fake"; }
  std::string complete(const std::vector<ChatMessage>& messages, double temperature) override {
    std::lock_guard lock(mu_);
    temperatures.push_back(temperature);
    prompts.push_back(messages);
    return reply_(messages);
  }

  std::vector<double> temperatures;
  std::vector<std::vector<ChatMessage>> prompts;

 private:
  Reply reply_;
  std::mutex mu_;
};

}  // namespace vloop::testing
