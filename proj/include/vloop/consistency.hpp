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

#include <nlohmann/json.hpp>

#include "vloop/llm_client.hpp"

namespace vloop {

// Symmetric (and transitive) equivalence between normalized terms.
//
// File format: one pair per line, "term = term"; '#' starts a comment.
class SynonymTable {
 public:
  void add(std::string_view a, std::string_view b);
  // Representative of the term's equivalence class (the normalized term
  // itself when it has no synonyms).
  std::string canonical(std::string_view term) const;
  bool equivalent(std::string_view a, std::string_view b) const;
  bool empty() const { return parent_.empty(); }

  static SynonymTable parse(std::string_view content);
  static SynonymTable load(const std::filesystem::path& path);

 private:
  std::string find(const std::string& x) const;
  std::map<std::string, std::string> parent_;
};

struct ConsistencyResult {
  double score = 0.0;  // s in [0, 1]
  bool loop_closed = false;
  std::string evaluator_id;

  bool operator==(const ConsistencyResult&) const = default;
};

// Semantic evaluator E(candidate, reference). Implementations are safe to
// call concurrently.
class Evaluator {
 public:
  virtual ~Evaluator() = default;
  virtual std::string id() const = 0;
  // Raw similarity in [0, 1].
  virtual double similarity(std::string_view candidate, std::string_view reference) const = 0;
  // Loop closes iff similarity >= threshold (default 1.0).
  double threshold() const { return threshold_; }
  void set_threshold(double t) { threshold_ = t; }

 private:
  double threshold_ = 1.0;
};

// s = 1 iff the normalized answers, with a leading article dropped, are equal
// or synonyms; else 0.
class DeterministicEvaluator : public Evaluator {
 public:
  explicit DeterministicEvaluator(SynonymTable synonyms = {}) : synonyms_(std::move(synonyms)) {}
  std::string id() const override { return "deterministic"; }
  double similarity(std::string_view candidate, std::string_view reference) const override;
  const SynonymTable& synonyms() const { return synonyms_; }

 private:
  SynonymTable synonyms_;
};

// Auxiliary LLM judge at temperature 0 with a fixed prompt. Accepts
// {"score": x} or a bare number; anything else is an EvaluatorError.
class RemoteJudgeEvaluator : public Evaluator {
 public:
  RemoteJudgeEvaluator(LlmClient& client, int max_concurrent = 4,
                       PromptTemplate prompt = PromptTemplate::builtin("consistency_judge"));
  std::string id() const override;
  double similarity(std::string_view candidate, std::string_view reference) const override;

 private:
  LlmClient& client_;
  PromptTemplate prompt_;
  mutable std::counting_semaphore<1024> slots_;
};

// Parses a judge reply into a score clamped to [0, 1].
double parse_judge_score(std::string_view reply);

// Requires both texts non-empty after normalization (std::invalid_argument).
ConsistencyResult score_similarity(std::string_view candidate, std::string_view reference,
                                   const Evaluator& evaluator);

// 1.0 when the loop is open (hallucination flagged), 0.0 when closed.
double vloop_score(const ConsistencyResult& result);

nlohmann::json to_json(const ConsistencyResult& r);

}  // namespace vloop
