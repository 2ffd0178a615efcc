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
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vloop/lexicon.hpp"
#include "vloop/llm_client.hpp"

// Verification question generation: primary claim, semantic units, and the
// verification question with its expected answer.
namespace vloop {

enum class Origin { kQuestion, kAnswer };

struct SemanticUnit {
  std::string surface;  // normalized
  Category category = Category::kOther;
  Origin origin = Origin::kQuestion;

  bool operator==(const SemanticUnit&) const = default;
};

struct Claim {
  std::string text;
  bool fallback = false;  // question form not recognized; "Q: ... A: ..." used

  bool operator==(const Claim&) const = default;
};

// Declarative sentence merging the question focus and the answer.
Claim form_claim(std::string_view question, std::string_view answer);

struct UnitPair {
  std::optional<SemanticUnit> s_q;
  std::optional<SemanticUnit> s_r;
  // Other question-side units that were not chosen as s_q.
  std::vector<SemanticUnit> alternatives;
};

// Units must differ after normalization and either belong to different
// categories or share no word.
bool distinct_concepts(const SemanticUnit& a, const SemanticUnit& b);

class UnitExtractor {
 public:
  virtual ~UnitExtractor() = default;
  virtual UnitPair extract(std::string_view question, std::string_view answer) const = 0;
};

// Rule path. s_r is the longest-match unit in the answer. s_q is chosen among
// the question's units, preferring, in order: a different category from s_r,
// a unit outside the leading wh-phrase ("what part of the lung"), and the
// leftmost. When only one side has a unit, that unit is reported as s_q (the
// single focus) and s_r is empty.
class LexiconExtractor : public UnitExtractor {
 public:
  explicit LexiconExtractor(const Lexicon& lexicon) : lexicon_(lexicon) {}
  UnitPair extract(std::string_view question, std::string_view answer) const override;

 private:
  const Lexicon& lexicon_;
};

UnitPair extract_units(std::string_view question, std::string_view answer, const Lexicon& lexicon);

// Remote path: the extract_units prompt at temperature 0. Malformed replies
// raise EvaluatorError carrying the raw payload.
class RemoteUnitExtractor : public UnitExtractor {
 public:
  RemoteUnitExtractor(LlmClient& client,
                      PromptTemplate prompt = PromptTemplate::builtin("extract_units"))
      : client_(client), prompt_(std::move(prompt)) {}
  UnitPair extract(std::string_view question, std::string_view answer) const override;

 private:
  LlmClient& client_;
  PromptTemplate prompt_;
};

class Rephraser {
 public:
  virtual ~Rephraser() = default;
  // Semantics-preserving paraphrase, normalized and ending in "?".
  virtual std::string rephrase(std::string_view question) const = 0;
};

// Deterministic rewrite rules ("what X is ..." -> "which X is ...", "is
// there X" -> "does the image show X", ...), with a prefix fallback.
class TemplateRephraser : public Rephraser {
 public:
  std::string rephrase(std::string_view question) const override;
};

class RemoteRephraser : public Rephraser {
 public:
  RemoteRephraser(LlmClient& client,
                  PromptTemplate prompt = PromptTemplate::builtin("rephrase_question"))
      : client_(client), prompt_(std::move(prompt)) {}
  std::string rephrase(std::string_view question) const override;

 private:
  LlmClient& client_;
  PromptTemplate prompt_;
};

enum class Strategy { kLogic, kRephrase };
enum class StrategyMode { kAuto, kLogic, kRephrase };

const char* to_string(Strategy s);

struct VerificationPlan {
  Strategy strategy = Strategy::kRephrase;
  std::optional<SemanticUnit> s_q;
  std::optional<SemanticUnit> s_r;
  std::string verification_question;  // q_vri
  std::string reference_answer;       // r_vri
  // The primary question was reused verbatim (no-VQG ablation).
  bool reused_question = false;
  // Logic was requested but the units did not allow it.
  bool logic_unavailable = false;
  std::vector<SemanticUnit> alternatives;

  bool operator==(const VerificationPlan&) const = default;
};

// Logic plan when both units exist and are distinct concepts (and the mode
// permits), otherwise rephrase.
VerificationPlan plan_verification(std::string_view question, std::string_view answer,
                                   const UnitPair& units, const Rephraser& rephraser,
                                   StrategyMode mode = StrategyMode::kAuto);

// Category-aware logic question re-querying s_q conditioned on s_r.
std::string logic_question(const SemanticUnit& s_q, const SemanticUnit& s_r);

nlohmann::json to_json(const SemanticUnit& u);
nlohmann::json to_json(const VerificationPlan& p);

}  // namespace vloop
