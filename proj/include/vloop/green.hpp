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

#include <set>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "vloop/consistency.hpp"
#include "vloop/lexicon.hpp"
#include "vloop/llm_client.hpp"

namespace vloop {

struct FindingCounts {
  int matched = 0;
  int errors = 0;
};

struct GreenResult {
  int matched_findings = 0;
  int errors = 0;
  double score = 1.0;  // matched / (matched + errors); 1.0 when both are 0
  double label = 0.0;  // 1.0 (hallucinated) iff score < 1.0

  bool operator==(const GreenResult&) const = default;
};

// Builds a GreenResult from counts. Throws std::invalid_argument on negative
// counts.
GreenResult green_from_counts(int matched, int errors);

class FindingMatcher {
 public:
  virtual ~FindingMatcher() = default;
  virtual std::string id() const = 0;
  virtual FindingCounts match(std::string_view candidate, std::string_view reference) const = 0;
};

// Findings are lexicon terms (negated as "no <term>" after no/not/without),
// mapped through the synonym table. Text with no lexicon term is one finding
// as a whole. matched = |C & R|, errors = |C \ R| + |R \ C|.
class DeterministicFindingMatcher : public FindingMatcher {
 public:
  DeterministicFindingMatcher(const Lexicon& lexicon, SynonymTable synonyms = {})
      : lexicon_(lexicon), synonyms_(std::move(synonyms)) {}
  std::string id() const override { return "deterministic-findings"; }
  FindingCounts match(std::string_view candidate, std::string_view reference) const override;

  std::set<std::string> findings(std::string_view text) const;

 private:
  const Lexicon& lexicon_;
  SynonymTable synonyms_;
};

// GREEN-style remote judge returning {"matched_findings": m, "errors": e}.
class RemoteGreenJudge : public FindingMatcher {
 public:
  RemoteGreenJudge(LlmClient& client, PromptTemplate prompt = PromptTemplate::builtin("green_judge"))
      : client_(client), prompt_(std::move(prompt)) {}
  std::string id() const override { return "green-judge:" + client_.id(); }
  FindingCounts match(std::string_view candidate, std::string_view reference) const override;

 private:
  LlmClient& client_;
  PromptTemplate prompt_;
};

GreenResult green_score(std::string_view candidate, std::string_view reference,
                        const FindingMatcher& matcher);

nlohmann::json to_json(const GreenResult& g);

}  // namespace vloop
