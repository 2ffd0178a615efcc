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

#include "vloop/green.hpp"

#include <stdexcept>

#include "vloop/error.hpp"
#include "vloop/text.hpp"

namespace vloop {

GreenResult green_from_counts(int matched, int errors) {
  if (matched < 0 || errors < 0) throw std::invalid_argument("GREEN counts must be non-negative");
  GreenResult g;
  g.matched_findings = matched;
  g.errors = errors;
  // No finding and no error: nothing contradicts the reference.
  g.score = (matched + errors) == 0 ? 1.0 : static_cast<double>(matched) / (matched + errors);
  g.label = g.score < 1.0 ? 1.0 : 0.0;
  return g;
}

std::set<std::string> DeterministicFindingMatcher::findings(std::string_view text) const {
  const std::string norm = normalize_text(text);
  std::set<std::string> out;
  const std::string whole = synonyms_.canonical(norm);
  if (whole != norm) {
    out.insert(whole);
    return out;
  }
  const auto tokens = word_tokens(norm);
  for (const auto& m : lexicon_.match_all(norm)) {
    bool negated = false;
    for (std::size_t back = 1; back <= 2 && back <= m.begin; ++back) {
      const std::string& w = tokens[m.begin - back];
      negated = negated || w == "no" || w == "not" || w == "without";
    }
    const std::string term = synonyms_.canonical(m.surface);
    out.insert(negated ? "no " + term : term);
  }
  if (out.empty() && !norm.empty()) out.insert(norm);
  return out;
}

FindingCounts DeterministicFindingMatcher::match(std::string_view candidate,
                                                 std::string_view reference) const {
  const auto c = findings(candidate);
  const auto r = findings(reference);
  FindingCounts counts;
  for (const auto& f : c) {
    if (r.count(f)) {
      ++counts.matched;
    } else {
      ++counts.errors;
    }
  }
  for (const auto& f : r)
    if (!c.count(f)) ++counts.errors;
  return counts;
}

FindingCounts RemoteGreenJudge::match(std::string_view candidate, std::string_view reference) const {
  const std::string raw = client_.complete(
      prompt_.render({{"candidate", std::string(candidate)}, {"reference", std::string(reference)}}), 0.0);
  try {
    const auto j = nlohmann::json::parse(extract_json_object(raw));
    const auto& m = j.at("matched_findings");
    const auto& e = j.at("errors");
    if (!m.is_number_integer() || !e.is_number_integer() || m.get<int>() < 0 || e.get<int>() < 0) {
      throw EvaluatorError("GREEN judge counts must be non-negative integers", raw);
    }
    return {m.get<int>(), e.get<int>()};
  } catch (const nlohmann::json::exception&) {
    throw EvaluatorError("GREEN judge reply is not {matched_findings, errors}", raw);
  }
}

GreenResult green_score(std::string_view candidate, std::string_view reference,
                        const FindingMatcher& matcher) {
  const FindingCounts c = matcher.match(candidate, reference);
  return green_from_counts(c.matched, c.errors);
}

nlohmann::json to_json(const GreenResult& g) {
  return {{"matched_findings", g.matched_findings},
          {"errors", g.errors},
          {"score", g.score},
          {"label", g.label}};
}

}  // namespace vloop
