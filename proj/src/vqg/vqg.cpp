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

#include "vloop/vqg.hpp"

#include <regex>
#include <set>

#include "vloop/error.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

const std::set<std::string> kWhWords = {"what", "which", "where", "how", "whose", "who"};
const std::set<std::string> kAuxWords = {"is",  "are", "was", "were", "does", "do",
                                         "did", "can", "could", "has", "have"};

// Token index where the leading wh-phrase ends (0 if the question does not
// start with a wh-word).
std::size_t wh_phrase_end(const std::vector<std::string>& tokens) {
  if (tokens.empty() || !kWhWords.count(tokens[0])) return 0;
  for (std::size_t i = 1; i < tokens.size(); ++i)
    if (kAuxWords.count(tokens[i])) return i;
  return tokens.size();
}

std::set<std::string> word_set(const std::string& s) {
  auto t = word_tokens(s);
  return {t.begin(), t.end()};
}

SemanticUnit unit_from_json(const nlohmann::json& j, Origin origin, const std::string& raw) {
  if (!j.is_object() || !j.contains("surface") || !j["surface"].is_string() ||
      !j.contains("category") || !j["category"].is_string()) {
    throw EvaluatorError("semantic unit must be {surface, category}", raw);
  }
  auto cat = category_from_string(j["category"].get<std::string>());
  if (!cat) throw EvaluatorError("unknown semantic category", raw);
  std::string surface = normalize_text(j["surface"].get<std::string>());
  if (surface.empty()) throw EvaluatorError("semantic unit surface is empty", raw);
  return {std::move(surface), *cat, origin};
}

}  // namespace

const char* to_string(Strategy s) { return s == Strategy::kLogic ? "logic" : "rephrase"; }

bool distinct_concepts(const SemanticUnit& a, const SemanticUnit& b) {
  const std::string sa = normalize_text(a.surface);
  const std::string sb = normalize_text(b.surface);
  if (sa.empty() || sb.empty() || sa == sb) return false;
  if (a.category != b.category) return true;
  const auto wa = word_set(sa);
  for (const auto& w : word_set(sb))
    if (wa.count(w)) return false;
  return true;
}

UnitPair LexiconExtractor::extract(std::string_view question, std::string_view answer) const {
  UnitPair out;
  const auto q_matches = lexicon_.match_all(question);
  const auto a_matches = lexicon_.match_all(answer);

  if (!a_matches.empty()) {
    const auto& best = *std::max_element(
        a_matches.begin(), a_matches.end(),
        [](const auto& x, const auto& y) { return x.end - x.begin < y.end - y.begin; });
    out.s_r = SemanticUnit{best.surface, best.category, Origin::kAnswer};
  }
  if (q_matches.empty()) {
    // Single focus: the answer's unit (if any) is the only concept.
    if (out.s_r) {
      out.s_q = out.s_r;
      out.s_r.reset();
    }
    return out;
  }

  const std::size_t wh_end = wh_phrase_end(word_tokens(normalize_text(question)));
  auto rank = [&](const Lexicon::Match& m) {
    int r = 0;
    if (!out.s_r || m.category != out.s_r->category) r += 2;
    if (m.begin >= wh_end) r += 1;
    return r;
  };
  std::size_t chosen = 0;
  for (std::size_t i = 1; i < q_matches.size(); ++i)
    if (rank(q_matches[i]) > rank(q_matches[chosen])) chosen = i;

  out.s_q = SemanticUnit{q_matches[chosen].surface, q_matches[chosen].category, Origin::kQuestion};
  for (std::size_t i = 0; i < q_matches.size(); ++i) {
    if (i != chosen) out.alternatives.push_back({q_matches[i].surface, q_matches[i].category, Origin::kQuestion});
  }
  return out;
}

UnitPair extract_units(std::string_view question, std::string_view answer, const Lexicon& lexicon) {
  return LexiconExtractor(lexicon).extract(question, answer);
}

UnitPair RemoteUnitExtractor::extract(std::string_view question, std::string_view answer) const {
  const auto msgs = prompt_.render({{"question", std::string(question)}, {"answer", std::string(answer)}});
  const std::string raw = client_.complete(msgs, 0.0);
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(extract_json_object(raw));
  } catch (const nlohmann::json::parse_error&) {
    throw EvaluatorError("unit extraction returned invalid JSON", raw);
  }
  if (!j.contains("s_q") || !j.contains("s_r")) {
    throw EvaluatorError("unit extraction reply lacks s_q / s_r", raw);
  }
  UnitPair out;
  if (!j["s_q"].is_null()) out.s_q = unit_from_json(j["s_q"], Origin::kQuestion, raw);
  if (!j["s_r"].is_null()) out.s_r = unit_from_json(j["s_r"], Origin::kAnswer, raw);
  return out;
}

std::string TemplateRephraser::rephrase(std::string_view question) const {
  const std::string q = normalize_text(question);
  struct Rule {
    std::regex pattern;
    const char* replacement;
  };
  static const std::vector<Rule> kRules = [] {
    std::vector<Rule> r;
    auto add = [&](const char* p, const char* rep) { r.push_back({std::regex(p), rep}); };
    add("^(is|are) there (.+)$", "does the image show $2");
    add("^does the image show (.+)$", "is there $1 in the image");
    add("^what is (the .+)$", "in this image, what is $1");
    add("^what (\\S+( \\S+)?) (is|are|was|were) (.+)$", "which $1 $3 $4");
    add("^which (\\S+( \\S+)?) (is|are|was|were) (.+)$", "what $1 $3 $4");
    add("^where (is|are) (.+)$", "in which location $1 $2");
    add("^how many (.+)$", "what is the number of $1");
    add("^(is|are|was|were|does|do|can) (.+)$", "in this image, $1 $2");
    return r;
  }();
  for (const auto& rule : kRules) {
    if (std::regex_match(q, rule.pattern)) {
      return std::regex_replace(q, rule.pattern, rule.replacement) + "?";
    }
  }
  return "regarding this image, " + q + "?";
}

std::string RemoteRephraser::rephrase(std::string_view question) const {
  const std::string raw = client_.complete(prompt_.render({{"question", std::string(question)}}), 0.0);
  const std::string q = normalize_text(raw);
  if (q.empty()) throw EvaluatorError("rephrase returned an empty question", raw);
  return q + "?";
}

std::string logic_question(const SemanticUnit& s_q, const SemanticUnit& s_r) {
  const std::string& r = s_r.surface;
  switch (s_q.category) {
    case Category::kAbnormality:
      switch (s_r.category) {
        case Category::kOrgan: return "what abnormality is located in the " + r + "?";
        case Category::kAttribute: return "what abnormality appears " + r + "?";
        case Category::kModality: return "what abnormality is seen on " + r + "?";
        case Category::kPlane: return "what abnormality is seen in the " + r + " plane?";
        default: return "what abnormality is associated with the " + r + "?";
      }
    case Category::kOrgan:
      switch (s_r.category) {
        case Category::kAbnormality: return "which organ is the " + r + " located in?";
        case Category::kAttribute: return "which organ appears " + r + "?";
        default: return "which organ is associated with the " + r + "?";
      }
    case Category::kAttribute: return "which attribute describes the " + r + "?";
    case Category::kModality: return "which imaging modality shows the " + r + "?";
    case Category::kPlane: return "in which plane is the " + r + " shown?";
    case Category::kOther: break;
  }
  return "what is associated with the " + r + "?";
}

VerificationPlan plan_verification(std::string_view question, std::string_view answer,
                                   const UnitPair& units, const Rephraser& rephraser,
                                   StrategyMode mode) {
  VerificationPlan plan;
  plan.s_q = units.s_q;
  plan.s_r = units.s_r;
  plan.alternatives = units.alternatives;
  const bool logic_ok = units.s_q && units.s_r && distinct_concepts(*units.s_q, *units.s_r);
  if (mode != StrategyMode::kRephrase && logic_ok) {
    plan.strategy = Strategy::kLogic;
    plan.verification_question = logic_question(*units.s_q, *units.s_r);
    plan.reference_answer = units.s_q->surface;
    return plan;
  }
  plan.logic_unavailable = mode == StrategyMode::kLogic;
  plan.strategy = Strategy::kRephrase;
  plan.verification_question = rephraser.rephrase(question);
  plan.reference_answer = normalize_text(answer);
  return plan;
}

nlohmann::json to_json(const SemanticUnit& u) {
  return {{"surface", u.surface},
          {"category", to_string(u.category)},
          {"origin", u.origin == Origin::kQuestion ? "question" : "answer"}};
}

nlohmann::json to_json(const VerificationPlan& p) {
  nlohmann::json j = {{"strategy", to_string(p.strategy)},
                      {"verification_question", p.verification_question},
                      {"reference_answer", p.reference_answer},
                      {"reused_question", p.reused_question},
                      {"logic_unavailable", p.logic_unavailable},
                      {"s_q", p.s_q ? to_json(*p.s_q) : nlohmann::json()},
                      {"s_r", p.s_r ? to_json(*p.s_r) : nlohmann::json()},
                      {"alternatives", nlohmann::json::array()}};
  for (const auto& a : p.alternatives) j["alternatives"].push_back(to_json(a));
  return j;
}

}  // namespace vloop
