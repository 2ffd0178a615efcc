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

#include <fstream>
#include <sstream>

#include "vloop/error.hpp"
#include "vloop/pipeline.hpp"

namespace vloop {
namespace {

using nlohmann::json;

std::optional<SemanticUnit> unit_from(const json& j) {
  if (j.is_null()) return std::nullopt;
  SemanticUnit u;
  u.surface = j.at("surface").get<std::string>();
  u.category = category_from_string(j.at("category").get<std::string>()).value_or(Category::kOther);
  u.origin = j.at("origin").get<std::string>() == "answer" ? Origin::kAnswer : Origin::kQuestion;
  return u;
}

VerificationPlan plan_from(const json& j) {
  VerificationPlan p;
  p.strategy = j.at("strategy").get<std::string>() == "logic" ? Strategy::kLogic : Strategy::kRephrase;
  p.verification_question = j.at("verification_question").get<std::string>();
  p.reference_answer = j.at("reference_answer").get<std::string>();
  p.reused_question = j.at("reused_question").get<bool>();
  p.logic_unavailable = j.at("logic_unavailable").get<bool>();
  p.s_q = unit_from(j.at("s_q"));
  p.s_r = unit_from(j.at("s_r"));
  for (const auto& a : j.at("alternatives")) p.alternatives.push_back(*unit_from(a));
  return p;
}

}  // namespace

json DetectionOutcome::to_json() const {
  json j = {{"record_id", record_id}};
  if (error) {
    j["error"] = *error;
    return j;
  }
  j["primary_answer"] = primary_answer;
  j["claim"] = {{"text", claim.text}, {"fallback", claim.fallback}};
  j["plan"] = vloop::to_json(plan);
  j["verification"] = {{"answer", verification_answer},
                       {"temperature", verification_temperature},
                       {"bias_applied", bias_applied},
                       {"bias_alpha", bias_alpha},
                       {"bias_fingerprint", bias_fingerprint}};
  j["attention"] = {{"fingerprint", attention_fingerprint}, {"aggregated", visual_attention}};
  j["consistency"] = vloop::to_json(consistency);
  j["scores"] = scores;
  j["green"] = vloop::to_json(green);
  return j;
}

DetectionOutcome DetectionOutcome::from_json(const json& j) {
  DetectionOutcome o;
  try {
    o.record_id = j.at("record_id").get<std::string>();
    if (j.contains("error")) {
      o.error = j["error"].get<std::string>();
      return o;
    }
    o.primary_answer = j.at("primary_answer").get<std::string>();
    o.claim.text = j.at("claim").at("text").get<std::string>();
    o.claim.fallback = j.at("claim").at("fallback").get<bool>();
    o.plan = plan_from(j.at("plan"));
    const auto& v = j.at("verification");
    o.verification_answer = v.at("answer").get<std::string>();
    o.verification_temperature = v.at("temperature").get<double>();
    o.bias_applied = v.at("bias_applied").get<bool>();
    o.bias_alpha = v.at("bias_alpha").get<double>();
    o.bias_fingerprint = v.at("bias_fingerprint").get<std::string>();
    o.attention_fingerprint = j.at("attention").at("fingerprint").get<std::string>();
    o.visual_attention = j.at("attention").at("aggregated").get<std::vector<double>>();
    const auto& c = j.at("consistency");
    o.consistency = {c.at("score").get<double>(), c.at("loop_closed").get<bool>(),
                     c.at("evaluator_id").get<std::string>()};
    o.scores = j.at("scores").get<std::map<std::string, double>>();
    const auto& g = j.at("green");
    o.green.matched_findings = g.at("matched_findings").get<int>();
    o.green.errors = g.at("errors").get<int>();
    o.green.score = g.at("score").get<double>();
    o.green.label = g.at("label").get<double>();
  } catch (const json::exception& e) {
    throw DatasetError(std::string("malformed outcome: ") + e.what());
  }
  return o;
}

double coverage(const std::vector<DetectionOutcome>& outcomes) {
  if (outcomes.empty()) return 0.0;
  std::size_t ok = 0;
  for (const auto& o : outcomes) ok += o.ok() ? 1 : 0;
  return static_cast<double>(ok) / static_cast<double>(outcomes.size());
}

std::string serialize_outcomes(const std::vector<DetectionOutcome>& outcomes) {
  std::string out;
  for (const auto& o : outcomes) {
    out += o.to_json().dump();
    out += '\n';
  }
  return out;
}

std::vector<DetectionOutcome> parse_outcomes(std::string_view content) {
  std::vector<DetectionOutcome> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(DetectionOutcome::from_json(json::parse(line)));
    } catch (const json::parse_error& e) {
      throw DatasetError("malformed outcome JSON at line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_outcomes(const std::filesystem::path& path, const std::vector<DetectionOutcome>& outcomes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << serialize_outcomes(outcomes);
}

std::vector<DetectionOutcome> read_outcomes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open outcomes " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_outcomes(buf.str());
}

}  // namespace vloop
