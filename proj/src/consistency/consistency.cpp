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

#include "vloop/consistency.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "vloop/error.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

std::string strip_article(const std::string& s) {
  for (const char* a : {"the ", "a ", "an "}) {
    if (s.rfind(a, 0) == 0 && s.size() > std::char_traits<char>::length(a)) {
      return s.substr(std::char_traits<char>::length(a));
    }
  }
  return s;
}

}  // namespace

std::string SynonymTable::find(const std::string& x) const {
  std::string cur = x;
  for (auto it = parent_.find(cur); it != parent_.end() && it->second != cur; it = parent_.find(cur)) {
    cur = it->second;
  }
  return cur;
}

void SynonymTable::add(std::string_view a, std::string_view b) {
  const std::string na = normalize_text(a);
  const std::string nb = normalize_text(b);
  if (na.empty() || nb.empty()) return;
  parent_.try_emplace(na, na);
  parent_.try_emplace(nb, nb);
  const std::string ra = find(na);
  const std::string rb = find(nb);
  if (ra == rb) return;
  // Smaller string becomes the root so the representative is order-independent.
  if (ra < rb) {
    parent_[rb] = ra;
  } else {
    parent_[ra] = rb;
  }
}

std::string SynonymTable::canonical(std::string_view term) const { return find(normalize_text(term)); }

bool SynonymTable::equivalent(std::string_view a, std::string_view b) const {
  return canonical(a) == canonical(b);
}

SynonymTable SynonymTable::parse(std::string_view content) {
  SynonymTable table;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw DatasetError("synonym line " + std::to_string(lineno) + " is not 'term = term'");
    }
    const std::string a = normalize_text(line.substr(0, eq));
    const std::string b = normalize_text(line.substr(eq + 1));
    if (a.empty() || b.empty()) {
      throw DatasetError("empty synonym term at line " + std::to_string(lineno));
    }
    table.add(a, b);
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open synonym table " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

double DeterministicEvaluator::similarity(std::string_view candidate, std::string_view reference) const {
  const std::string c = strip_article(normalize_text(candidate));
  const std::string r = strip_article(normalize_text(reference));
  return (c == r || synonyms_.equivalent(c, r)) ? 1.0 : 0.0;
}

RemoteJudgeEvaluator::RemoteJudgeEvaluator(LlmClient& client, int max_concurrent, PromptTemplate prompt)
    : client_(client), prompt_(std::move(prompt)), slots_(std::max(1, max_concurrent)) {}

std::string RemoteJudgeEvaluator::id() const {
  return "judge:" + client_.id() + ":" + prompt_.id + "@v" + std::to_string(prompt_.version);
}

double RemoteJudgeEvaluator::similarity(std::string_view candidate, std::string_view reference) const {
  const auto msgs = prompt_.render({{"candidate", std::string(candidate)}, {"reference", std::string(reference)}});
  slots_.acquire();
  std::string reply;
  try {
    reply = client_.complete(msgs, 0.0);
  } catch (...) {
    slots_.release();
    throw;
  }
  slots_.release();
  return parse_judge_score(reply);
}

double parse_judge_score(std::string_view reply) {
  double s = 0.0;
  bool ok = false;
  try {
    const auto j = nlohmann::json::parse(extract_json_object(reply));
    if (j.contains("score") && j["score"].is_number()) {
      s = j["score"].get<double>();
      ok = true;
    }
  } catch (const std::exception&) {
  }
  if (!ok) {
    const std::string t = normalize_text(reply);
    std::size_t used = 0;
    try {
      s = std::stod(t, &used);
      ok = used == t.size();
    } catch (const std::exception&) {
      ok = false;
    }
  }
  if (!ok || !std::isfinite(s)) throw EvaluatorError("unparseable judge score", std::string(reply));
  return std::clamp(s, 0.0, 1.0);
}

ConsistencyResult score_similarity(std::string_view candidate, std::string_view reference,
                                   const Evaluator& evaluator) {
  if (normalize_text(candidate).empty() || normalize_text(reference).empty()) {
    throw std::invalid_argument("consistency check needs non-empty candidate and reference");
  }
  ConsistencyResult r;
  r.score = evaluator.similarity(candidate, reference);
  r.loop_closed = r.score >= evaluator.threshold();
  r.evaluator_id = evaluator.id();
  return r;
}

double vloop_score(const ConsistencyResult& result) { return result.loop_closed ? 0.0 : 1.0; }

nlohmann::json to_json(const ConsistencyResult& r) {
  return {{"score", r.score}, {"loop_closed", r.loop_closed}, {"evaluator_id", r.evaluator_id}};
}

}  // namespace vloop
