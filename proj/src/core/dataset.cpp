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

#include "vloop/dataset.hpp"

#include <fstream>
#include <sstream>
#include <unordered_set>

#include "vloop/error.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

std::string at_line(std::size_t line) { return " at line " + std::to_string(line); }

std::string required_string(const nlohmann::json& obj, const char* field, std::size_t line) {
  auto it = obj.find(field);
  if (it == obj.end()) {
    throw DatasetError(std::string("missing field ") + field + at_line(line));
  }
  if (!it->is_string()) {
    throw DatasetError(std::string("field ") + field + " must be a string" + at_line(line));
  }
  return it->get<std::string>();
}

}  // namespace

QuestionKind infer_question_kind(std::string_view reference_answer) {
  const std::string n = normalize_text(reference_answer);
  return (n == "yes" || n == "no") ? QuestionKind::kClosedEnded : QuestionKind::kOpenEnded;
}

std::vector<VqaRecord> parse_dataset(std::string_view content) {
  std::vector<VqaRecord> records;
  std::unordered_set<std::string> seen;
  std::istringstream in{std::string(content)};
  std::string raw;
  std::size_t line = 0;
  while (std::getline(in, raw)) {
    ++line;
    if (raw.find_first_not_of(" \t\r") == std::string::npos) continue;

    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::parse_error& e) {
      throw DatasetError("malformed JSON" + at_line(line) + ": " + e.what());
    }
    if (!obj.is_object()) throw DatasetError("record is not an object" + at_line(line));

    VqaRecord r;
    r.record_id = required_string(obj, "record_id", line);
    r.image_ref = required_string(obj, "image_ref", line);
    r.question = required_string(obj, "question", line);
    r.reference_answer = required_string(obj, "reference_answer", line);

    if (r.record_id.empty()) throw DatasetError("empty field record_id" + at_line(line));
    if (normalize_text(r.question).empty()) {
      throw DatasetError("field question is empty after normalization" + at_line(line));
    }
    if (normalize_text(r.reference_answer).empty()) {
      throw DatasetError("field reference_answer is empty after normalization" + at_line(line));
    }

    if (auto it = obj.find("question_kind"); it != obj.end() && !it->is_null()) {
      const std::string kind = it->is_string() ? it->get<std::string>() : std::string();
      if (kind == "open") {
        r.question_kind = QuestionKind::kOpenEnded;
      } else if (kind == "closed") {
        r.question_kind = QuestionKind::kClosedEnded;
      } else {
        throw DatasetError("field question_kind must be \"open\" or \"closed\"" + at_line(line));
      }
    } else {
      r.question_kind = infer_question_kind(r.reference_answer);
    }

    if (!seen.insert(r.record_id).second) {
      throw DatasetError("duplicate record_id " + r.record_id + at_line(line));
    }
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<VqaRecord> load_dataset(const std::filesystem::path& path, DatasetFormat format) {
  if (format != DatasetFormat::kJsonLines) throw DatasetError("unsupported dataset format");
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open dataset " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_dataset(buf.str());
}

nlohmann::json to_json(const VqaRecord& r) {
  return {{"record_id", r.record_id},
          {"image_ref", r.image_ref},
          {"question", r.question},
          {"reference_answer", r.reference_answer},
          {"question_kind", to_string(r.question_kind)}};
}

std::string serialize_dataset(const std::vector<VqaRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += to_json(r).dump();
    out += '\n';
  }
  return out;
}

}  // namespace vloop
