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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vloop/types.hpp"

namespace vloop {

enum class DatasetFormat { kJsonLines };

// Loads one record per line:
//   {"record_id", "image_ref", "question", "reference_answer",
//    "question_kind": "open"|"closed" (optional)}
// Blank lines are skipped. Errors name the 1-based line number and field.
std::vector<VqaRecord> load_dataset(const std::filesystem::path& path,
                                    DatasetFormat format = DatasetFormat::kJsonLines);

// Same as load_dataset, reading from an in-memory buffer.
std::vector<VqaRecord> parse_dataset(std::string_view content);

// closed_ended iff the reference normalizes to "yes" or "no".
QuestionKind infer_question_kind(std::string_view reference_answer);

nlohmann::json to_json(const VqaRecord& r);
std::string serialize_dataset(const std::vector<VqaRecord>& records);

}  // namespace vloop
