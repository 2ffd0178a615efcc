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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace vloop {

enum class Category { kAbnormality, kOrgan, kAttribute, kModality, kPlane, kOther };

const char* to_string(Category c);
std::optional<Category> category_from_string(std::string_view s);  // case-insensitive

// Controlled vocabulary of clinical terms per category, matched by
// longest-match over word tokens.
//
// File format:
//   # comment
//   [Abnormality]
//   pneumothorax
//   pleural effusion
//   [Organ]
//   left upper lung
class Lexicon {
 public:
  struct Match {
    std::size_t begin = 0;  // token range [begin, end) in the matched text
    std::size_t end = 0;
    std::string surface;  // normalized term
    Category category = Category::kOther;
  };

  void add(Category category, std::string_view term);
  bool empty() const { return terms_.empty(); }
  std::size_t size() const { return terms_.size(); }

  // Non-overlapping matches, left to right, preferring the longest term at
  // each position. `text` is normalized first.
  std::vector<Match> match_all(std::string_view text) const;

  static Lexicon parse(std::string_view content);
  static Lexicon load(const std::filesystem::path& path);
  // Small radiology vocabulary shipped with the library.
  static const Lexicon& builtin();

 private:
  std::map<std::vector<std::string>, Category> terms_;  // token sequence -> category
  std::size_t max_len_ = 0;
};

}  // namespace vloop
