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

#include "vloop/lexicon.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

#include "vloop/error.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

constexpr std::pair<Category, const char*> kNames[] = {
    {Category::kAbnormality, "Abnormality"}, {Category::kOrgan, "Organ"},
    {Category::kAttribute, "Attribute"},     {Category::kModality, "Modality"},
    {Category::kPlane, "Plane"},             {Category::kOther, "Other"},
};

constexpr const char* kBuiltin = R"(
[Abnormality]
pneumothorax
pleural effusion
effusion
nodule
pulmonary nodule
mass
cyst
edema
pulmonary edema
fracture
rib fracture
hemorrhage
infarct
tumor
cardiomegaly
atelectasis
consolidation
opacity
calcification
pneumonia
lesion
abscess
hydronephrosis
emphysema
metastasis
infiltrate
[Organ]
lung
lungs
left lung
right lung
left upper lung
left lower lung
right upper lung
right lower lung
upper left lung
upper right lung
lower left lung
lower right lung
lobe
heart
liver
kidney
left kidney
right kidney
spleen
brain
bowel
chest
abdomen
pelvis
spine
stomach
gallbladder
pancreas
bladder
colon
aorta
trachea
diaphragm
mediastinum
[Attribute]
large
small
round
irregular
hyperdense
hypodense
enlarged
bilateral
unilateral
solid
cystic
calcified
well-defined
[Modality]
ct
ct scan
mri
mr
x-ray
xray
ultrasound
pet
[Plane]
axial
coronal
sagittal
transverse
)";

}  // namespace

const char* to_string(Category c) {
  for (const auto& [cat, name] : kNames)
    if (cat == c) return name;
  return "Other";
}

std::optional<Category> category_from_string(std::string_view s) {
  for (const auto& [cat, name] : kNames) {
    const std::string_view n(name);
    if (n.size() == s.size() &&
        std::equal(n.begin(), n.end(), s.begin(), [](char a, char b) {
          return std::tolower(static_cast<unsigned char>(a)) == std::tolower(static_cast<unsigned char>(b));
        })) {
      return cat;
    }
  }
  return std::nullopt;
}

void Lexicon::add(Category category, std::string_view term) {
  auto tokens = word_tokens(normalize_text(term));
  if (tokens.empty()) return;
  max_len_ = std::max(max_len_, tokens.size());
  terms_[std::move(tokens)] = category;
}

std::vector<Lexicon::Match> Lexicon::match_all(std::string_view text) const {
  const auto tokens = word_tokens(normalize_text(text));
  std::vector<Match> out;
  for (std::size_t i = 0; i < tokens.size();) {
    bool found = false;
    for (std::size_t len = std::min(max_len_, tokens.size() - i); len >= 1; --len) {
      std::vector<std::string> key(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                                   tokens.begin() + static_cast<std::ptrdiff_t>(i + len));
      if (auto it = terms_.find(key); it != terms_.end()) {
        out.push_back({i, i + len, join(key, " "), it->second});
        i += len;
        found = true;
        break;
      }
    }
    if (!found) ++i;
  }
  return out;
}

Lexicon Lexicon::parse(std::string_view content) {
  Lexicon lex;
  std::optional<Category> current;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    const auto e = line.find_last_not_of(" \t\r");
    const std::string body = line.substr(b, e - b + 1);
    if (body.front() == '[' && body.back() == ']') {
      current = category_from_string(body.substr(1, body.size() - 2));
      if (!current) {
        throw DatasetError("unknown lexicon category " + body + " at line " + std::to_string(lineno));
      }
      continue;
    }
    if (!current) {
      throw DatasetError("lexicon term before any [Category] at line " + std::to_string(lineno));
    }
    lex.add(*current, body);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open lexicon " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

const Lexicon& Lexicon::builtin() {
  static const Lexicon lex = parse(kBuiltin);
  return lex;
}

}  // namespace vloop
