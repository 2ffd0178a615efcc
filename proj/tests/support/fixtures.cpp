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

#include "fixtures.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "vloop/dataset.hpp"
#include "vloop/text.hpp"

namespace vloop::testing {
namespace {

const std::vector<std::string> kAbnormalities = {"pneumothorax", "pleural effusion", "nodule", "mass",
                                                 "fracture",     "cyst",             "edema",  "hemorrhage"};
const std::vector<std::string> kOrgans = {"left upper lung", "right lower lung", "liver", "left kidney",
                                          "spleen",          "brain",            "heart", "pancreas"};
const std::vector<std::string> kModalities = {"ct", "mri", "x-ray", "ultrasound"};
const std::vector<std::string> kPlanes = {"axial", "coronal", "sagittal"};

std::string other_than(const std::vector<std::string>& pool, const std::string& value, std::mt19937_64& rng) {
  std::vector<std::string> rest;
  for (const auto& p : pool)
    if (p != value) rest.push_back(p);
  return rest[std::uniform_int_distribution<std::size_t>(0, rest.size() - 1)(rng)];
}

ScriptEntry::Answer answer_with_trace(const std::string& text, double lo, double hi, std::mt19937_64& rng) {
  ScriptEntry::Answer a;
  a.text = text;
  std::uniform_real_distribution<double> prob(lo, hi), noise(0.0, 0.25);
  for (std::size_t k = 0; k < std::max<std::size_t>(1, word_tokens(text).size()); ++k) {
    const double p = prob(rng);
    a.token_probs.push_back(p);
    const double h = p < 1.0 ? -p * std::log(p) - (1.0 - p) * std::log(1.0 - p) : 0.0;
    a.token_entropies.push_back(h + noise(rng));
  }
  return a;
}

}  // namespace

PlantedSplit make_planted_split(std::size_t n, std::size_t n_hallucinated, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  std::set<std::size_t> planted(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(std::min(n, n_hallucinated)));

  PlantedSplit split;
  auto pick = [&](const std::vector<std::string>& pool) {
    return pool[std::uniform_int_distribution<std::size_t>(0, pool.size() - 1)(rng)];
  };
  for (std::size_t i = 0; i < n; ++i) {
    char id[32];
    std::snprintf(id, sizeof id, "r%04zu", i);
    VqaRecord rec;
    rec.record_id = id;
    rec.image_ref = std::string("img-") + id;
    const bool bad = planted.count(i) > 0;
    std::string primary, truthful_verification;
    const std::vector<std::string>* pool = nullptr;
    switch (i % 4) {
      case 0: {
        const std::string abn = pick(kAbnormalities);
        rec.question = "Which organ is the " + abn + " located in?";
        rec.reference_answer = pick(kOrgans);
        pool = &kOrgans;
        // The wildcard answers the logic question about the answered organ.
        truthful_verification = bad ? "no abnormality" : abn;
        break;
      }
      case 1:
        rec.question = "What imaging modality is used?";
        rec.reference_answer = pick(kModalities);
        pool = &kModalities;
        break;
      case 2: {
        rec.question = "Is there " + pick(kAbnormalities) + "?";
        rec.reference_answer = std::uniform_int_distribution<int>(0, 1)(rng) ? "yes" : "no";
        static const std::vector<std::string> kYesNo = {"yes", "no"};
        pool = &kYesNo;
        break;
      }
      default:
        rec.question = "In which plane is this image taken?";
        rec.reference_answer = pick(kPlanes);
        pool = &kPlanes;
        break;
    }
    rec.question_kind = infer_question_kind(rec.reference_answer);
    primary = bad ? other_than(*pool, rec.reference_answer, rng) : rec.reference_answer;
    if (truthful_verification.empty()) truthful_verification = rec.reference_answer;

    ScriptEntry exact;
    exact.image_ref = rec.image_ref;
    exact.question = rec.question;
    exact.answer = bad ? answer_with_trace(primary, 0.35, 0.9, rng) : answer_with_trace(primary, 0.5, 1.0, rng);
    std::bernoulli_distribution keep(bad ? 0.4 : 0.85);
    for (int k = 0; k < 2; ++k) {
      const std::string s = keep(rng) ? primary : other_than(*pool, primary, rng);
      exact.samples.push_back(answer_with_trace(s, 0.3, 1.0, rng));
    }
    ScriptEntry wildcard;
    wildcard.image_ref = rec.image_ref;
    wildcard.answer = answer_with_trace(truthful_verification, 0.6, 1.0, rng);

    split.script.push_back(std::move(exact));
    split.script.push_back(std::move(wildcard));
    if (bad) split.hallucinated.insert(rec.record_id);
    split.records.push_back(std::move(rec));
  }
  return split;
}

RunSpec write_planted_split(const PlantedSplit& split, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream(dir / "dataset.jsonl", std::ios::binary) << serialize_dataset(split.records);
  std::ofstream(dir / "script.jsonl", std::ios::binary) << serialize_script(split.script);
  RunSpec spec;
  spec.dataset = dir / "dataset.jsonl";
  spec.provider = "scripted";
  spec.script = dir / "script.jsonl";
  return spec;
}

std::filesystem::path temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("vloop-test-" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

}  // namespace vloop::testing
