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
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "vloop/manifest.hpp"
#include "vloop/pipeline.hpp"

namespace vloop {

// Everything a detection run is built from. Serialized as the config file and
// as the manifest's config snapshot. Endpoints and credentials for remote
// services come from the environment, never from this struct.
struct RunSpec {
  std::filesystem::path dataset;
  std::string provider = "scripted";  // toy | scripted | http
  std::filesystem::path script;       // scripted provider fixture
  std::uint64_t toy_seed = 20240607;
  std::size_t visual_len = 4;         // scripted provider N_v
  std::filesystem::path lexicon;      // empty -> built-in vocabulary
  std::filesystem::path synonyms;     // empty -> no synonyms
  std::string evaluator = "deterministic";  // deterministic | remote
  std::string extractor = "lexicon";        // lexicon | remote
  std::string rephraser = "template";       // template | remote
  std::string matcher = "deterministic";    // deterministic | remote
  std::filesystem::path fuse_with;    // external per-record scores
  std::filesystem::path cache_dir;    // empty -> in-memory cache
  PipelineConfig pipeline;

  void validate() const;
  nlohmann::json to_json() const;
  // Missing keys keep their defaults; unknown keys are rejected.
  static RunSpec from_json(const nlohmann::json& j);
  // Relative paths inside the file resolve against the file's directory.
  static RunSpec load(const std::filesystem::path& path);
};

// Owns the provider factory and every evaluator component of a run.
class Runner {
 public:
  explicit Runner(RunSpec spec);
  ~Runner();
  Runner(const Runner&) = delete;
  Runner& operator=(const Runner&) = delete;

  const RunSpec& spec() const { return spec_; }
  const PipelineComponents& components() const { return components_; }
  ArtifactCache& cache() { return *cache_; }

  std::vector<DetectionOutcome> run(const std::vector<VqaRecord>& records);

 private:
  struct State;
  RunSpec spec_;
  std::unique_ptr<State> state_;
  std::unique_ptr<ArtifactCache> cache_;
  PipelineComponents components_;
};

struct RunResult {
  std::vector<DetectionOutcome> outcomes;
  RunManifest manifest;
  nlohmann::json report;
};

// Runs `spec` and writes outcomes.jsonl, manifest.json and report.json
// into `out_dir`.
RunResult detect(const RunSpec& spec, const std::filesystem::path& out_dir);

// Re-runs a saved manifest into `out_dir`. Throws DatasetError when the
// dataset no longer matches the recorded fingerprint.
RunResult replay(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir);

struct ReportOptions {
  double fusion_weight = 0.5;
};

// Per-method {auc, aug, auc_pct, aug_pct, n, n_pos, curve} plus fused
// "<method>+vloop" entries, coverage and the scoring conventions in "notes".
nlohmann::json evaluate_outcomes(const std::vector<DetectionOutcome>& outcomes,
                                 const ReportOptions& options = {});

// Reads <dir>/outcomes.jsonl (fusion weight from <dir>/manifest.json when
// present) and writes <dir>/report.json.
nlohmann::json evaluate_directory(const std::filesystem::path& dir);

// "0.1..1.3" (step 0.2), "0.1..1.3:0.1", or "0.1,0.5,0.9".
std::vector<double> parse_alpha_values(std::string_view text);

// One detection run per alpha under <out_dir>/alpha_<value>; returns one row
// per alpha and writes them to <out_dir>/sweep.jsonl.
std::vector<nlohmann::json> sweep_alpha(const RunSpec& spec, const std::vector<double>& alphas,
                                        const std::filesystem::path& out_dir);

}  // namespace vloop
