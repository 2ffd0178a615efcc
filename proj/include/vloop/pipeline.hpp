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
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "vloop/baselines.hpp"
#include "vloop/consistency.hpp"
#include "vloop/green.hpp"
#include "vloop/provider.hpp"
#include "vloop/types.hpp"
#include "vloop/vqg.hpp"

namespace vloop {

enum class Ablation { kNone, kNoVqg, kNoVac };

const char* to_string(Ablation a);
Ablation ablation_from_string(std::string_view s);  // none | no-vqg | no-vac
StrategyMode strategy_mode_from_string(std::string_view s);  // auto | logic | rephrase
const char* to_string(StrategyMode m);

// Detection methods a run can score.
inline const std::vector<std::string> kAllMethods = {"vloop",   "avgprob", "avgent", "maxprob",
                                                     "maxent",  "se",      "radflag"};

struct PipelineConfig {
  double alpha = 0.7;
  double temp_primary = 0.1;
  double temp_verify = 0.1;
  double temp_sample = 1.0;  // K-sample baselines
  double temp_no_vqg = 1.0;  // verification temperature when VQG is ablated
  int k_samples = 2;
  int max_tokens = 16;  // shared by primary and verification
  StrategyMode strategy = StrategyMode::kAuto;
  Ablation ablation = Ablation::kNone;
  std::vector<std::string> methods = kAllMethods;
  double fusion_weight = 0.5;
  baselines::ClusterWeighting se_weighting = baselines::ClusterWeighting::kFrequency;
  double consistency_threshold = 1.0;
  int threads = 1;

  // Throws std::invalid_argument on out-of-range values or unknown methods.
  void validate() const;
  bool vac_active() const { return ablation != Ablation::kNoVac; }
  bool wants(std::string_view method) const;

  nlohmann::json to_json() const;
  static PipelineConfig from_json(const nlohmann::json& j);
  // Hash over every field that can change an outcome (threads excluded).
  std::string hash() const;
};

// Stage artifacts keyed by (record_id, provider id, config hash, stage).
// Reads may come from any thread; writes are serialized. With a directory,
// entries persist as <dir>/<key>.json.
class ArtifactCache {
 public:
  ArtifactCache() = default;
  explicit ArtifactCache(std::filesystem::path dir);

  static std::string key(std::string_view record_id, std::string_view provider_id,
                         std::string_view config_hash, std::string_view stage);

  std::optional<nlohmann::json> get(const std::string& key) const;
  void put(const std::string& key, const nlohmann::json& value);

  std::size_t hits() const;
  std::size_t misses() const;
  // "record_id/stage" -> key for every lookup made so far.
  std::map<std::string, std::string> index() const;
  void note(const std::string& record_stage, const std::string& key);

 private:
  std::optional<std::filesystem::path> dir_;
  mutable std::mutex mu_;
  std::map<std::string, nlohmann::json> mem_;
  std::map<std::string, std::string> index_;
  mutable std::size_t hits_ = 0;
  mutable std::size_t misses_ = 0;
};

struct DetectionOutcome {
  std::string record_id;
  std::optional<std::string> error;  // "<stage>: <message>" for a failed record

  std::string primary_answer;
  Claim claim;
  VerificationPlan plan;
  std::string verification_answer;
  double verification_temperature = 0.0;
  bool bias_applied = false;
  double bias_alpha = 0.0;
  std::string attention_fingerprint;  // of the aggregated attention exported at stage 1
  std::string bias_fingerprint;       // of the bias vector sent at stage 3
  std::vector<double> visual_attention;
  ConsistencyResult consistency;
  std::map<std::string, double> scores;  // method -> detection score
  GreenResult green;

  bool ok() const { return !error.has_value(); }

  nlohmann::json to_json() const;
  static DetectionOutcome from_json(const nlohmann::json& j);
  bool operator==(const DetectionOutcome&) const = default;
};

// Non-owning handles to everything a run needs besides the provider.
struct PipelineComponents {
  ProviderFactory provider_factory;  // called once per worker
  const UnitExtractor* extractor = nullptr;
  const Rephraser* rephraser = nullptr;
  const Evaluator* evaluator = nullptr;
  const FindingMatcher* matcher = nullptr;
  ArtifactCache* cache = nullptr;
  const std::map<std::string, double>* external_scores = nullptr;  // fused as "external"
};

// Runs the four stages for one record on `provider`. Never throws for
// per-record failures; they are reported in DetectionOutcome::error.
DetectionOutcome run_record(const VqaRecord& record, const PipelineConfig& cfg, Provider& provider,
                            const PipelineComponents& components);

// Runs every record with cfg.threads workers, each with its own provider.
// Output order follows input order and does not depend on the thread count.
std::vector<DetectionOutcome> run_split(const std::vector<VqaRecord>& records, const PipelineConfig& cfg,
                                        const PipelineComponents& components);

// run_split with cfg.ablation replaced by `mode`.
std::vector<DetectionOutcome> run_ablation(const std::vector<VqaRecord>& records, Ablation mode,
                                           PipelineConfig cfg, const PipelineComponents& components);

double coverage(const std::vector<DetectionOutcome>& outcomes);

std::string serialize_outcomes(const std::vector<DetectionOutcome>& outcomes);
std::vector<DetectionOutcome> parse_outcomes(std::string_view content);
void write_outcomes(const std::filesystem::path& path, const std::vector<DetectionOutcome>& outcomes);
std::vector<DetectionOutcome> read_outcomes(const std::filesystem::path& path);

}  // namespace vloop
