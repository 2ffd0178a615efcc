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

#include "vloop/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <memory>
#include <stdexcept>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "vloop/error.hpp"
#include "vloop/hash.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

using nlohmann::json;

json gen_to_json(const GenerationResult& g) {
  return {{"answer", g.answer_text},
          {"token_probs", g.token_probs},
          {"token_entropies", g.token_entropies},
          {"temperature", g.temperature_used}};
}

GenerationResult gen_from_json(const json& j) {
  GenerationResult g;
  g.answer_text = j.at("answer").get<std::string>();
  g.token_probs = j.at("token_probs").get<std::vector<double>>();
  g.token_entropies = j.at("token_entropies").get<std::vector<double>>();
  g.temperature_used = j.at("temperature").get<double>();
  return g;
}

// Looks `stage` up in the cache, computing and storing it on a miss.
class StageCache {
 public:
  StageCache(ArtifactCache* cache, const std::string& record_id, const std::string& provider_id,
             const std::string& config_hash)
      : cache_(cache), record_id_(record_id), provider_id_(provider_id), config_hash_(config_hash) {}

  template <typename Fn>
  json get(const std::string& stage, Fn&& compute) {
    if (!cache_) return compute();
    const std::string key = ArtifactCache::key(record_id_, provider_id_, config_hash_, stage);
    cache_->note(record_id_ + "/" + stage, key);
    if (auto hit = cache_->get(key)) return *hit;
    json value = compute();
    cache_->put(key, value);
    return value;
  }

 private:
  ArtifactCache* cache_;
  const std::string& record_id_;
  const std::string& provider_id_;
  const std::string& config_hash_;
};

}  // namespace

const char* to_string(Ablation a) {
  switch (a) {
    case Ablation::kNoVqg: return "no-vqg";
    case Ablation::kNoVac: return "no-vac";
    case Ablation::kNone: break;
  }
  return "none";
}

Ablation ablation_from_string(std::string_view s) {
  if (s == "none" || s == "full") return Ablation::kNone;
  if (s == "no-vqg" || s == "no_vqg") return Ablation::kNoVqg;
  if (s == "no-vac" || s == "no_vac") return Ablation::kNoVac;
  throw std::invalid_argument("unknown ablation '" + std::string(s) + "'");
}

StrategyMode strategy_mode_from_string(std::string_view s) {
  if (s == "auto") return StrategyMode::kAuto;
  if (s == "logic") return StrategyMode::kLogic;
  if (s == "rephrase") return StrategyMode::kRephrase;
  throw std::invalid_argument("unknown strategy '" + std::string(s) + "'");
}

const char* to_string(StrategyMode m) {
  switch (m) {
    case StrategyMode::kLogic: return "logic";
    case StrategyMode::kRephrase: return "rephrase";
    case StrategyMode::kAuto: break;
  }
  return "auto";
}

void PipelineConfig::validate() const {
  auto finite_nonneg = [](double x) { return std::isfinite(x) && x >= 0.0; };
  if (!finite_nonneg(alpha)) throw std::invalid_argument("alpha must be finite and >= 0");
  if (!finite_nonneg(temp_primary) || !finite_nonneg(temp_verify) || !finite_nonneg(temp_sample) ||
      !finite_nonneg(temp_no_vqg)) {
    throw std::invalid_argument("temperatures must be finite and >= 0");
  }
  if (k_samples < 1) throw std::invalid_argument("k_samples must be >= 1");
  if (max_tokens < 1) throw std::invalid_argument("max_tokens must be >= 1");
  if (!(fusion_weight >= 0.0 && fusion_weight <= 1.0)) {
    throw std::invalid_argument("fusion weight must be in [0, 1]");
  }
  if (!(consistency_threshold >= 0.0 && consistency_threshold <= 1.0)) {
    throw std::invalid_argument("consistency threshold must be in [0, 1]");
  }
  if (threads < 1) throw std::invalid_argument("threads must be >= 1");
  if (methods.empty()) throw std::invalid_argument("no detection methods configured");
  for (const auto& m : methods) {
    if (std::find(kAllMethods.begin(), kAllMethods.end(), m) == kAllMethods.end()) {
      throw std::invalid_argument("unknown method '" + m + "'");
    }
  }
}

bool PipelineConfig::wants(std::string_view method) const {
  return std::find(methods.begin(), methods.end(), method) != methods.end();
}

json PipelineConfig::to_json() const {
  return {{"alpha", alpha},
          {"temp_primary", temp_primary},
          {"temp_verify", temp_verify},
          {"temp_sample", temp_sample},
          {"temp_no_vqg", temp_no_vqg},
          {"k_samples", k_samples},
          {"max_tokens", max_tokens},
          {"strategy", to_string(strategy)},
          {"ablation", to_string(ablation)},
          {"methods", methods},
          {"fusion_weight", fusion_weight},
          {"se_weighting", se_weighting == baselines::ClusterWeighting::kFrequency ? "frequency" : "likelihood"},
          {"consistency_threshold", consistency_threshold},
          {"threads", threads}};
}

PipelineConfig PipelineConfig::from_json(const json& j) {
  PipelineConfig c;
  c.alpha = j.value("alpha", c.alpha);
  c.temp_primary = j.value("temp_primary", c.temp_primary);
  c.temp_verify = j.value("temp_verify", c.temp_verify);
  c.temp_sample = j.value("temp_sample", c.temp_sample);
  c.temp_no_vqg = j.value("temp_no_vqg", c.temp_no_vqg);
  c.k_samples = j.value("k_samples", c.k_samples);
  c.max_tokens = j.value("max_tokens", c.max_tokens);
  c.strategy = strategy_mode_from_string(j.value("strategy", std::string("auto")));
  c.ablation = ablation_from_string(j.value("ablation", std::string("none")));
  c.methods = j.value("methods", c.methods);
  c.fusion_weight = j.value("fusion_weight", c.fusion_weight);
  const std::string w = j.value("se_weighting", std::string("frequency"));
  if (w != "frequency" && w != "likelihood") throw std::invalid_argument("unknown se_weighting '" + w + "'");
  c.se_weighting = w == "frequency" ? baselines::ClusterWeighting::kFrequency
                                    : baselines::ClusterWeighting::kLikelihood;
  c.consistency_threshold = j.value("consistency_threshold", c.consistency_threshold);
  c.threads = j.value("threads", c.threads);
  c.validate();
  return c;
}

std::string PipelineConfig::hash() const {
  json j = to_json();
  j.erase("threads");
  return sha256_hex(j.dump());
}

ArtifactCache::ArtifactCache(std::filesystem::path dir) : dir_(std::move(dir)) {
  std::filesystem::create_directories(*dir_);
}

std::string ArtifactCache::key(std::string_view record_id, std::string_view provider_id,
                               std::string_view config_hash, std::string_view stage) {
  json j = {record_id, provider_id, config_hash, stage};
  return sha256_hex(j.dump());
}

std::optional<json> ArtifactCache::get(const std::string& key) const {
  std::lock_guard lock(mu_);
  if (auto it = mem_.find(key); it != mem_.end()) {
    ++hits_;
    return std::optional<json>(std::in_place, it->second);
  }
  if (dir_) {
    std::ifstream in(*dir_ / (key + ".json"), std::ios::binary);
    if (in) {
      try {
        json value = json::parse(in);
        ++hits_;
        return std::optional<json>(std::in_place, std::move(value));
      } catch (const json::parse_error&) {
        // Corrupt entry: treat as a miss; it is overwritten on the next put.
      }
    }
  }
  ++misses_;
  return std::nullopt;
}

void ArtifactCache::put(const std::string& key, const json& value) {
  std::lock_guard lock(mu_);
  mem_[key] = value;
  if (dir_) {
    const auto path = *dir_ / (key + ".json");
    const auto tmp = *dir_ / (key + ".json.tmp");
    {
      std::ofstream out(tmp, std::ios::binary);
      out << value.dump();
    }
    std::filesystem::rename(tmp, path);
  }
}

std::size_t ArtifactCache::hits() const {
  std::lock_guard lock(mu_);
  return hits_;
}

std::size_t ArtifactCache::misses() const {
  std::lock_guard lock(mu_);
  return misses_;
}

std::map<std::string, std::string> ArtifactCache::index() const {
  std::lock_guard lock(mu_);
  return index_;
}

void ArtifactCache::note(const std::string& record_stage, const std::string& key) {
  std::lock_guard lock(mu_);
  index_[record_stage] = key;
}

DetectionOutcome run_record(const VqaRecord& record, const PipelineConfig& cfg, Provider& provider,
                            const PipelineComponents& c) {
  DetectionOutcome out;
  out.record_id = record.record_id;
  const std::string provider_id = provider.id();
  const std::string config_hash = cfg.hash();
  StageCache cache(c.cache, record.record_id, provider_id, config_hash);
  std::string stage = "primary";
  try {
    if (!c.evaluator || !c.matcher || (!c.extractor && cfg.ablation != Ablation::kNoVqg) ||
        (!c.rephraser && cfg.ablation != Ablation::kNoVqg)) {
      throw std::invalid_argument("pipeline components are not fully configured");
    }

    // (1) Primary VQA, recording attention.
    ProviderRequest primary_req;
    primary_req.image_ref = record.image_ref;
    primary_req.question = record.question;
    primary_req.temperature = cfg.temp_primary;
    primary_req.max_tokens = cfg.max_tokens;
    primary_req.want_attention = cfg.vac_active();
    std::optional<AttentionTrace> fresh_trace;
    const GenerationResult primary = gen_from_json(cache.get("primary", [&] {
      GenerationResult g = provider.generate(primary_req);
      fresh_trace = g.attention;
      return gen_to_json(g);
    }));
    out.primary_answer = primary.answer_text;
    out.claim = form_claim(record.question, primary.answer_text);

    std::optional<vac::VisualAttentionVector> attention;
    if (cfg.vac_active()) {
      stage = "attention";
      attention = vac::VisualAttentionVector{cache.get("attention", [&] {
        vac::VisualAttentionVector v = fresh_trace ? vac::aggregate(*fresh_trace)
                                                   : provider.export_visual_attention(primary_req, primary.answer_text);
        return json(v.values);
      }).get<std::vector<double>>()};
      attention->validate();
      out.visual_attention = attention->values;
      out.attention_fingerprint = fingerprint(attention->values);
    }

    // (2) Verification question generation.
    stage = "vqg";
    if (cfg.ablation == Ablation::kNoVqg) {
      out.plan.strategy = Strategy::kRephrase;
      out.plan.verification_question = record.question;
      out.plan.reference_answer = normalize_text(primary.answer_text);
      out.plan.reused_question = true;
    } else {
      const UnitPair units = c.extractor->extract(record.question, primary.answer_text);
      out.plan = plan_verification(record.question, primary.answer_text, units, *c.rephraser, cfg.strategy);
    }

    // (3) Verification VQA under the consistency bias.
    stage = "verification";
    ProviderRequest verify_req;
    verify_req.image_ref = record.image_ref;
    verify_req.question = out.plan.verification_question;
    verify_req.temperature = cfg.ablation == Ablation::kNoVqg ? cfg.temp_no_vqg : cfg.temp_verify;
    verify_req.max_tokens = cfg.max_tokens;
    if (attention) {
      verify_req.visual_bias = VisualBias{*attention, cfg.alpha};
      out.bias_fingerprint = fingerprint(verify_req.visual_bias->vector.values);
      if (out.bias_fingerprint != out.attention_fingerprint) {
        throw Error("verification bias does not match the exported primary attention");
      }
      out.bias_applied = true;
      out.bias_alpha = cfg.alpha;
    }
    out.verification_temperature = verify_req.temperature;
    const GenerationResult verification =
        gen_from_json(cache.get("verification", [&] { return gen_to_json(provider.generate(verify_req)); }));
    out.verification_answer = verification.answer_text;

    // (4) Semantic consistency.
    stage = "consistency";
    const json consistency = cache.get("consistency", [&] {
      return to_json(score_similarity(verification.answer_text, out.plan.reference_answer, *c.evaluator));
    });
    const double s = consistency.at("score").get<double>();
    out.consistency = {s, s >= cfg.consistency_threshold, consistency.at("evaluator_id").get<std::string>()};
    if (cfg.wants("vloop")) out.scores["vloop"] = vloop_score(out.consistency);

    // Baselines from the primary trace and, when needed, K samples.
    stage = "baselines";
    if (cfg.wants("avgprob")) out.scores["avgprob"] = baselines::avg_prob(primary);
    if (cfg.wants("maxprob")) out.scores["maxprob"] = baselines::max_prob(primary);
    if (cfg.wants("avgent")) out.scores["avgent"] = baselines::avg_ent(primary);
    if (cfg.wants("maxent")) out.scores["maxent"] = baselines::max_ent(primary);
    if (cfg.wants("se") || cfg.wants("radflag")) {
      stage = "samples";
      const json samples_json = cache.get("samples", [&] {
        json arr = json::array();
        for (int k = 0; k < cfg.k_samples; ++k) {
          ProviderRequest sreq = primary_req;
          sreq.want_attention = false;
          sreq.temperature = cfg.temp_sample;
          sreq.sample_index = k;
          arr.push_back(gen_to_json(provider.generate(sreq)));
        }
        return arr;
      });
      baselines::SampleSet samples;
      for (const auto& s : samples_json) samples.push_back(gen_from_json(s));
      stage = "baselines";
      if (cfg.wants("se")) out.scores["se"] = baselines::semantic_entropy(samples, *c.evaluator, cfg.se_weighting);
      if (cfg.wants("radflag")) out.scores["radflag"] = baselines::radflag(primary.answer_text, samples, *c.evaluator);
    }
    if (c.external_scores) {
      auto it = c.external_scores->find(record.record_id);
      if (it == c.external_scores->end()) throw Error("no external score for this record");
      out.scores["external"] = it->second;
    }

    // Hallucination label.
    stage = "green";
    const json green = cache.get("green", [&] {
      return to_json(green_score(primary.answer_text, record.reference_answer, *c.matcher));
    });
    out.green = green_from_counts(green.at("matched_findings").get<int>(), green.at("errors").get<int>());
  } catch (const std::exception& e) {
    DetectionOutcome failed;
    failed.record_id = record.record_id;
    failed.error = stage + ": " + e.what();
    return failed;
  }
  return out;
}

std::vector<DetectionOutcome> run_split(const std::vector<VqaRecord>& records, const PipelineConfig& cfg,
                                        const PipelineComponents& components) {
  cfg.validate();
  if (!components.provider_factory) throw std::invalid_argument("no provider factory configured");

  int workers = cfg.threads;
#ifndef _OPENMP
  workers = 1;
#endif
  workers = std::max(1, std::min<int>(workers, static_cast<int>(std::max<std::size_t>(1, records.size()))));
  std::vector<std::unique_ptr<Provider>> providers;
  for (int w = 0; w < workers; ++w) providers.push_back(components.provider_factory());

  std::vector<DetectionOutcome> out(records.size());
  const auto n = static_cast<std::int64_t>(records.size());
#pragma omp parallel for num_threads(workers) schedule(dynamic, 1)
  for (std::int64_t i = 0; i < n; ++i) {
    int worker = 0;
#ifdef _OPENMP
    worker = omp_get_thread_num();
#endif
    out[static_cast<std::size_t>(i)] =
        run_record(records[static_cast<std::size_t>(i)], cfg, *providers[static_cast<std::size_t>(worker)], components);
  }
  return out;
}

std::vector<DetectionOutcome> run_ablation(const std::vector<VqaRecord>& records, Ablation mode,
                                           PipelineConfig cfg, const PipelineComponents& components) {
  cfg.ablation = mode;
  return run_split(records, cfg, components);
}

}  // namespace vloop
