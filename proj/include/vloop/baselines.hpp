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
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "vloop/consistency.hpp"
#include "vloop/types.hpp"

// Uncertainty baselines. Every function returns a detection score oriented so
// that higher means more likely hallucinated.
namespace vloop::baselines {

// K sampled generations for one record.
using SampleSet = std::vector<GenerationResult>;

// -mean(token_probs). Throws std::invalid_argument on an empty generation.
double avg_prob(const GenerationResult& gen);
// -max(token_probs).
double max_prob(const GenerationResult& gen);
// mean(token_entropies).
double avg_ent(const GenerationResult& gen);
// max(token_entropies).
double max_ent(const GenerationResult& gen);

enum class ClusterWeighting {
  kFrequency,   // p_c = |c| / K
  kLikelihood,  // p_c proportional to the summed sequence likelihoods in c
};

// Groups sample indices into clusters of mutually equivalent answers (the
// transitive closure of pairwise equivalence). Clusters are ordered by their
// smallest member.
std::vector<std::vector<std::size_t>> cluster_answers(const SampleSet& samples,
                                                      const Evaluator& equivalence);

// -sum_c p_c ln p_c over semantic clusters. Requires K >= 1.
double semantic_entropy(const SampleSet& samples, const Evaluator& equivalence,
                        ClusterWeighting weighting = ClusterWeighting::kFrequency);

// 1 - (fraction of samples equivalent to the primary answer).
double radflag(std::string_view primary, const SampleSet& samples, const Evaluator& equivalence);

// Ranks with ties averaged, mapped to [0, 1] as (rank - 1) / (n - 1).
std::vector<double> rank_normalize(std::span<const double> scores);

struct FusionConfig {
  double weight = 0.5;  // w
};

// fused_i = (1 - w) * rank_norm(base)_i + w * flag_i over a whole split.
// A single-record split returns the flag.
std::vector<double> fuse(std::span<const double> base_scores, std::span<const double> vloop_flags,
                         const FusionConfig& cfg = {});

// External per-record scores, one {"record_id": str, "score": real} per line.
std::map<std::string, double> load_external_scores(const std::filesystem::path& path);
std::map<std::string, double> parse_external_scores(std::string_view content);

}  // namespace vloop::baselines
