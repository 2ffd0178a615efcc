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

#include <map>
#include <span>
#include <string>
#include <vector>

// Detection metrics over a split. Inputs are index-aligned: record i has
// id ids[i], detection score scores[i], label labels[i] (1 = hallucinated)
// and GREEN score greens[i].
namespace vloop::metrics {

// Mann-Whitney AUC: P(score_pos > score_neg) + 0.5 P(tie), via average ranks.
// Throws std::invalid_argument when either class is empty.
double auc(std::span<const double> scores, std::span<const double> labels);

// Keyed variant; both maps must hold the same record ids.
double auc(const std::map<std::string, double>& scores, const std::map<std::string, double>& labels);

// Record order from most to least confident: ascending detection score, ties
// broken by record id.
std::vector<std::size_t> confidence_order(std::span<const std::string> ids,
                                          std::span<const double> scores);

// Mean GREEN of the ceil(N * x / 100) most confident records, x in [1, 100].
double mean_green_at(std::span<const std::string> ids, std::span<const double> scores,
                     std::span<const double> greens, int x_percent);

// (1/100) * sum_{x=1..100} mean_green_at(x).
double aug(std::span<const std::string> ids, std::span<const double> scores,
           std::span<const double> greens);

// mean_green_at for x = 0..100; x = 0 uses the single most confident record.
std::vector<double> green_curve(std::span<const std::string> ids, std::span<const double> scores,
                                std::span<const double> greens);

namespace reference {

// O(n^2) pairwise AUC, parallelized over positives when OpenMP is enabled.
double auc_pairwise(std::span<const double> scores, std::span<const double> labels);

}  // namespace reference
}  // namespace vloop::metrics
