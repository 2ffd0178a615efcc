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

#include "vloop/metrics.hpp"

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <stdexcept>

namespace vloop::metrics {
namespace {

void check_aligned(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw std::invalid_argument(std::string(what) + ": input lengths differ");
}

void check_split(std::span<const std::string> ids, std::span<const double> scores,
                 std::span<const double> greens) {
  check_aligned(ids.size(), scores.size(), "GREEN curve");
  check_aligned(ids.size(), greens.size(), "GREEN curve");
  if (ids.empty()) throw std::invalid_argument("GREEN curve needs a non-empty split");
}

std::vector<double> prefix_means_source(std::span<const std::string> ids, std::span<const double> scores,
                                        std::span<const double> greens) {
  const auto order = confidence_order(ids, scores);
  std::vector<double> prefix(order.size() + 1, 0.0);
  for (std::size_t i = 0; i < order.size(); ++i) prefix[i + 1] = prefix[i] + greens[order[i]];
  return prefix;
}

std::size_t top_count(std::size_t n, int x_percent) {
  return (n * static_cast<std::size_t>(x_percent) + 99) / 100;
}

}  // namespace

double auc(std::span<const double> scores, std::span<const double> labels) {
  check_aligned(scores.size(), labels.size(), "AUC");
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });

  double pos_rank_sum = 0.0;
  std::size_t n_pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg_rank = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based
    for (std::size_t m = i; m <= j; ++m) {
      if (labels[order[m]] > 0.5) {
        pos_rank_sum += avg_rank;
        ++n_pos;
      }
    }
    i = j + 1;
  }
  const std::size_t n_neg = n - n_pos;
  if (n_pos == 0 || n_neg == 0) {
    throw std::invalid_argument("AUC needs both hallucinated and non-hallucinated records");
  }
  const double np = static_cast<double>(n_pos);
  const double u = pos_rank_sum - np * (np + 1.0) / 2.0;
  return u / (np * static_cast<double>(n_neg));
}

double auc(const std::map<std::string, double>& scores, const std::map<std::string, double>& labels) {
  if (scores.size() != labels.size()) throw std::invalid_argument("AUC: score and label sets differ");
  std::vector<double> s, l;
  for (const auto& [id, score] : scores) {
    auto it = labels.find(id);
    if (it == labels.end()) throw std::invalid_argument("AUC: no label for record " + id);
    s.push_back(score);
    l.push_back(it->second);
  }
  return auc(s, l);
}

std::vector<std::size_t> confidence_order(std::span<const std::string> ids,
                                          std::span<const double> scores) {
  check_aligned(ids.size(), scores.size(), "confidence order");
  std::vector<std::size_t> order(ids.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](auto a, auto b) {
    if (scores[a] != scores[b]) return scores[a] < scores[b];
    return ids[a] < ids[b];
  });
  return order;
}

double mean_green_at(std::span<const std::string> ids, std::span<const double> scores,
                     std::span<const double> greens, int x_percent) {
  check_split(ids, scores, greens);
  if (x_percent < 1 || x_percent > 100) throw std::invalid_argument("X must be in [1, 100]");
  const auto prefix = prefix_means_source(ids, scores, greens);
  const std::size_t k = top_count(ids.size(), x_percent);
  return prefix[k] / static_cast<double>(k);
}

double aug(std::span<const std::string> ids, std::span<const double> scores,
           std::span<const double> greens) {
  check_split(ids, scores, greens);
  const auto prefix = prefix_means_source(ids, scores, greens);
  double sum = 0.0;
  for (int x = 1; x <= 100; ++x) {
    const std::size_t k = top_count(ids.size(), x);
    sum += prefix[k] / static_cast<double>(k);
  }
  return sum / 100.0;
}

std::vector<double> green_curve(std::span<const std::string> ids, std::span<const double> scores,
                                std::span<const double> greens) {
  check_split(ids, scores, greens);
  const auto prefix = prefix_means_source(ids, scores, greens);
  std::vector<double> curve;
  curve.reserve(101);
  for (int x = 0; x <= 100; ++x) {
    const std::size_t k = std::max<std::size_t>(1, top_count(ids.size(), x));
    curve.push_back(prefix[k] / static_cast<double>(k));
  }
  return curve;
}

namespace reference {

double auc_pairwise(std::span<const double> scores, std::span<const double> labels) {
  check_aligned(scores.size(), labels.size(), "AUC");
  std::vector<double> pos, neg;
  for (std::size_t i = 0; i < scores.size(); ++i) (labels[i] > 0.5 ? pos : neg).push_back(scores[i]);
  if (pos.empty() || neg.empty()) {
    throw std::invalid_argument("AUC needs both hallucinated and non-hallucinated records");
  }
  // Counts of half-wins are exact integers; the sum is order-independent.
  std::int64_t twice_wins = 0;
  const auto n_pos = static_cast<std::int64_t>(pos.size());
#pragma omp parallel for reduction(+ : twice_wins) schedule(static)
  for (std::int64_t i = 0; i < n_pos; ++i) {
    for (double s : neg) {
      const double p = pos[static_cast<std::size_t>(i)];
      twice_wins += p > s ? 2 : (p == s ? 1 : 0);
    }
  }
  return static_cast<double>(twice_wins) /
         (2.0 * static_cast<double>(pos.size()) * static_cast<double>(neg.size()));
}

}  // namespace reference
}  // namespace vloop::metrics
