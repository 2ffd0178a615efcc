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

#include "vloop/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "vloop/error.hpp"

namespace vloop::baselines {
namespace {

std::span<const double> non_empty(const std::vector<double>& v, const char* what) {
  if (v.empty()) throw std::invalid_argument(std::string(what) + " needs at least one generated token");
  return v;
}

void require_samples(const SampleSet& samples) {
  if (samples.empty()) throw std::invalid_argument("sample set must hold K >= 1 generations");
}

bool equivalent(const Evaluator& e, const std::string& a, const std::string& b) {
  if (a == b) return true;
  return e.similarity(a, b) >= e.threshold();
}

}  // namespace

double avg_prob(const GenerationResult& gen) {
  auto p = non_empty(gen.token_probs, "avg_prob");
  return -std::accumulate(p.begin(), p.end(), 0.0) / static_cast<double>(p.size());
}

double max_prob(const GenerationResult& gen) {
  auto p = non_empty(gen.token_probs, "max_prob");
  return -*std::max_element(p.begin(), p.end());
}

double avg_ent(const GenerationResult& gen) {
  auto h = non_empty(gen.token_entropies, "avg_ent");
  return std::accumulate(h.begin(), h.end(), 0.0) / static_cast<double>(h.size());
}

double max_ent(const GenerationResult& gen) {
  auto h = non_empty(gen.token_entropies, "max_ent");
  return *std::max_element(h.begin(), h.end());
}

std::vector<std::vector<std::size_t>> cluster_answers(const SampleSet& samples,
                                                      const Evaluator& equivalence) {
  const std::size_t k = samples.size();
  std::vector<std::size_t> parent(k);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < k; ++i) {
    for (std::size_t j = i + 1; j < k; ++j) {
      const std::size_t ri = find(i), rj = find(j);
      if (ri == rj) continue;
      if (equivalent(equivalence, samples[i].answer_text, samples[j].answer_text)) {
        parent[std::max(ri, rj)] = std::min(ri, rj);
      }
    }
  }
  std::vector<std::vector<std::size_t>> clusters;
  std::vector<std::size_t> slot(k, k);
  for (std::size_t i = 0; i < k; ++i) {
    const std::size_t r = find(i);
    if (slot[r] == k) {
      slot[r] = clusters.size();
      clusters.emplace_back();
    }
    clusters[slot[r]].push_back(i);
  }
  return clusters;
}

double semantic_entropy(const SampleSet& samples, const Evaluator& equivalence,
                        ClusterWeighting weighting) {
  require_samples(samples);
  const auto clusters = cluster_answers(samples, equivalence);
  std::vector<double> mass;
  for (const auto& c : clusters) {
    double m = 0.0;
    for (std::size_t i : c) {
      if (weighting == ClusterWeighting::kFrequency) {
        m += 1.0;
      } else {
        double log_lik = 0.0;
        for (double p : samples[i].token_probs) log_lik += std::log(p);
        m += std::exp(log_lik);
      }
    }
    mass.push_back(m);
  }
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) {
    throw std::invalid_argument("semantic entropy: samples carry zero likelihood mass");
  }
  double h = 0.0;
  for (double m : mass) {
    const double p = m / total;
    if (p > 0.0) h -= p * std::log(p);
  }
  return std::max(h, 0.0);
}

double radflag(std::string_view primary, const SampleSet& samples, const Evaluator& equivalence) {
  require_samples(samples);
  const std::string p(primary);
  std::size_t agree = 0;
  for (const auto& s : samples)
    if (equivalent(equivalence, s.answer_text, p)) ++agree;
  return 1.0 - static_cast<double>(agree) / static_cast<double>(samples.size());
}

std::vector<double> rank_normalize(std::span<const double> scores) {
  const std::size_t n = scores.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return scores[a] < scores[b]; });
  std::vector<double> out(n, 0.0);
  if (n < 2) return out;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    while (j + 1 < n && scores[order[j + 1]] == scores[order[i]]) ++j;
    // Positions i..j (0-based) share the average 0-based rank.
    const double avg = 0.5 * static_cast<double>(i + j);
    for (std::size_t m = i; m <= j; ++m) out[order[m]] = avg / static_cast<double>(n - 1);
    i = j + 1;
  }
  return out;
}

std::vector<double> fuse(std::span<const double> base_scores, std::span<const double> vloop_flags,
                         const FusionConfig& cfg) {
  if (base_scores.size() != vloop_flags.size()) {
    throw std::invalid_argument("fusion needs one V-Loop flag per base score");
  }
  if (!(cfg.weight >= 0.0 && cfg.weight <= 1.0)) {
    throw std::invalid_argument("fusion weight must be in [0, 1]");
  }
  if (base_scores.size() == 1) return {vloop_flags[0]};
  const auto ranks = rank_normalize(base_scores);
  std::vector<double> out(ranks.size());
  for (std::size_t i = 0; i < ranks.size(); ++i) {
    out[i] = (1.0 - cfg.weight) * ranks[i] + cfg.weight * vloop_flags[i];
  }
  return out;
}

std::map<std::string, double> parse_external_scores(std::string_view content) {
  std::map<std::string, double> out;
  std::istringstream in{std::string(content)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      const std::string id = j.at("record_id").get<std::string>();
      const double score = j.at("score").get<double>();
      if (!std::isfinite(score)) throw DatasetError("non-finite score");
      if (!out.emplace(id, score).second) {
        throw DatasetError("duplicate record_id " + id + " at line " + std::to_string(lineno));
      }
    } catch (const nlohmann::json::exception& e) {
      throw DatasetError("bad external score at line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

std::map<std::string, double> load_external_scores(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DatasetError("cannot open external scores " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_external_scores(buf.str());
}

}  // namespace vloop::baselines
