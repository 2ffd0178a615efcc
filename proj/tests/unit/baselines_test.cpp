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

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "vloop/baselines.hpp"
#include "vloop/error.hpp"
#include "vloop/metrics.hpp"

namespace vloop::baselines {
namespace {

GenerationResult gen(std::string answer, std::vector<double> probs = {1.0}, std::vector<double> ents = {0.0}) {
  GenerationResult g;
  g.answer_text = std::move(answer);
  g.token_probs = std::move(probs);
  g.token_entropies = std::move(ents);
  return g;
}

SampleSet samples_of(std::initializer_list<const char*> answers) {
  SampleSet s;
  for (const char* a : answers) s.push_back(gen(a));
  return s;
}

TEST(TokenBaselines, Examples) {
  const auto g = gen("x", {0.9, 0.5, 0.7}, {0.1, 0.4, 0.1});
  EXPECT_DOUBLE_EQ(avg_prob(g), -0.7);
  EXPECT_DOUBLE_EQ(max_prob(g), -0.9);
  EXPECT_DOUBLE_EQ(avg_ent(g), 0.2);
  EXPECT_DOUBLE_EQ(max_ent(g), 0.4);
  const auto empty = gen("x", {}, {});
  EXPECT_THROW(avg_prob(empty), std::invalid_argument);
  EXPECT_THROW(max_prob(empty), std::invalid_argument);
  EXPECT_THROW(avg_ent(empty), std::invalid_argument);
  EXPECT_THROW(max_ent(empty), std::invalid_argument);
}

TEST(TokenBaselines, SeededOracle) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> p(1e-6, 1.0), h(0.0, 3.0);
  std::uniform_int_distribution<int> len(1, 40);
  for (int trial = 0; trial < 200; ++trial) {
    GenerationResult g;
    const int n = len(rng);
    for (int i = 0; i < n; ++i) {
      g.token_probs.push_back(p(rng));
      g.token_entropies.push_back(h(rng));
    }
    double sp = 0.0, mp = 0.0, se = 0.0, me = 0.0;
    for (int i = 0; i < n; ++i) {
      sp += g.token_probs[i];
      mp = std::max(mp, g.token_probs[i]);
      se += g.token_entropies[i];
      me = std::max(me, g.token_entropies[i]);
    }
    EXPECT_NEAR(avg_prob(g), -sp / n, 1e-12);
    EXPECT_EQ(max_prob(g), -mp);
    EXPECT_NEAR(avg_ent(g), se / n, 1e-12);
    EXPECT_EQ(max_ent(g), me);
  }
}

TEST(SemanticEntropy, ClustersThroughSynonyms) {
  const DeterministicEvaluator eq(SynonymTable::parse("ct = ct scan\n"));
  const auto s = samples_of({"ct", "CT", "mri", "ct scan"});
  const auto clusters = cluster_answers(s, eq);
  ASSERT_EQ(clusters.size(), 2u);
  EXPECT_EQ(clusters[0], (std::vector<std::size_t>{0, 1, 3}));
  EXPECT_EQ(clusters[1], (std::vector<std::size_t>{2}));
  EXPECT_NEAR(semantic_entropy(s, eq), oracle::cluster_entropy({3, 1}), 1e-15);
}

TEST(SemanticEntropy, BoundsAndExtremes) {
  const DeterministicEvaluator eq;
  EXPECT_EQ(semantic_entropy(samples_of({"a", "a", "the a"}), eq), 0.0);
  EXPECT_NEAR(semantic_entropy(samples_of({"a", "b", "c", "d"}), eq), std::log(4.0), 1e-15);
  EXPECT_EQ(semantic_entropy(samples_of({"solo"}), eq), 0.0);
  EXPECT_THROW(semantic_entropy({}, eq), std::invalid_argument);

  std::mt19937 rng(3);
  const std::vector<std::string> pool = {"ct", "mri", "x-ray", "ultrasound", "pet"};
  std::uniform_int_distribution<std::size_t> pick(0, pool.size() - 1);
  std::uniform_int_distribution<int> k(1, 12);
  for (int trial = 0; trial < 200; ++trial) {
    SampleSet s;
    const int n = k(rng);
    std::map<std::string, int> counts;
    for (int i = 0; i < n; ++i) {
      const auto& a = pool[pick(rng)];
      s.push_back(gen(a));
      ++counts[a];
    }
    std::vector<int> sizes;
    for (const auto& [_, c] : counts) sizes.push_back(c);
    const double h = semantic_entropy(s, eq);
    EXPECT_GE(h, 0.0);
    EXPECT_LE(h, std::log(static_cast<double>(n)) + 1e-12);
    EXPECT_NEAR(h, oracle::cluster_entropy(sizes), 1e-12);
    std::shuffle(s.begin(), s.end(), rng);
    EXPECT_NEAR(semantic_entropy(s, eq), h, 1e-12);
  }
}

TEST(SemanticEntropy, LikelihoodWeighting) {
  const DeterministicEvaluator eq;
  SampleSet s = {gen("a", {0.5}), gen("a", {0.5}), gen("b", {0.5, 2.0})};
  EXPECT_NEAR(semantic_entropy(s, eq, ClusterWeighting::kLikelihood), std::log(2.0), 1e-15);
  EXPECT_NEAR(semantic_entropy(s, eq, ClusterWeighting::kFrequency), oracle::cluster_entropy({2, 1}), 1e-15);
}

TEST(RadFlag, DisagreementFraction) {
  const DeterministicEvaluator eq;
  EXPECT_DOUBLE_EQ(radflag("ct", samples_of({"ct", "mri", "CT", "the ct"}), eq), 0.25);
  EXPECT_DOUBLE_EQ(radflag("ct", samples_of({"ct", "ct"}), eq), 0.0);
  EXPECT_DOUBLE_EQ(radflag("pet", samples_of({"ct", "mri", "x-ray"}), eq), 1.0);
  EXPECT_THROW(radflag("ct", {}, eq), std::invalid_argument);
}

TEST(RankNormalize, Fixture) {
  const std::vector<double> s = {3, 1, 2, 2};
  EXPECT_EQ(rank_normalize(s), (std::vector<double>{1.0, 0.0, 0.5, 0.5}));
  EXPECT_EQ(rank_normalize(std::vector<double>{7.0}), (std::vector<double>{0.0}));
  EXPECT_TRUE(rank_normalize(std::vector<double>{}).empty());
  EXPECT_EQ(rank_normalize(std::vector<double>{4, 4, 4}), (std::vector<double>{0.5, 0.5, 0.5}));
}

TEST(Fuse, Examples) {
  const std::vector<double> base = {3, 1, 2, 2};
  const std::vector<double> flags = {0, 1, 1, 0};
  EXPECT_EQ(fuse(base, flags, {0.5}), (std::vector<double>{0.5, 0.5, 0.75, 0.25}));
  EXPECT_EQ(fuse(base, flags, {1.0}), flags);
  EXPECT_EQ(fuse(base, flags, {0.0}), rank_normalize(base));
  EXPECT_EQ(fuse(std::vector<double>{0.3}, std::vector<double>{1.0}), (std::vector<double>{1.0}));
  EXPECT_THROW(fuse(base, std::vector<double>{1.0}), std::invalid_argument);
  EXPECT_THROW(fuse(base, flags, {1.5}), std::invalid_argument);
  EXPECT_THROW(fuse(base, flags, {-0.1}), std::invalid_argument);
}

TEST(Fuse, ZeroWeightPreservesAuc) {
  std::mt19937_64 rng(21);
  std::normal_distribution<double> noise(0.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> base, labels, flags;
    for (int i = 0; i < 60; ++i) {
      const double y = i % 3 == 0 ? 1.0 : 0.0;
      labels.push_back(y);
      base.push_back(std::round((y + noise(rng)) * 4.0) / 4.0);  // coarse grid gives ties
      flags.push_back(noise(rng) > 0 ? 1.0 : 0.0);
    }
    EXPECT_NEAR(metrics::auc(fuse(base, flags, {0.0}), labels), metrics::auc(base, labels), 1e-12);
  }
}

TEST(ExternalScores, ParseAndReject) {
  const auto scores = parse_external_scores("{\"record_id\": \"r1\", \"score\": 0.5}\n\n{\"record_id\": \"r2\", \"score\": -3}\n");
  EXPECT_EQ(scores, (std::map<std::string, double>{{"r1", 0.5}, {"r2", -3.0}}));
  EXPECT_THROW(parse_external_scores("{\"record_id\": \"r1\", \"score\": 1}\n{\"record_id\": \"r1\", \"score\": 2}\n"),
               DatasetError);
  EXPECT_THROW(parse_external_scores("{\"record_id\": \"r1\"}\n"), DatasetError);
  EXPECT_THROW(parse_external_scores("not json\n"), DatasetError);
  EXPECT_THROW(load_external_scores("/nonexistent/scores.jsonl"), DatasetError);
}

}  // namespace
}  // namespace vloop::baselines
