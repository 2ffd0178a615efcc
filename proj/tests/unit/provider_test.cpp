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

#include <cstdlib>

#include "vloop/error.hpp"
#include "vloop/http_provider.hpp"
#include "vloop/scripted_provider.hpp"
#include "vloop/toy_model.hpp"
#include "vloop/wire.hpp"

#include "httplib.h"

namespace vloop {
namespace {

std::shared_ptr<const ToyModelParams> toy_params(std::uint64_t seed = 20240607) {
  ToyModelConfig cfg;
  cfg.seed = seed;
  return ToyModelParams::build(cfg);
}

ProviderRequest request(const std::string& image, const std::string& question, double temperature = 0.0) {
  ProviderRequest r;
  r.image_ref = image;
  r.question = question;
  r.temperature = temperature;
  r.max_tokens = 5;
  return r;
}

TEST(ToyProvider, DeterministicAtZeroTemperature) {
  ToyProvider a(toy_params()), b(toy_params());
  auto req = request("scan-1", "is there a nodule?");
  req.want_attention = true;
  const auto g1 = a.generate(req);
  const auto g2 = a.generate(req);
  const auto g3 = b.generate(req);
  EXPECT_EQ(g1, g2);
  EXPECT_EQ(g1, g3);
  EXPECT_FALSE(g1.answer_text.empty());
  ASSERT_TRUE(g1.attention.has_value());
  EXPECT_EQ(g1.attention->visual_len(), 9u);
  EXPECT_EQ(g1.token_probs.size(), g1.token_entropies.size());
}

TEST(ToyProvider, SameSeedSameParameters) {
  const auto p1 = toy_params(3), p2 = toy_params(3), p3 = toy_params(4);
  EXPECT_EQ(p1->embedding, p2->embedding);
  EXPECT_NE(p1->embedding, p3->embedding);
}

TEST(ToyProvider, SamplingIsSeededByRequest) {
  ToyProvider p(toy_params());
  auto req = request("scan-2", "what organ is shown?", 1.0);
  req.sample_index = 0;
  const auto s0 = p.generate(req);
  EXPECT_EQ(p.generate(req), s0);
  bool any_differs = false;
  for (int k = 1; k < 8 && !any_differs; ++k) {
    req.sample_index = k;
    any_differs = p.generate(req).answer_text != s0.answer_text;
  }
  EXPECT_TRUE(any_differs);
}

TEST(ToyProvider, ZeroAlphaBiasIsIdentityOnDistributions) {
  ToyProvider p(toy_params());
  for (const std::string q : {"is there a nodule?", "where is the mass?", "which plane?"}) {
    const auto req = request("scan-3", q);
    const auto plain = p.generate(req);
    const auto plain_dists = p.last_step_distributions();
    auto biased = req;
    biased.visual_bias = VisualBias{p.export_visual_attention(req, plain.answer_text), 0.0};
    const auto with_bias = p.generate(biased);
    ASSERT_EQ(plain_dists.size(), p.last_step_distributions().size());
    EXPECT_EQ(plain.answer_text, with_bias.answer_text);
    for (std::size_t s = 0; s < plain_dists.size(); ++s) {
      EXPECT_LT((plain_dists[s] - p.last_step_distributions()[s]).cwiseAbs().maxCoeff(), 1e-12);
    }
  }
}

TEST(ToyProvider, NonZeroBiasChangesDistributions) {
  ToyProvider p(toy_params());
  const auto req = request("scan-3", "is there a nodule?");
  const auto plain = p.generate(req);
  const auto plain_dists = p.last_step_distributions();
  auto biased = req;
  biased.visual_bias = VisualBias{{std::vector<double>(9, 0.0)}, 1.3};
  biased.visual_bias->vector.values[4] = 1.0;
  p.generate(biased);
  EXPECT_GT((plain_dists[0] - p.last_step_distributions()[0]).cwiseAbs().maxCoeff(), 1e-9);
}

TEST(ToyModel, AttentionRowsAreCausalDistributions) {
  ToyModel model(toy_params());
  const auto seq = model.sequence("scan-4", "what imaging modality is used?", model.text_tokens("ct"));
  for (const auto& bias : {std::optional<VisualBias>{}, std::optional<VisualBias>(VisualBias{{std::vector<double>(9, 0.2)}, 0.7})}) {
    const auto fwd = model.forward(seq, bias, true);
    ASSERT_EQ(fwd.attention.size(), 2u);
    for (const auto& layer : fwd.attention) {
      ASSERT_EQ(layer.size(), 2u);
      for (const auto& map : layer) {
        for (Eigen::Index i = 0; i < map.rows(); ++i) {
          EXPECT_NEAR(map.row(i).sum(), 1.0, 1e-9);
          for (Eigen::Index j = i + 1; j < map.cols(); ++j) EXPECT_EQ(map(i, j), 0.0);
        }
      }
    }
  }
}

TEST(ToyModel, TextRowsCoverQuestionAndAnswerOnly) {
  ToyModel model(toy_params());
  const auto answer = model.text_tokens("left lung");
  const auto seq = model.sequence("scan-5", "where is it?", answer);
  const std::size_t nq = model.text_tokens("where is it?").size();
  EXPECT_EQ(seq.layout.visual_begin, 1u);
  EXPECT_EQ(seq.layout.visual_end, 10u);
  EXPECT_EQ(seq.layout.text_rows.size(), nq + answer.size());
  EXPECT_EQ(seq.layout.text_rows.front(), 10u);
  EXPECT_EQ(seq.answer_begin, 10u + nq + 1);  // <sep> sits between question and answer
}

TEST(ToyProvider, ExportMatchesAggregateOfTeacherForcedTrace) {
  ToyProvider p(toy_params());
  const auto req = request("scan-6", "is there a mass?");
  const auto g = p.generate(req);
  const auto trace = p.teacher_forced_trace(req, g.answer_text);
  const auto exported = p.export_visual_attention(req, g.answer_text);
  EXPECT_EQ(exported, vac::aggregate(trace));
  EXPECT_EQ(exported.size(), 9u);
  for (double v : exported.values) EXPECT_GE(v, 0.0);
  auto with_attention = req;
  with_attention.want_attention = true;
  EXPECT_EQ(*p.generate(with_attention).attention, trace);
}

TEST(ToyProvider, RejectsBadRequests) {
  ToyProvider p(toy_params(), {"known"});
  EXPECT_THROW(p.generate(request("unknown", "q?")), ProviderError);
  EXPECT_THROW(p.generate(request("", "q?")), ProviderError);
  auto bad_bias = request("known", "q?");
  bad_bias.visual_bias = VisualBias{{{0.1, 0.2}}, 0.7};
  EXPECT_THROW(p.generate(bad_bias), ProviderError);
  EXPECT_THROW(p.generate(request("known", "q?", -1.0)), ProviderError);
  EXPECT_NO_THROW(p.generate(request("known", "q?")));
}

std::vector<ScriptEntry> sample_script() {
  ScriptEntry exact;
  exact.image_ref = "img1";
  exact.question = "What imaging modality is used?";
  exact.answer = {"CT", {0.9}, {0.2}};
  exact.samples = {{"ct", {0.8}, {0.3}}, {"mri", {0.4}, {0.9}}};
  exact.attention = AttentionTrace(1, 1, 1, 2, {0.2, 0.8});
  ScriptEntry wildcard;
  wildcard.image_ref = "img1";
  wildcard.answer = {"no", {}, {}};
  return {exact, wildcard};
}

TEST(ScriptedProvider, ReturnsCannedAnswerAndTrace) {
  ScriptedProvider p(sample_script());
  auto req = request("img1", "what imaging modality is used");
  req.want_attention = true;
  const auto g = p.generate(req);
  EXPECT_EQ(g.answer_text, "CT");
  EXPECT_EQ(g.token_probs, std::vector<double>{0.9});
  EXPECT_EQ(g.token_entropies, std::vector<double>{0.2});
  ASSERT_TRUE(g.attention);
  EXPECT_EQ(vac::aggregate(*g.attention).values, (std::vector<double>{0.2, 0.8}));
  EXPECT_EQ(p.visual_len_for("img1"), 2u);
}

TEST(ScriptedProvider, WildcardAndSamples) {
  ScriptedProvider p(sample_script());
  const auto other = p.generate(request("img1", "is there a mass?"));
  EXPECT_EQ(other.answer_text, "no");
  EXPECT_EQ(other.token_probs, std::vector<double>{1.0});
  auto req = request("img1", "What imaging modality is used?", 1.0);
  req.sample_index = 1;
  EXPECT_EQ(p.generate(req).answer_text, "mri");
  req.sample_index = 2;
  EXPECT_EQ(p.generate(req).answer_text, "ct");
  EXPECT_EQ(p.requests().size(), 3u);
}

TEST(ScriptedProvider, UnknownImageAndMissingAnswer) {
  ScriptEntry only;
  only.image_ref = "img2";
  only.question = "q?";
  only.answer = {"a", {}, {}};
  ScriptedProvider p({only});
  EXPECT_THROW(p.generate(request("nope", "q?")), ProviderError);
  try {
    p.generate(request("img2", "other?"));
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_NE(std::string(e.what()).find("no scripted answer"), std::string::npos);
  }
}

TEST(ScriptedProvider, SyntheticAttentionDependsOnImageOnly) {
  ScriptedProvider p({}, 4);
  ScriptEntry e;
  e.image_ref = "img3";
  e.answer = {"yes", {}, {}};
  ScriptedProvider q({e}, 4);
  const auto a = q.export_visual_attention(request("img3", "is there a mass?"), "yes");
  const auto b = q.export_visual_attention(request("img3", "anything else at all?"), "no");
  EXPECT_EQ(a, b);
  EXPECT_EQ(a.size(), 4u);
  double sum = 0.0;
  for (double v : a.values) sum += v;
  EXPECT_NEAR(sum, 0.5, 1e-12);
}

TEST(ScriptedProvider, ScriptRoundTrips) {
  const auto entries = sample_script();
  const auto back = parse_script(serialize_script(entries));
  ASSERT_EQ(back.size(), entries.size());
  for (std::size_t i = 0; i < entries.size(); ++i) EXPECT_EQ(to_json(back[i]), to_json(entries[i]));
  EXPECT_THROW(parse_script("{\"answer\": \"x\"}"), DatasetError);
  EXPECT_THROW(parse_script("not json"), DatasetError);
}

TEST(Wire, RequestRoundTripIsIdentity) {
  std::vector<ProviderRequest> fixtures;
  fixtures.push_back(request("a", "is there a mass?"));
  auto b = request("b/ü", "what \"organ\"?", 0.1);
  b.want_attention = true;
  b.max_tokens = 32;
  fixtures.push_back(b);
  auto c = request("c", "q", 1.0);
  c.visual_bias = VisualBias{{{0.1, 0.30000000000000004, 1e-300}}, 0.7};
  c.sample_index = 3;
  fixtures.push_back(c);
  for (const auto& f : fixtures) {
    const auto text = wire::to_json(f).dump();
    EXPECT_EQ(wire::request_from_json(nlohmann::json::parse(text)), f);
  }
}

TEST(Wire, MalformedRequestIsAProtocolViolation) {
  for (const char* body : {R"({"question": "q"})", R"({"image_ref": 1, "question": "q"})",
                           R"({"image_ref": "a", "question": "q", "visual_bias": {"vector": [0.1]}})",
                           R"([1, 2])"}) {
    try {
      wire::request_from_json(nlohmann::json::parse(body));
      FAIL() << body;
    } catch (const ProviderError& e) {
      EXPECT_NE(std::string(e.what()).find("protocol violation"), std::string::npos);
    }
  }
}

TEST(Wire, ResponseRoundTrip) {
  wire::Response r;
  r.generation.answer_text = "ct";
  r.generation.token_probs = {0.7};
  r.generation.token_entropies = {0.4};
  r.generation.temperature_used = 0.1;
  r.generation.attention = AttentionTrace(1, 2, 1, 2, {0.1, 0.2, 0.3, 0.4});
  r.visual_len = 2;
  EXPECT_EQ(wire::response_from_json(nlohmann::json::parse(wire::to_json(r).dump()), 0.1), r);
  wire::Response agg;
  agg.generation = r.generation;
  agg.generation.attention.reset();
  agg.aggregated = vac::VisualAttentionVector{{0.25, 0.5}};
  agg.visual_len = 2;
  EXPECT_EQ(wire::response_from_json(wire::to_json(agg), 0.1), agg);
  EXPECT_THROW(wire::response_from_json(nlohmann::json{{"answer", "x"}}, 0.0), ProviderError);
  EXPECT_THROW(wire::response_from_json(nlohmann::json{{"answer", "x"}, {"token_probs", {2.0}}, {"token_entropies", {0.0}}}, 0.0),
               ProviderError);
}

TEST(Wire, CapabilitiesRoundTrip) {
  const ProviderCapabilities caps{true, false};
  EXPECT_EQ(wire::capabilities_from_json(wire::to_json(caps)), caps);
  EXPECT_EQ(wire::to_json(caps), (nlohmann::json{{"attention_export", true}, {"bias_injection", false}}));
}

// Provider without attention support, for capability errors.
class BlindProvider : public Provider {
 public:
  std::string id() const override { return "blind"; }
  ProviderCapabilities capabilities() const override { return {false, false}; }
  GenerationResult generate(const ProviderRequest&) override {
    GenerationResult g;
    g.answer_text = "yes";
    g.token_probs = {1.0};
    g.token_entropies = {0.0};
    return g;
  }
  vac::VisualAttentionVector export_visual_attention(const ProviderRequest&, std::string_view) override {
    throw CapabilityError("no attention");
  }
};

class HttpRoundTrip : public ::testing::Test {
 protected:
  void SetUp() override {
    server_ = std::make_unique<ProviderServer>(std::make_unique<ToyProvider>(toy_params()), "s3cret");
    port_ = server_->start();
    cfg_.base_url = "http://127.0.0.1:" + std::to_string(port_);
    cfg_.auth_token = "s3cret";
    cfg_.timeout_seconds = 10;
  }
  void TearDown() override { server_->stop(); }

  std::unique_ptr<ProviderServer> server_;
  int port_ = 0;
  HttpProviderConfig cfg_;
};

TEST_F(HttpRoundTrip, MatchesLocalProvider) {
  HttpProvider remote(cfg_);
  ToyProvider local(toy_params());
  EXPECT_EQ(remote.capabilities(), (ProviderCapabilities{true, true}));
  auto req = request("scan-7", "is there a nodule?");
  req.want_attention = true;
  const auto r = remote.generate(req);
  const auto l = local.generate(req);
  EXPECT_EQ(r.answer_text, l.answer_text);
  EXPECT_EQ(r.token_probs, l.token_probs);
  EXPECT_EQ(r.token_entropies, l.token_entropies);
  ASSERT_TRUE(r.attention);
  EXPECT_EQ(*r.attention, *l.attention);
  EXPECT_EQ(remote.export_visual_attention(req, r.answer_text), local.export_visual_attention(req, l.answer_text));

  auto biased = req;
  biased.want_attention = false;
  biased.visual_bias = VisualBias{local.export_visual_attention(req, l.answer_text), 0.7};
  EXPECT_EQ(remote.generate(biased).answer_text, local.generate(biased).answer_text);
}

TEST_F(HttpRoundTrip, ExportWithoutPriorGenerateUsesTeacherForcing) {
  HttpProvider remote(cfg_);
  ToyProvider local(toy_params());
  const auto req = request("scan-8", "what organ?");
  EXPECT_EQ(remote.export_visual_attention(req, "left lung"), local.export_visual_attention(req, "left lung"));
}

TEST_F(HttpRoundTrip, RejectsWrongTokenAndSurfacesErrors) {
  auto bad = cfg_;
  bad.auth_token = "wrong";
  HttpProvider unauthorized(bad);
  EXPECT_THROW(unauthorized.generate(request("scan-9", "q?")), ProviderError);

  HttpProvider remote(cfg_);
  auto req = request("", "q?");
  try {
    remote.generate(req);
    FAIL();
  } catch (const ProviderError& e) {
    EXPECT_NE(std::string(e.what()).find("422"), std::string::npos) << e.what();
  }

  httplib::Client raw("127.0.0.1", port_);
  raw.set_bearer_token_auth("s3cret");
  const auto res = raw.Post("/generate", "{not json", "application/json");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 400);
  const auto health = raw.Get("/health");
  ASSERT_TRUE(health);
  EXPECT_EQ(health->status, 200);
}

TEST(HttpProvider, CapabilityErrorsFromLimitedServer) {
  ProviderServer server(std::make_unique<BlindProvider>());
  const int port = server.start();
  HttpProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:" + std::to_string(port);
  HttpProvider remote(cfg);
  auto req = request("x", "q?");
  EXPECT_NO_THROW(remote.generate(req));
  req.want_attention = true;
  EXPECT_THROW(remote.generate(req), CapabilityError);
  EXPECT_THROW(remote.export_visual_attention(request("x", "q?"), "yes"), CapabilityError);
  auto biased = request("x", "q?");
  biased.visual_bias = VisualBias{{{0.5}}, 0.7};
  EXPECT_THROW(remote.generate(biased), CapabilityError);
  server.stop();
}

TEST(HttpProvider, UnreachableEndpointIsAProviderError) {
  HttpProviderConfig cfg;
  cfg.base_url = "http://127.0.0.1:1";
  cfg.timeout_seconds = 2;
  HttpProvider remote(cfg);
  EXPECT_THROW(remote.generate(request("x", "q?")), ProviderError);
  EXPECT_THROW(HttpProvider(HttpProviderConfig{}).generate(request("x", "q?")), ProviderError);
}

TEST(HttpProviderConfig, ReadsEnvironment) {
  ::setenv("VLOOP_PROVIDER_URL", "http://example.invalid:9", 1);
  ::setenv("VLOOP_PROVIDER_TOKEN", "tok", 1);
  ::setenv("VLOOP_PROVIDER_TIMEOUT", "7.5", 1);
  const auto cfg = HttpProviderConfig::from_env();
  EXPECT_EQ(cfg.base_url, "http://example.invalid:9");
  EXPECT_EQ(cfg.auth_token, "tok");
  EXPECT_EQ(cfg.timeout_seconds, 7.5);
  ::unsetenv("VLOOP_PROVIDER_URL");
  ::unsetenv("VLOOP_PROVIDER_TOKEN");
  ::unsetenv("VLOOP_PROVIDER_TIMEOUT");
}

}  // namespace
}  // namespace vloop
