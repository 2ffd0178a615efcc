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

#include "fake_llm.hpp"
#include "vloop/error.hpp"
#include "vloop/text.hpp"
#include "vloop/vqg.hpp"

namespace vloop {
namespace {

using testing::FakeLlm;

struct ClaimCase {
  const char* question;
  const char* answer;
  const char* claim;
  bool fallback;
};

TEST(FormClaim, FixtureTable) {
  const ClaimCase cases[] = {
      {"What organ is shown in the image?", "Lung", "the organ shown in the image is lung", false},
      {"What is the abnormality in the left lung?", "Pneumothorax",
       "the abnormality in the left lung is pneumothorax", false},
      {"Is there pneumothorax?", "no", "there is no pneumothorax", false},
      {"Is there pneumothorax?", "Yes", "there is pneumothorax", false},
      {"Is the heart enlarged?", "yes", "the heart is enlarged", false},
      {"Is the heart enlarged?", "no", "the heart is not enlarged", false},
      {"Does the liver show a lesion?", "yes", "the liver shows a lesion", false},
      {"Does the liver show a lesion?", "no", "the liver does not show a lesion", false},
      {"Which plane is this image taken in?", "axial", "this image is taken in the axial", false},
      {"Where is the mass?", "left lung", "Q: Where is the mass? A: left lung", true},
      {"Is the heart enlarged?", "maybe", "Q: Is the heart enlarged? A: maybe", true},
      {"", "yes", "Q:  A: yes", true},
  };
  for (const auto& c : cases) {
    const Claim claim = form_claim(c.question, c.answer);
    EXPECT_EQ(claim.text, c.claim) << c.question;
    EXPECT_EQ(claim.fallback, c.fallback) << c.question;
  }
}

TEST(ExtractUnits, AbnormalityAndOrgan) {
  const auto units = extract_units("Which organ is the pneumothorax located in?", "Left lung", Lexicon::builtin());
  ASSERT_TRUE(units.s_q && units.s_r);
  EXPECT_EQ(*units.s_q, (SemanticUnit{"pneumothorax", Category::kAbnormality, Origin::kQuestion}));
  EXPECT_EQ(*units.s_r, (SemanticUnit{"left lung", Category::kOrgan, Origin::kAnswer}));
  EXPECT_TRUE(units.alternatives.empty());
}

TEST(ExtractUnits, PrefersOtherCategoryOutsideWhPhrase) {
  const auto units = extract_units("What part of the lung is the nodule in?", "left upper lung", Lexicon::builtin());
  ASSERT_TRUE(units.s_q && units.s_r);
  EXPECT_EQ(units.s_q->surface, "nodule");
  EXPECT_EQ(units.s_r->surface, "left upper lung");
  ASSERT_EQ(units.alternatives.size(), 1u);
  EXPECT_EQ(units.alternatives[0].surface, "lung");
}

TEST(ExtractUnits, SingleFocusAndEmptyLexicon) {
  const auto modality = extract_units("What imaging modality is used?", "CT", Lexicon::builtin());
  ASSERT_TRUE(modality.s_q);
  EXPECT_EQ(modality.s_q->surface, "ct");
  EXPECT_EQ(modality.s_q->category, Category::kModality);
  EXPECT_FALSE(modality.s_r);

  const Lexicon empty;
  const auto none = extract_units("Which organ is the pneumothorax located in?", "left lung", empty);
  EXPECT_FALSE(none.s_q);
  EXPECT_FALSE(none.s_r);
  const auto plan = plan_verification("Which organ is the pneumothorax located in?", "left lung", none,
                                      TemplateRephraser{});
  EXPECT_EQ(plan.strategy, Strategy::kRephrase);
}

TEST(DistinctConcepts, Cases) {
  const SemanticUnit lung{"lung", Category::kOrgan, Origin::kQuestion};
  const SemanticUnit left_lung{"left lung", Category::kOrgan, Origin::kAnswer};
  const SemanticUnit heart{"heart", Category::kOrgan, Origin::kAnswer};
  const SemanticUnit mass{"mass", Category::kAbnormality, Origin::kQuestion};
  EXPECT_FALSE(distinct_concepts(lung, left_lung));
  EXPECT_FALSE(distinct_concepts(lung, lung));
  EXPECT_FALSE(distinct_concepts(lung, SemanticUnit{"Lung", Category::kAbnormality, Origin::kAnswer}));
  EXPECT_TRUE(distinct_concepts(lung, heart));
  EXPECT_TRUE(distinct_concepts(mass, left_lung));
  EXPECT_TRUE(distinct_concepts(SemanticUnit{"left lung", Category::kOrgan, Origin::kQuestion},
                                SemanticUnit{"lung", Category::kAbnormality, Origin::kAnswer}));
}

TEST(PlanVerification, LogicPlanForPneumothorax) {
  const std::string q = "Which organ is the pneumothorax located in?";
  const auto plan = plan_verification(q, "left lung", extract_units(q, "left lung", Lexicon::builtin()),
                                      TemplateRephraser{});
  EXPECT_EQ(plan.strategy, Strategy::kLogic);
  EXPECT_EQ(plan.verification_question, "what abnormality is located in the left lung?");
  EXPECT_EQ(plan.reference_answer, "pneumothorax");
  EXPECT_FALSE(plan.logic_unavailable);
}

TEST(PlanVerification, RephrasePlanForModality) {
  const std::string q = "What imaging modality is used?";
  const auto plan = plan_verification(q, "CT", extract_units(q, "CT", Lexicon::builtin()), TemplateRephraser{});
  EXPECT_EQ(plan.strategy, Strategy::kRephrase);
  EXPECT_EQ(plan.verification_question, "which imaging modality is used?");
  EXPECT_EQ(plan.reference_answer, "ct");
}

TEST(PlanVerification, ModeOverrides) {
  const std::string q = "Which organ is the pneumothorax located in?";
  const auto units = extract_units(q, "left lung", Lexicon::builtin());
  const auto forced = plan_verification(q, "left lung", units, TemplateRephraser{}, StrategyMode::kRephrase);
  EXPECT_EQ(forced.strategy, Strategy::kRephrase);
  EXPECT_FALSE(forced.logic_unavailable);
  EXPECT_EQ(forced.reference_answer, "left lung");

  const std::string m = "What imaging modality is used?";
  const auto unavailable = plan_verification(m, "ct", extract_units(m, "ct", Lexicon::builtin()),
                                             TemplateRephraser{}, StrategyMode::kLogic);
  EXPECT_EQ(unavailable.strategy, Strategy::kRephrase);
  EXPECT_TRUE(unavailable.logic_unavailable);
}

// Every pair of distinct lexicon terms in different categories yields a logic
// plan whose reference is s_q and whose question mentions s_r.
TEST(PlanVerification, LogicInvariantsOverLexiconPairs) {
  const std::vector<SemanticUnit> terms = {
      {"pneumothorax", Category::kAbnormality, Origin::kQuestion}, {"mass", Category::kAbnormality, Origin::kQuestion},
      {"left lung", Category::kOrgan, Origin::kQuestion},          {"liver", Category::kOrgan, Origin::kQuestion},
      {"enlarged", Category::kAttribute, Origin::kQuestion},       {"mri", Category::kModality, Origin::kQuestion},
      {"axial", Category::kPlane, Origin::kQuestion},              {"stent", Category::kOther, Origin::kQuestion}};
  for (const auto& a : terms) {
    for (const auto& b : terms) {
      UnitPair units;
      units.s_q = a;
      units.s_r = b;
      units.s_r->origin = Origin::kAnswer;
      const auto plan = plan_verification("is there anything?", b.surface, units, TemplateRephraser{});
      if (!distinct_concepts(a, b)) {
        EXPECT_EQ(plan.strategy, Strategy::kRephrase);
        continue;
      }
      EXPECT_EQ(plan.strategy, Strategy::kLogic);
      EXPECT_EQ(plan.reference_answer, a.surface);
      EXPECT_NE(plan.verification_question.find(b.surface), std::string::npos) << plan.verification_question;
      EXPECT_TRUE(plan.verification_question.ends_with("?"));
    }
  }
}

TEST(TemplateRephraser, RewritesAndFallsBack) {
  const TemplateRephraser r;
  EXPECT_EQ(r.rephrase("Is there a pneumothorax?"), "does the image show a pneumothorax?");
  EXPECT_EQ(r.rephrase("What organ is shown?"), "which organ is shown?");
  EXPECT_EQ(r.rephrase("Which organ is shown?"), "what organ is shown?");
  EXPECT_EQ(r.rephrase("What is the abnormality?"), "in this image, what is the abnormality?");
  EXPECT_EQ(r.rephrase("Where is the mass?"), "in which location is the mass?");
  EXPECT_EQ(r.rephrase("How many ribs are fractured?"), "what is the number of ribs are fractured?");
  EXPECT_EQ(r.rephrase("Describe the lesion."), "regarding this image, describe the lesion?");
  for (const char* q : {"Is the heart enlarged?", "Does the liver look normal?", "Is there edema?"}) {
    EXPECT_NE(r.rephrase(q), normalize_text(q) + "?") << q;
  }
}

TEST(RemoteUnitExtractor, ParsesWrappedJsonAtTemperatureZero) {
  FakeLlm llm(R"(Here you go:
```json
{"s_q": {"surface": "Pneumothorax", "category": "abnormality"}, "s_r": {"surface": "left lung", "category": "ORGAN"}}
```)");
  RemoteUnitExtractor ex(llm);
  const auto units = ex.extract("Which organ is the pneumothorax located in?", "left lung");
  ASSERT_TRUE(units.s_q && units.s_r);
  EXPECT_EQ(*units.s_q, (SemanticUnit{"pneumothorax", Category::kAbnormality, Origin::kQuestion}));
  EXPECT_EQ(*units.s_r, (SemanticUnit{"left lung", Category::kOrgan, Origin::kAnswer}));
  ASSERT_EQ(llm.temperatures.size(), 1u);
  EXPECT_EQ(llm.temperatures[0], 0.0);
  EXPECT_NE(llm.prompts[0].back().content.find("pneumothorax located in"), std::string::npos);
}

TEST(RemoteUnitExtractor, NullUnits) {
  FakeLlm llm(R"({"s_q": null, "s_r": null})");
  const auto units = RemoteUnitExtractor(llm).extract("q?", "a");
  EXPECT_FALSE(units.s_q);
  EXPECT_FALSE(units.s_r);
}

TEST(RemoteUnitExtractor, MalformedRepliesCarryRawPayload) {
  for (const std::string reply : {std::string("I cannot help with that"), std::string(R"({"s_q": 1})"),
                                  std::string(R"({"s_q": {"surface": "x", "category": "bone"}, "s_r": null})"),
                                  std::string(R"({"s_q": {"surface": "  ", "category": "organ"}, "s_r": null})")}) {
    FakeLlm llm(reply);
    try {
      RemoteUnitExtractor(llm).extract("q?", "a");
      FAIL() << reply;
    } catch (const EvaluatorError& e) {
      EXPECT_EQ(e.raw_payload(), reply);
    }
  }
}

TEST(RemoteRephraser, NormalizesReply) {
  FakeLlm llm("  Which organ is AFFECTED?  ");
  EXPECT_EQ(RemoteRephraser(llm).rephrase("What organ is affected?"), "which organ is affected?");
  FakeLlm empty("   ");
  EXPECT_THROW(RemoteRephraser(empty).rephrase("q?"), EvaluatorError);
}

TEST(PromptTemplate, BuiltinsRenderAndRejectMissingValues) {
  for (const char* id : {"extract_units", "rephrase_question", "consistency_judge", "green_judge"}) {
    const auto t = PromptTemplate::builtin(id);
    EXPECT_EQ(t.id, id);
    EXPECT_GE(t.version, 1);
    EXPECT_FALSE(t.user.empty());
    EXPECT_THROW(t.render({}), EvaluatorError) << id;
  }
  EXPECT_THROW(PromptTemplate::builtin("nope"), EvaluatorError);
  const auto msgs = PromptTemplate::builtin("consistency_judge").render({{"candidate", "ct"}, {"reference", "mri"}});
  ASSERT_EQ(msgs.size(), 2u);
  EXPECT_EQ(msgs[0].role, "system");
  EXPECT_NE(msgs[1].content.find("Answer A: ct"), std::string::npos);
  EXPECT_NE(msgs[1].content.find("Answer B: mri"), std::string::npos);
}

TEST(PromptTemplate, ParseFormat) {
  const auto t = PromptTemplate::parse("id: demo\nversion: 3\n--- user\nQ={question} {\"k\": 1}\n");
  EXPECT_EQ(t.id, "demo");
  EXPECT_EQ(t.version, 3);
  EXPECT_TRUE(t.system.empty());
  const auto msgs = t.render({{"question", "why"}});
  ASSERT_EQ(msgs.size(), 1u);
  EXPECT_EQ(msgs[0].content, "Q=why {\"k\": 1}");
  EXPECT_THROW(PromptTemplate::parse("id: x\n--- assistant\nhi\n"), EvaluatorError);
  EXPECT_THROW(PromptTemplate::parse("version: 1\n--- user\nhi\n"), EvaluatorError);
}

TEST(Lexicon, ParseAndMatch) {
  const auto lex = Lexicon::parse("# demo\n[Organ]\nlung\nleft lung\n\n[abnormality]\n  nodule  \n");
  EXPECT_EQ(lex.size(), 3u);
  const auto m = lex.match_all("A nodule in the LEFT lung.");
  ASSERT_EQ(m.size(), 2u);
  EXPECT_EQ(m[0].surface, "nodule");
  EXPECT_EQ(m[0].category, Category::kAbnormality);
  EXPECT_EQ(m[1].surface, "left lung");
  EXPECT_EQ(m[1].begin, 4u);
  EXPECT_EQ(m[1].end, 6u);
  EXPECT_THROW(Lexicon::parse("lung\n"), DatasetError);
  EXPECT_THROW(Lexicon::parse("[Bone]\nfemur\n"), DatasetError);
  EXPECT_THROW(Lexicon::load("/nonexistent/lexicon.txt"), DatasetError);
  EXPECT_EQ(category_from_string("MODALITY"), Category::kModality);
  EXPECT_FALSE(category_from_string("bone"));
}

TEST(VerificationPlan, JsonShape) {
  const std::string q = "Which organ is the pneumothorax located in?";
  const auto plan = plan_verification(q, "left lung", extract_units(q, "left lung", Lexicon::builtin()),
                                      TemplateRephraser{});
  const auto j = to_json(plan);
  EXPECT_EQ(j["strategy"], "logic");
  EXPECT_EQ(j["s_q"]["category"], "Abnormality");
  EXPECT_EQ(j["s_r"]["origin"], "answer");
  EXPECT_EQ(j["reference_answer"], "pneumothorax");
}

}  // namespace
}  // namespace vloop
