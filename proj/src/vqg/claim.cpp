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

#include <algorithm>
#include <set>

#include "vloop/text.hpp"
#include "vloop/vqg.hpp"

namespace vloop {
namespace {

using Tokens = std::vector<std::string>;

const std::set<std::string> kBe = {"is", "are", "was", "were"};
const std::set<std::string> kDo = {"does", "do", "did"};
const std::set<std::string> kArticles = {"the", "a", "an", "this", "these", "that"};
const std::set<std::string> kPrepositions = {"in", "on", "at", "of", "within", "near", "from",
                                             "to", "into", "inside", "along", "by"};
const std::set<std::string> kParticiples = {
    "seen",   "shown",   "located",  "present",  "visible", "used",     "taken",
    "found",  "affected", "involved", "noted",   "observed", "depicted", "imaged",
    "given",  "evident", "apparent", "abnormal", "normal",  "enlarged", "identified"};

bool participle_like(const std::string& w) {
  return kParticiples.count(w) || (w.size() > 3 && w.ends_with("ed"));
}

std::string slice(const Tokens& t, std::size_t b, std::size_t e) {
  return join(Tokens(t.begin() + static_cast<std::ptrdiff_t>(b), t.begin() + static_cast<std::ptrdiff_t>(e)), " ");
}

// Index of the first participle-like word in [from, t.size()), or t.size().
std::size_t predicate_start(const Tokens& t, std::size_t from) {
  for (std::size_t i = from; i < t.size(); ++i)
    if (participle_like(t[i])) return i;
  return t.size();
}

// Subject / predicate split for "<subject> <predicate>" without a participle:
// an article plus one noun, or a single word.
std::size_t default_split(const Tokens& t, std::size_t from) {
  if (from < t.size() && kArticles.count(t[from])) return std::min(from + 2, t.size());
  return std::min(from + 1, t.size());
}

std::string with_article(const std::string& predicate, const std::string& answer) {
  const Tokens p = word_tokens(predicate);
  const Tokens a = word_tokens(answer);
  const bool needs = !p.empty() && kPrepositions.count(p.back()) && !a.empty() && !kArticles.count(a.front());
  return needs ? "the " + answer : answer;
}

std::string third_person(const std::string& verb) {
  if (verb.ends_with("s") || verb.ends_with("sh") || verb.ends_with("ch")) return verb + "es";
  return verb + "s";
}

}  // namespace

Claim form_claim(std::string_view question, std::string_view answer) {
  const std::string qn = normalize_text(question);
  const std::string an = normalize_text(answer);
  const Tokens t = word_tokens(qn);
  const Claim fallback{"Q: " + std::string(question) + " A: " + std::string(answer), true};
  if (t.empty() || an.empty()) return fallback;

  const bool yes = an == "yes";
  const bool no = an == "no";

  if (t[0] == "what" || t[0] == "which") {
    std::size_t b = 1;
    while (b < t.size() && !kBe.count(t[b])) ++b;
    if (b >= t.size()) return fallback;
    const std::string& be = t[b];
    const std::string wh_noun = slice(t, 1, b);
    const std::size_t p = predicate_start(t, b + 1);
    const std::string subject = slice(t, b + 1, p);
    const std::string predicate = slice(t, p, t.size());
    if (!subject.empty() && !predicate.empty()) {
      return {subject + " " + be + " " + predicate + " " + with_article(predicate, an), false};
    }
    if (!subject.empty()) return {subject + " " + be + " " + an, false};
    if (!predicate.empty() && !wh_noun.empty()) {
      return {"the " + wh_noun + " " + predicate + " " + be + " " + an, false};
    }
    if (!predicate.empty()) return {an + " " + be + " " + predicate, false};
    return fallback;
  }

  if (kBe.count(t[0])) {
    if (!yes && !no) return fallback;
    const std::string& be = t[0];
    if (t.size() >= 3 && t[1] == "there") {
      const std::string rest = slice(t, 2, t.size());
      return {"there " + be + (no ? " no " : " ") + rest, false};
    }
    std::size_t p = predicate_start(t, 2);
    if (p >= t.size()) p = default_split(t, 1);
    const std::string subject = slice(t, 1, p);
    const std::string predicate = slice(t, p, t.size());
    if (subject.empty() || predicate.empty()) return fallback;
    return {subject + " " + be + (no ? " not " : " ") + predicate, false};
  }

  if (kDo.count(t[0])) {
    if (!yes && !no) return fallback;
    const std::size_t v = default_split(t, 1);
    if (v >= t.size()) return fallback;
    const std::string subject = slice(t, 1, v);
    const std::string rest = slice(t, v + 1, t.size());
    std::string verb = t[v];
    std::string out;
    if (no) {
      out = subject + " " + t[0] + " not " + verb;
    } else {
      if (t[0] == "does") verb = third_person(verb);
      if (t[0] == "did") verb = "did " + verb;
      out = subject + " " + verb;
    }
    if (!rest.empty()) out += " " + rest;
    return {out, false};
  }

  return fallback;
}

}  // namespace vloop
