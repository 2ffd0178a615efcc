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

#include "vloop/text.hpp"

#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include <cctype>
#include <stdexcept>

namespace vloop {
namespace {

const icu::Normalizer2& nfkc_casefold() {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFKCCasefoldInstance(status);
  if (U_FAILURE(status) || n == nullptr) {
    throw std::runtime_error("ICU NFKC_Casefold normalizer unavailable");
  }
  return *n;
}

bool is_space(UChar32 c) { return u_isUWhiteSpace(c) || c == 0x200B; }

bool is_terminal_punct(UChar32 c) {
  return u_hasBinaryProperty(c, UCHAR_TERMINAL_PUNCTUATION) != 0;
}

icu::UnicodeString single_pass(const icu::UnicodeString& in) {
  UErrorCode status = U_ZERO_ERROR;
  icu::UnicodeString folded = nfkc_casefold().normalize(in, status);
  if (U_FAILURE(status)) throw std::runtime_error("ICU normalization failed");

  icu::UnicodeString out;
  bool pending_space = false;
  for (int32_t i = 0; i < folded.length();) {
    UChar32 c = folded.char32At(i);
    i += U16_LENGTH(c);
    if (is_space(c)) {
      pending_space = !out.isEmpty();
      continue;
    }
    if (pending_space) out.append(static_cast<UChar>(0x20));
    pending_space = false;
    out.append(c);
  }

  // Strip terminal punctuation and any whitespace it exposes.
  while (!out.isEmpty()) {
    int32_t last = out.moveIndex32(out.length(), -1);
    UChar32 c = out.char32At(last);
    if (!is_terminal_punct(c) && !is_space(c)) break;
    out.truncate(last);
  }
  return out;
}

}  // namespace

std::string normalize_text(std::string_view s) {
  icu::UnicodeString cur = icu::UnicodeString::fromUTF8(
      icu::StringPiece(s.data(), static_cast<int32_t>(s.size())));
  for (int iter = 0; iter < 8; ++iter) {
    icu::UnicodeString next = single_pass(cur);
    if (next == cur) break;
    cur = std::move(next);
  }
  std::string out;
  cur.toUTF8String(out);
  return out;
}

std::vector<std::string> word_tokens(std::string_view normalized) {
  std::vector<std::string> tokens;
  std::string cur;
  auto flush = [&] {
    if (!cur.empty()) tokens.push_back(std::move(cur));
    cur.clear();
  };
  for (std::size_t i = 0; i < normalized.size(); ++i) {
    unsigned char c = static_cast<unsigned char>(normalized[i]);
    if (c >= 0x80) {
      cur.push_back(static_cast<char>(c));  // non-ASCII bytes stay inside words
    } else if (std::isalnum(c)) {
      cur.push_back(static_cast<char>(c));
    } else if ((c == '-' || c == '\'') && !cur.empty() && i + 1 < normalized.size() &&
               std::isalnum(static_cast<unsigned char>(normalized[i + 1]))) {
      cur.push_back(static_cast<char>(c));
    } else {
      flush();
    }
  }
  flush();
  return tokens;
}

std::string join(const std::vector<std::string>& parts, std::string_view sep) {
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out.append(sep);
    out.append(parts[i]);
  }
  return out;
}

}  // namespace vloop
