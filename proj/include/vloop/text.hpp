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

#include <string>
#include <string_view>
#include <vector>

namespace vloop {

// Canonical text form used for every comparison in the library.
//
// Steps: NFKC case-folding (which lowercases and unifies compatibility
// forms), Unicode whitespace runs collapsed to a single ASCII space, leading
// and trailing whitespace trimmed, trailing terminal punctuation removed. The
// steps are iterated to a fixpoint, so the function is idempotent.
// Invalid UTF-8 sequences are replaced with U+FFFD.
std::string normalize_text(std::string_view s);

// Splits normalized text into word tokens. Punctuation other than intra-word
// hyphens and apostrophes separates tokens and is dropped.
std::vector<std::string> word_tokens(std::string_view normalized);

std::string join(const std::vector<std::string>& parts, std::string_view sep);

}  // namespace vloop
