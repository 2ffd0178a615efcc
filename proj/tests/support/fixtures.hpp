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

#include <cstdint>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "vloop/runner.hpp"
#include "vloop/scripted_provider.hpp"
#include "vloop/types.hpp"

namespace vloop::testing {

// Scripted split with planted hallucinations. Every image has an exact
// script entry for the primary question and a wildcard entry that answers
// any other question truthfully, so verification contradicts the reference
// answer exactly on hallucinated records.
struct PlantedSplit {
  std::vector<VqaRecord> records;
  std::vector<ScriptEntry> script;
  std::set<std::string> hallucinated;  // record ids
};

PlantedSplit make_planted_split(std::size_t n = 200, std::size_t n_hallucinated = 100,
                                std::uint64_t seed = 7);

// Writes dataset.jsonl and script.jsonl into `dir`; returns a RunSpec using
// them with the scripted provider and deterministic components.
RunSpec write_planted_split(const PlantedSplit& split, const std::filesystem::path& dir);

// Fresh empty directory under the system temp dir.
std::filesystem::path temp_dir(const std::string& name);

std::string slurp(const std::filesystem::path& path);

}  // namespace vloop::testing
