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

#include <filesystem>
#include <map>
#include <string>

#include <nlohmann/json.hpp>

namespace vloop {

// Everything needed to replay a run. Outcome files never embed the
// timestamp, so replays compare byte-for-byte.
struct RunManifest {
  nlohmann::json config;            // full configuration snapshot
  std::string dataset_path;
  std::string dataset_fingerprint;  // SHA-256 of the dataset file bytes
  std::string timestamp;            // ISO-8601 UTC, informational only
  std::map<std::string, std::string> cache_keys;  // "record_id/stage" -> key

  nlohmann::json to_json() const;
  static RunManifest from_json(const nlohmann::json& j);

  void save(const std::filesystem::path& path) const;
  static RunManifest load(const std::filesystem::path& path);
};

std::string fingerprint_file(const std::filesystem::path& path);
std::string utc_timestamp();

}  // namespace vloop
