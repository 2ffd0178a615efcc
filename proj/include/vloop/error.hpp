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

#include <stdexcept>
#include <string>

namespace vloop {

// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed dataset / fixture / table files.
class DatasetError : public Error {
 public:
  using Error::Error;
};

// Tensor or vector dimensions that do not line up.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// Provider failures: unknown image, timeouts, wire-protocol violations.
class ProviderError : public Error {
 public:
  using Error::Error;
};

// A provider was asked for something it cannot do (e.g. attention export).
class CapabilityError : public ProviderError {
 public:
  using ProviderError::ProviderError;
};

// Evaluator / judge / remote LLM returned something unusable.
class EvaluatorError : public Error {
 public:
  EvaluatorError(const std::string& what, std::string raw_payload = {})
      : Error(what), raw_payload_(std::move(raw_payload)) {}

  const std::string& raw_payload() const { return raw_payload_; }

 private:
  std::string raw_payload_;
};

}  // namespace vloop
