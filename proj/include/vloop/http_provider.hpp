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

#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <thread>

#include "vloop/provider.hpp"
#include "vloop/wire.hpp"

namespace httplib {
class Server;
}

namespace vloop {

struct HttpProviderConfig {
  std::string base_url;  // e.g. http://127.0.0.1:8080
  std::string auth_token;
  double timeout_seconds = 120.0;

  // VLOOP_PROVIDER_URL, VLOOP_PROVIDER_TOKEN, VLOOP_PROVIDER_TIMEOUT.
  static HttpProviderConfig from_env();
};

// Client side of the remote provider protocol (see wire.hpp).
class HttpProvider : public Provider {
 public:
  explicit HttpProvider(HttpProviderConfig cfg);

  std::string id() const override { return "http:" + cfg_.base_url; }
  ProviderCapabilities capabilities() const override;
  GenerationResult generate(const ProviderRequest& req) override;
  vac::VisualAttentionVector export_visual_attention(const ProviderRequest& req,
                                                    std::string_view answer) override;

 private:
  nlohmann::json post(const std::string& path, const nlohmann::json& body) const;

  HttpProviderConfig cfg_;
  mutable std::optional<ProviderCapabilities> caps_;
  std::map<std::string, std::size_t> visual_len_;  // learned per image_ref
  // Attention of the last generate() with want_attention, keyed by the
  // serialized request + answer.
  std::string last_key_;
  std::optional<vac::VisualAttentionVector> last_attention_;
};

// Serves any Provider over the wire protocol. Calls into the provider are
// serialized. Traces larger than `raw_trace_limit` weights are sent
// aggregated.
class ProviderServer {
 public:
  ProviderServer(std::unique_ptr<Provider> provider, std::string auth_token = {},
                 std::size_t raw_trace_limit = 1 << 20);
  ~ProviderServer();

  ProviderServer(const ProviderServer&) = delete;
  ProviderServer& operator=(const ProviderServer&) = delete;

  // Binds and starts serving on a background thread; returns the port.
  int start(const std::string& host = "127.0.0.1", int port = 0);
  // Blocks serving on the calling thread.
  void listen(const std::string& host, int port);
  void stop();

 private:
  void install_routes();

  std::unique_ptr<Provider> provider_;
  std::string auth_token_;
  std::size_t raw_trace_limit_;
  std::mutex mu_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
};

}  // namespace vloop
