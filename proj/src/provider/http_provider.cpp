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

#include "vloop/http_provider.hpp"

#include <cstdlib>

#include "httplib.h"
#include "vloop/error.hpp"

namespace vloop {
namespace {

using nlohmann::json;

std::string env_or(const char* name, std::string fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : std::move(fallback);
}

void set_timeouts(httplib::Client& cli, double seconds) {
  const auto sec = static_cast<time_t>(seconds);
  const auto usec = static_cast<time_t>((seconds - static_cast<double>(sec)) * 1e6);
  cli.set_connection_timeout(sec, usec);
  cli.set_read_timeout(sec, usec);
  cli.set_write_timeout(sec, usec);
}

}  // namespace

HttpProviderConfig HttpProviderConfig::from_env() {
  HttpProviderConfig cfg;
  cfg.base_url = env_or("VLOOP_PROVIDER_URL", "");
  cfg.auth_token = env_or("VLOOP_PROVIDER_TOKEN", "");
  if (const char* t = std::getenv("VLOOP_PROVIDER_TIMEOUT")) cfg.timeout_seconds = std::atof(t);
  return cfg;
}

HttpProvider::HttpProvider(HttpProviderConfig cfg) : cfg_(std::move(cfg)) {
  if (cfg_.base_url.empty()) throw ProviderError("remote provider URL is not configured");
}

json HttpProvider::post(const std::string& path, const json& body) const {
  httplib::Client cli(cfg_.base_url);
  set_timeouts(cli, cfg_.timeout_seconds);
  if (!cfg_.auth_token.empty()) cli.set_bearer_token_auth(cfg_.auth_token);
  auto res = path == "/capabilities" ? cli.Get(path)
                                     : cli.Post(path, body.dump(), "application/json");
  if (!res) {
    throw ProviderError("remote provider " + path + " failed: " + httplib::to_string(res.error()));
  }
  json parsed;
  try {
    parsed = json::parse(res->body);
  } catch (const json::parse_error&) {
    throw ProviderError("protocol violation: " + path + " returned non-JSON body (HTTP " +
                        std::to_string(res->status) + ")");
  }
  if (res->status < 200 || res->status >= 300) {
    const std::string msg = parsed.is_object() ? parsed.value("error", res->body) : res->body;
    throw ProviderError("remote provider " + path + " returned HTTP " + std::to_string(res->status) +
                        ": " + msg);
  }
  return parsed;
}

ProviderCapabilities HttpProvider::capabilities() const {
  if (!caps_) caps_ = wire::capabilities_from_json(post("/capabilities", nullptr));
  return *caps_;
}

GenerationResult HttpProvider::generate(const ProviderRequest& req) {
  req.validate();
  if (req.visual_bias) {
    if (!capabilities().bias_injection) {
      throw CapabilityError("remote provider does not support visual bias injection");
    }
    if (auto it = visual_len_.find(req.image_ref);
        it != visual_len_.end() && it->second != req.visual_bias->vector.size()) {
      throw ProviderError("visual bias has length " + std::to_string(req.visual_bias->vector.size()) +
                          ", provider reported N_v = " + std::to_string(it->second));
    }
  }
  if (req.want_attention && !capabilities().attention_export) {
    throw CapabilityError("remote provider cannot export attention");
  }
  const json body = wire::to_json(req);
  wire::Response resp = wire::response_from_json(post("/generate", body), req.temperature);
  if (resp.visual_len) visual_len_[req.image_ref] = resp.visual_len;
  if (req.want_attention) {
    if (resp.generation.attention) {
      last_attention_ = vac::aggregate(*resp.generation.attention);
    } else if (resp.aggregated) {
      last_attention_ = resp.aggregated;
    } else {
      throw ProviderError("protocol violation: attention requested but not returned");
    }
    last_key_ = body.dump() + "\n" + resp.generation.answer_text;
  }
  return std::move(resp.generation);
}

vac::VisualAttentionVector HttpProvider::export_visual_attention(const ProviderRequest& req,
                                                                std::string_view answer) {
  if (!capabilities().attention_export) {
    throw CapabilityError("remote provider cannot export attention");
  }
  ProviderRequest probe = req;
  probe.want_attention = true;
  if (last_attention_ && last_key_ == wire::to_json(probe).dump() + "\n" + std::string(answer)) {
    return *last_attention_;
  }
  json body = wire::to_json(probe);
  body["teacher_forced_answer"] = std::string(answer);
  wire::Response resp = wire::response_from_json(post("/generate", body), req.temperature);
  if (resp.visual_len) visual_len_[req.image_ref] = resp.visual_len;
  if (resp.generation.attention) return vac::aggregate(*resp.generation.attention);
  if (resp.aggregated) return *resp.aggregated;
  throw ProviderError("protocol violation: attention export returned no attention");
}

ProviderServer::ProviderServer(std::unique_ptr<Provider> provider, std::string auth_token,
                               std::size_t raw_trace_limit)
    : provider_(std::move(provider)),
      auth_token_(std::move(auth_token)),
      raw_trace_limit_(raw_trace_limit),
      server_(std::make_unique<httplib::Server>()) {
  install_routes();
}

ProviderServer::~ProviderServer() { stop(); }

void ProviderServer::install_routes() {
  auto reply = [](httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
  };
  auto authorized = [this, reply](const httplib::Request& req, httplib::Response& res) {
    if (auth_token_.empty()) return true;
    if (req.get_header_value("Authorization") == "Bearer " + auth_token_) return true;
    reply(res, 401, {{"error", "unauthorized"}});
    return false;
  };

  server_->Get("/health", [reply](const httplib::Request&, httplib::Response& res) {
    reply(res, 200, {{"status", "ok"}});
  });

  server_->Get("/capabilities", [this, reply, authorized](const httplib::Request& req,
                                                          httplib::Response& res) {
    if (!authorized(req, res)) return;
    std::lock_guard lock(mu_);
    reply(res, 200, wire::to_json(provider_->capabilities()));
  });

  server_->Post("/generate", [this, reply, authorized](const httplib::Request& req,
                                                       httplib::Response& res) {
    if (!authorized(req, res)) return;
    try {
      const json body = json::parse(req.body);
      const ProviderRequest preq = wire::request_from_json(body);
      std::lock_guard lock(mu_);
      wire::Response out;
      if (auto it = body.find("teacher_forced_answer"); it != body.end() && it->is_string()) {
        out.generation.answer_text = it->get<std::string>();
        out.aggregated = provider_->export_visual_attention(preq, out.generation.answer_text);
      } else {
        out.generation = provider_->generate(preq);
        if (out.generation.attention &&
            out.generation.attention->weights().size() > raw_trace_limit_) {
          out.aggregated = vac::aggregate(*out.generation.attention);
          out.generation.attention.reset();
        }
      }
      reply(res, 200, wire::to_json(out));
    } catch (const json::exception& e) {
      reply(res, 400, {{"error", std::string("malformed request: ") + e.what()}});
    } catch (const ProviderError& e) {
      reply(res, 422, {{"error", e.what()}});
    } catch (const std::exception& e) {
      reply(res, 500, {{"error", e.what()}});
    }
  });
}

int ProviderServer::start(const std::string& host, int port) {
  const int bound = port == 0 ? server_->bind_to_any_port(host) : (server_->bind_to_port(host, port) ? port : -1);
  if (bound < 0) throw ProviderError("cannot bind provider server on " + host);
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
  return bound;
}

void ProviderServer::listen(const std::string& host, int port) {
  if (!server_->listen(host, port)) throw ProviderError("cannot listen on " + host);
}

void ProviderServer::stop() {
  if (server_) server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace vloop
