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

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "vloop/http_provider.hpp"
#include "vloop/runner.hpp"
#include "vloop/scripted_provider.hpp"
#include "vloop/toy_model.hpp"

namespace {

using vloop::RunSpec;

// Options that override fields of a RunSpec only when given on the command
// line, so a --config file supplies the rest.
class RunFlags {
 public:
  explicit RunFlags(CLI::App* app) : app_(app) {
    app->add_option("--config", config_, "JSON configuration file mirroring every flag")
        ->check(CLI::ExistingFile);
    add<std::string>("--dataset", "Dataset file (one JSON record per line)",
                     [](RunSpec& s, const std::string& v) { s.dataset = v; });
    add<std::string>("--provider", "toy | scripted | http", [](RunSpec& s, const std::string& v) { s.provider = v; })
        ->check(CLI::IsMember({"toy", "scripted", "http"}));
    add<std::string>("--script", "Scripted provider fixture", [](RunSpec& s, const std::string& v) { s.script = v; });
    add<std::uint64_t>("--toy-seed", "Toy model seed", [](RunSpec& s, std::uint64_t v) { s.toy_seed = v; });
    add<std::size_t>("--visual-len", "Scripted provider visual token count",
                     [](RunSpec& s, std::size_t v) { s.visual_len = v; });
    add<double>("--alpha", "Visual attention bias coefficient", [](RunSpec& s, double v) { s.pipeline.alpha = v; });
    add<double>("--temp-primary", "Primary decoding temperature",
                [](RunSpec& s, double v) { s.pipeline.temp_primary = v; });
    add<double>("--temp-verify", "Verification decoding temperature",
                [](RunSpec& s, double v) { s.pipeline.temp_verify = v; });
    add<double>("--temp-sample", "Sampling temperature for SE / RadFlag",
                [](RunSpec& s, double v) { s.pipeline.temp_sample = v; });
    add<double>("--temp-no-vqg", "Verification temperature when VQG is ablated",
                [](RunSpec& s, double v) { s.pipeline.temp_no_vqg = v; });
    add<int>("--k-samples", "Samples per record for SE / RadFlag",
             [](RunSpec& s, int v) { s.pipeline.k_samples = v; });
    add<int>("--max-tokens", "Token limit for every generation",
             [](RunSpec& s, int v) { s.pipeline.max_tokens = v; });
    add<std::string>("--strategy", "auto | logic | rephrase",
                     [](RunSpec& s, const std::string& v) { s.pipeline.strategy = vloop::strategy_mode_from_string(v); })
        ->check(CLI::IsMember({"auto", "logic", "rephrase"}));
    add<std::string>("--ablate", "none | no-vqg | no-vac",
                     [](RunSpec& s, const std::string& v) { s.pipeline.ablation = vloop::ablation_from_string(v); })
        ->check(CLI::IsMember({"none", "no-vqg", "no-vac"}));
    add<std::vector<std::string>>("--methods", "Comma-separated detection methods",
                                  [](RunSpec& s, const std::vector<std::string>& v) { s.pipeline.methods = v; })
        ->delimiter(',');
    add<double>("--fusion-weight", "Weight of the loop flag in fused scores",
                [](RunSpec& s, double v) { s.pipeline.fusion_weight = v; });
    add<std::string>("--se-weighting", "frequency | likelihood",
                     [](RunSpec& s, const std::string& v) {
                       s.pipeline.se_weighting = v == "likelihood" ? vloop::baselines::ClusterWeighting::kLikelihood
                                                                   : vloop::baselines::ClusterWeighting::kFrequency;
                     })
        ->check(CLI::IsMember({"frequency", "likelihood"}));
    add<double>("--consistency-threshold", "Similarity needed to close the loop",
                [](RunSpec& s, double v) { s.pipeline.consistency_threshold = v; });
    add<int>("--threads", "Record-level worker count", [](RunSpec& s, int v) { s.pipeline.threads = v; });
    add<std::string>("--fuse-with", "External per-record scores to fuse",
                     [](RunSpec& s, const std::string& v) { s.fuse_with = v; });
    add<std::string>("--lexicon", "Lexicon file", [](RunSpec& s, const std::string& v) { s.lexicon = v; });
    add<std::string>("--synonyms", "Synonym table file", [](RunSpec& s, const std::string& v) { s.synonyms = v; });
    add<std::string>("--evaluator", "deterministic | remote",
                     [](RunSpec& s, const std::string& v) { s.evaluator = v; });
    add<std::string>("--extractor", "lexicon | remote", [](RunSpec& s, const std::string& v) { s.extractor = v; });
    add<std::string>("--rephraser", "template | remote", [](RunSpec& s, const std::string& v) { s.rephraser = v; });
    add<std::string>("--matcher", "deterministic | remote", [](RunSpec& s, const std::string& v) { s.matcher = v; });
    add<std::string>("--cache-dir", "Persistent stage cache directory",
                     [](RunSpec& s, const std::string& v) { s.cache_dir = v; });
  }

  RunSpec resolve() const {
    RunSpec spec = config_.empty() ? RunSpec{} : RunSpec::load(config_);
    for (const auto& apply : appliers_) apply(spec);
    spec.validate();
    return spec;
  }

 private:
  template <typename T, typename F>
  CLI::Option* add(const std::string& flag, const std::string& help, F setter) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flag, *value, help);
    appliers_.push_back([opt, value, setter](RunSpec& s) {
      if (opt->count() > 0) setter(s, *value);
    });
    return opt;
  }

  CLI::App* app_;
  std::string config_;
  std::vector<std::function<void(RunSpec&)>> appliers_;
};

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  out << j.dump(2) << "\n";
  if (!out) throw std::runtime_error("cannot write " + path.string());
}

void print_report(const nlohmann::json& report) {
  std::printf("coverage %.4f (%zu records, %zu failed)\n", report["coverage"].get<double>(),
              report["n_records"].get<std::size_t>(), report["failed"].size());
  std::printf("%-18s %6s %6s %9s %9s\n", "method", "n", "n_pos", "AUC", "AUG");
  for (const auto& [name, m] : report["methods"].items()) {
    auto pct = [](const nlohmann::json& v) { return v.is_null() ? std::string("n/a") : std::to_string(v.get<double>()); };
    std::printf("%-18s %6zu %6zu %9s %9s\n", name.c_str(), m["n"].get<std::size_t>(), m["n_pos"].get<std::size_t>(),
                pct(m["auc_pct"]).substr(0, 6).c_str(), pct(m["aug_pct"]).substr(0, 6).c_str());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Loop-consistency hallucination detection for visual question answering"};
  app.require_subcommand(1);

  auto* detect = app.add_subcommand("detect", "Run detection over a dataset");
  RunFlags detect_flags(detect);
  std::string out_dir = "out";
  std::string write_config;
  detect->add_option("--out", out_dir, "Output directory");
  detect->add_option("--write-config", write_config, "Also write the effective configuration here");

  auto* evaluate = app.add_subcommand("evaluate", "Compute the metrics report for a finished run");
  std::string outcomes_dir;
  evaluate->add_option("--outcomes", outcomes_dir, "Directory holding outcomes.jsonl")->required();

  auto* sweep = app.add_subcommand("sweep-alpha", "Run detection once per alpha value");
  RunFlags sweep_flags(sweep);
  std::string values = "0.1..1.3";
  std::string sweep_out = "sweep";
  sweep->add_option("--values", values, "lo..hi[:step] or a comma list");
  sweep->add_option("--out", sweep_out, "Output directory");

  auto* replay = app.add_subcommand("replay", "Re-run a saved manifest");
  std::string manifest_path, replay_out = "replay";
  replay->add_option("--manifest", manifest_path, "manifest.json of an earlier run")->required()->check(CLI::ExistingFile);
  replay->add_option("--out", replay_out, "Output directory");

  auto* serve = app.add_subcommand("serve", "Serve a local provider over the wire protocol");
  std::string serve_provider = "toy", serve_script, host = "127.0.0.1";
  std::uint64_t serve_seed = 20240607;
  int port = 8080;
  serve->add_option("--provider", serve_provider, "toy | scripted")->check(CLI::IsMember({"toy", "scripted"}));
  serve->add_option("--script", serve_script, "Scripted provider fixture");
  serve->add_option("--toy-seed", serve_seed, "Toy model seed");
  serve->add_option("--host", host, "Bind address");
  serve->add_option("--port", port, "Port");

  CLI11_PARSE(app, argc, argv);

  try {
    if (detect->parsed()) {
      const RunSpec spec = detect_flags.resolve();
      if (!write_config.empty()) write_json(write_config, spec.to_json());
      const auto result = vloop::detect(spec, out_dir);
      print_report(result.report);
    } else if (evaluate->parsed()) {
      print_report(vloop::evaluate_directory(outcomes_dir));
    } else if (sweep->parsed()) {
      const auto rows = vloop::sweep_alpha(sweep_flags.resolve(), vloop::parse_alpha_values(values), sweep_out);
      for (const auto& row : rows) std::cout << row.dump() << "\n";
    } else if (replay->parsed()) {
      print_report(vloop::replay(manifest_path, replay_out).report);
    } else if (serve->parsed()) {
      std::unique_ptr<vloop::Provider> provider;
      if (serve_provider == "toy") {
        vloop::ToyModelConfig cfg;
        cfg.seed = serve_seed;
        provider = std::make_unique<vloop::ToyProvider>(vloop::ToyModelParams::build(cfg));
      } else {
        if (serve_script.empty()) throw std::invalid_argument("--script is required for the scripted provider");
        provider = std::make_unique<vloop::ScriptedProvider>(vloop::ScriptedProvider::load(serve_script));
      }
      const char* token = std::getenv("VLOOP_PROVIDER_TOKEN");
      vloop::ProviderServer server(std::move(provider), token ? token : "");
      std::fprintf(stderr, "serving %s on %s:%d\n", serve_provider.c_str(), host.c_str(), port);
      server.listen(host, port);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
