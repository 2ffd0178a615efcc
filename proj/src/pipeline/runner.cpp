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

#include "vloop/runner.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>
#include <stdexcept>

#include "vloop/dataset.hpp"
#include "vloop/error.hpp"
#include "vloop/http_provider.hpp"
#include "vloop/metrics.hpp"
#include "vloop/scripted_provider.hpp"
#include "vloop/toy_model.hpp"

namespace vloop {
namespace {

using nlohmann::json;

const std::set<std::string> kSpecKeys = {"dataset",   "provider",  "script",    "toy_seed", "visual_len",
                                         "lexicon",   "synonyms",  "evaluator", "extractor", "rephraser",
                                         "matcher",   "fuse_with", "cache_dir", "pipeline"};

void require_one_of(const std::string& what, const std::string& value, std::initializer_list<const char*> allowed) {
  for (const char* a : allowed)
    if (value == a) return;
  throw std::invalid_argument("unknown " + what + " '" + value + "'");
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
}

std::filesystem::path absolute_or_empty(const std::filesystem::path& p) {
  return p.empty() ? p : std::filesystem::absolute(p).lexically_normal();
}

json method_report(const std::vector<std::string>& ids, const std::vector<double>& scores,
                   const std::vector<double>& labels, const std::vector<double>& greens) {
  json m;
  std::size_t n_pos = 0;
  for (double l : labels) n_pos += l > 0.5 ? 1 : 0;
  m["n"] = ids.size();
  m["n_pos"] = n_pos;
  if (ids.empty()) {
    m["auc"] = m["aug"] = m["auc_pct"] = m["aug_pct"] = nullptr;
    m["curve"] = json::array();
    return m;
  }
  try {
    const double a = metrics::auc(scores, labels);
    m["auc"] = a;
    m["auc_pct"] = 100.0 * a;
  } catch (const std::invalid_argument& e) {
    m["auc"] = m["auc_pct"] = nullptr;
    m["auc_undefined"] = e.what();
  }
  const double g = metrics::aug(ids, scores, greens);
  m["aug"] = g;
  m["aug_pct"] = 100.0 * g;
  m["curve"] = metrics::green_curve(ids, scores, greens);
  return m;
}

}  // namespace

void RunSpec::validate() const {
  require_one_of("provider", provider, {"toy", "scripted", "http"});
  require_one_of("evaluator", evaluator, {"deterministic", "remote"});
  require_one_of("extractor", extractor, {"lexicon", "remote"});
  require_one_of("rephraser", rephraser, {"template", "remote"});
  require_one_of("matcher", matcher, {"deterministic", "remote"});
  if (provider == "scripted" && script.empty()) throw std::invalid_argument("scripted provider needs a script file");
  if (visual_len == 0) throw std::invalid_argument("visual_len must be positive");
  pipeline.validate();
}

json RunSpec::to_json() const {
  return {{"dataset", dataset.string()},   {"provider", provider},   {"script", script.string()},
          {"toy_seed", toy_seed},          {"visual_len", visual_len}, {"lexicon", lexicon.string()},
          {"synonyms", synonyms.string()}, {"evaluator", evaluator}, {"extractor", extractor},
          {"rephraser", rephraser},        {"matcher", matcher},     {"fuse_with", fuse_with.string()},
          {"cache_dir", cache_dir.string()}, {"pipeline", pipeline.to_json()}};
}

RunSpec RunSpec::from_json(const json& j) {
  if (!j.is_object()) throw std::invalid_argument("run configuration must be a JSON object");
  for (const auto& [key, _] : j.items()) {
    if (!kSpecKeys.count(key)) throw std::invalid_argument("unknown configuration key '" + key + "'");
  }
  RunSpec s;
  try {
    s.dataset = j.value("dataset", std::string());
    s.provider = j.value("provider", s.provider);
    s.script = j.value("script", std::string());
    s.toy_seed = j.value("toy_seed", s.toy_seed);
    s.visual_len = j.value("visual_len", s.visual_len);
    s.lexicon = j.value("lexicon", std::string());
    s.synonyms = j.value("synonyms", std::string());
    s.evaluator = j.value("evaluator", s.evaluator);
    s.extractor = j.value("extractor", s.extractor);
    s.rephraser = j.value("rephraser", s.rephraser);
    s.matcher = j.value("matcher", s.matcher);
    s.fuse_with = j.value("fuse_with", std::string());
    s.cache_dir = j.value("cache_dir", std::string());
    if (j.contains("pipeline")) s.pipeline = PipelineConfig::from_json(j.at("pipeline"));
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("invalid configuration: ") + e.what());
  }
  s.validate();
  return s;
}

RunSpec RunSpec::load(const std::filesystem::path& path) {
  try {
    RunSpec s = from_json(json::parse(read_file(path)));
    // Relative paths in a config file are relative to the file itself.
    const auto base = std::filesystem::absolute(path).parent_path();
    for (auto* p : {&s.dataset, &s.script, &s.lexicon, &s.synonyms, &s.fuse_with, &s.cache_dir}) {
      if (!p->empty() && p->is_relative()) *p = (base / *p).lexically_normal();
    }
    return s;
  } catch (const json::parse_error& e) {
    throw std::invalid_argument("malformed configuration " + path.string() + ": " + e.what());
  }
}

struct Runner::State {
  Lexicon lexicon;
  SynonymTable synonyms;
  std::unique_ptr<LlmClient> chat;
  std::unique_ptr<UnitExtractor> extractor;
  std::unique_ptr<Rephraser> rephraser;
  std::unique_ptr<Evaluator> evaluator;
  std::unique_ptr<FindingMatcher> matcher;
  std::map<std::string, double> external;
};

Runner::Runner(RunSpec spec) : spec_(std::move(spec)), state_(std::make_unique<State>()) {
  spec_.validate();
  State& st = *state_;
  st.lexicon = spec_.lexicon.empty() ? Lexicon::builtin() : Lexicon::load(spec_.lexicon);
  if (!spec_.synonyms.empty()) st.synonyms = SynonymTable::load(spec_.synonyms);

  auto chat = [&]() -> LlmClient& {
    if (!st.chat) {
      ChatClientConfig cfg = ChatClientConfig::from_env("VLOOP_JUDGE");
      if (cfg.base_url.empty()) throw std::invalid_argument("remote components need VLOOP_JUDGE_URL");
      st.chat = std::make_unique<HttpChatClient>(cfg);
    }
    return *st.chat;
  };
  if (spec_.extractor == "remote") {
    st.extractor = std::make_unique<RemoteUnitExtractor>(chat());
  } else {
    st.extractor = std::make_unique<LexiconExtractor>(st.lexicon);
  }
  if (spec_.rephraser == "remote") {
    st.rephraser = std::make_unique<RemoteRephraser>(chat());
  } else {
    st.rephraser = std::make_unique<TemplateRephraser>();
  }
  if (spec_.evaluator == "remote") {
    st.evaluator = std::make_unique<RemoteJudgeEvaluator>(chat());
  } else {
    st.evaluator = std::make_unique<DeterministicEvaluator>(st.synonyms);
  }
  st.evaluator->set_threshold(spec_.pipeline.consistency_threshold);
  if (spec_.matcher == "remote") {
    st.matcher = std::make_unique<RemoteGreenJudge>(chat());
  } else {
    st.matcher = std::make_unique<DeterministicFindingMatcher>(st.lexicon, st.synonyms);
  }
  if (!spec_.fuse_with.empty()) st.external = baselines::load_external_scores(spec_.fuse_with);

  if (spec_.provider == "toy") {
    ToyModelConfig cfg;
    cfg.seed = spec_.toy_seed;
    auto params = ToyModelParams::build(cfg);
    components_.provider_factory = [params] { return std::make_unique<ToyProvider>(params); };
  } else if (spec_.provider == "scripted") {
    auto entries = std::make_shared<const std::vector<ScriptEntry>>(parse_script(read_file(spec_.script)));
    const std::size_t nv = spec_.visual_len;
    components_.provider_factory = [entries, nv] { return std::make_unique<ScriptedProvider>(*entries, nv); };
  } else {
    HttpProviderConfig cfg = HttpProviderConfig::from_env();
    if (cfg.base_url.empty()) throw std::invalid_argument("http provider needs VLOOP_PROVIDER_URL");
    components_.provider_factory = [cfg] { return std::make_unique<HttpProvider>(cfg); };
  }

  cache_ = spec_.cache_dir.empty() ? std::make_unique<ArtifactCache>()
                                   : std::make_unique<ArtifactCache>(spec_.cache_dir);
  components_.extractor = st.extractor.get();
  components_.rephraser = st.rephraser.get();
  components_.evaluator = st.evaluator.get();
  components_.matcher = st.matcher.get();
  components_.cache = cache_.get();
  components_.external_scores = spec_.fuse_with.empty() ? nullptr : &st.external;
}

Runner::~Runner() = default;

std::vector<DetectionOutcome> Runner::run(const std::vector<VqaRecord>& records) {
  return run_split(records, spec_.pipeline, components_);
}

RunResult detect(const RunSpec& input, const std::filesystem::path& out_dir) {
  RunSpec spec = input;
  spec.dataset = absolute_or_empty(spec.dataset);
  spec.script = absolute_or_empty(spec.script);
  spec.lexicon = absolute_or_empty(spec.lexicon);
  spec.synonyms = absolute_or_empty(spec.synonyms);
  spec.fuse_with = absolute_or_empty(spec.fuse_with);
  spec.cache_dir = absolute_or_empty(spec.cache_dir);
  if (spec.dataset.empty()) throw std::invalid_argument("no dataset given");

  const auto records = load_dataset(spec.dataset);
  Runner runner(spec);
  RunResult result;
  result.outcomes = runner.run(records);

  std::unique_ptr<Provider> probe = runner.components().provider_factory();
  result.manifest.config = {{"spec", spec.to_json()},
                            {"provider_id", probe->id()},
                            {"evaluator_id", runner.components().evaluator->id()},
                            {"config_hash", spec.pipeline.hash()}};
  result.manifest.dataset_path = spec.dataset.string();
  result.manifest.dataset_fingerprint = fingerprint_file(spec.dataset);
  result.manifest.timestamp = utc_timestamp();
  result.manifest.cache_keys = runner.cache().index();
  result.report = evaluate_outcomes(result.outcomes, {spec.pipeline.fusion_weight});

  std::filesystem::create_directories(out_dir);
  write_outcomes(out_dir / "outcomes.jsonl", result.outcomes);
  result.manifest.save(out_dir / "manifest.json");
  write_file(out_dir / "report.json", result.report.dump(2) + "\n");
  return result;
}

RunResult replay(const std::filesystem::path& manifest_path, const std::filesystem::path& out_dir) {
  const RunManifest manifest = RunManifest::load(manifest_path);
  if (!manifest.config.contains("spec")) throw DatasetError("manifest has no run configuration");
  const RunSpec spec = RunSpec::from_json(manifest.config.at("spec"));
  const std::string now = fingerprint_file(spec.dataset);
  if (now != manifest.dataset_fingerprint) {
    throw DatasetError("dataset " + spec.dataset.string() + " changed since the manifest was written");
  }
  return detect(spec, out_dir);
}

json evaluate_outcomes(const std::vector<DetectionOutcome>& outcomes, const ReportOptions& options) {
  json report;
  report["n_records"] = outcomes.size();
  report["coverage"] = coverage(outcomes);
  report["failed"] = json::array();
  std::set<std::string> methods;
  for (const auto& o : outcomes) {
    if (!o.ok()) {
      report["failed"].push_back({{"record_id", o.record_id}, {"error", *o.error}});
      continue;
    }
    for (const auto& [m, _] : o.scores) methods.insert(m);
  }

  auto collect = [&](const std::vector<std::string>& needed, std::vector<std::string>& ids,
                     std::vector<double>& labels, std::vector<double>& greens,
                     std::vector<std::vector<double>>& columns) {
    columns.assign(needed.size(), {});
    for (const auto& o : outcomes) {
      if (!o.ok()) continue;
      bool has_all = true;
      for (const auto& m : needed) has_all = has_all && o.scores.count(m);
      if (!has_all) continue;
      ids.push_back(o.record_id);
      labels.push_back(o.green.label);
      greens.push_back(o.green.score);
      for (std::size_t k = 0; k < needed.size(); ++k) columns[k].push_back(o.scores.at(needed[k]));
    }
  };

  json per_method = json::object();
  for (const auto& m : methods) {
    std::vector<std::string> ids;
    std::vector<double> labels, greens;
    std::vector<std::vector<double>> cols;
    collect({m}, ids, labels, greens, cols);
    per_method[m] = method_report(ids, cols[0], labels, greens);
  }
  if (methods.count("vloop")) {
    for (const auto& m : methods) {
      if (m == "vloop") continue;
      std::vector<std::string> ids;
      std::vector<double> labels, greens;
      std::vector<std::vector<double>> cols;
      collect({m, "vloop"}, ids, labels, greens, cols);
      const std::vector<double> fused = baselines::fuse(cols[0], cols[1], {options.fusion_weight});
      per_method[m + "+vloop"] = method_report(ids, fused, labels, greens);
    }
  }
  report["methods"] = per_method;
  report["fusion_weight"] = options.fusion_weight;
  report["notes"] = {
      "detection scores: higher means more likely hallucinated",
      "label = 1 iff GREEN < 1.0; GREEN = 1.0 when matched = errors = 0",
      "mean GREEN at X% uses the ceil(N*X/100) lowest-score records, ties broken by record_id",
      "AUG = mean of mean-GREEN-at-X over X = 1..100; *_pct fields are x100",
      "curve[0] is the single most confident record",
      "fused = (1-w)*rank_norm(base) + w*vloop_flag within the split"};
  return report;
}

json evaluate_directory(const std::filesystem::path& dir) {
  ReportOptions options;
  const auto manifest_path = dir / "manifest.json";
  if (std::filesystem::exists(manifest_path)) {
    const RunManifest m = RunManifest::load(manifest_path);
    if (m.config.contains("spec") && m.config["spec"].contains("pipeline")) {
      options.fusion_weight = m.config["spec"]["pipeline"].value("fusion_weight", options.fusion_weight);
    }
  }
  json report = evaluate_outcomes(read_outcomes(dir / "outcomes.jsonl"), options);
  write_file(dir / "report.json", report.dump(2) + "\n");
  return report;
}

std::vector<double> parse_alpha_values(std::string_view text) {
  auto number = [&](std::string_view s) {
    const std::string str(s);
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(str, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != str.size() || str.empty() || !std::isfinite(v) || v < 0.0) {
      throw std::invalid_argument("invalid alpha value '" + str + "'");
    }
    return v;
  };
  std::vector<double> out;
  if (const auto dots = text.find(".."); dots != std::string_view::npos) {
    std::string_view rest = text.substr(dots + 2);
    double step = 0.2;
    if (const auto colon = rest.find(':'); colon != std::string_view::npos) {
      step = number(rest.substr(colon + 1));
      rest = rest.substr(0, colon);
    }
    const double lo = number(text.substr(0, dots));
    const double hi = number(rest);
    if (step <= 0.0 || hi < lo) throw std::invalid_argument("invalid alpha range '" + std::string(text) + "'");
    const auto n = static_cast<long>(std::floor((hi - lo) / step + 1e-9));
    for (long i = 0; i <= n; ++i) out.push_back(std::round((lo + static_cast<double>(i) * step) * 1e9) / 1e9);
  } else {
    std::size_t start = 0;
    while (start <= text.size()) {
      const auto comma = text.find(',', start);
      const auto end = comma == std::string_view::npos ? text.size() : comma;
      out.push_back(number(text.substr(start, end - start)));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
  }
  return out;
}

std::vector<json> sweep_alpha(const RunSpec& spec, const std::vector<double>& alphas,
                              const std::filesystem::path& out_dir) {
  if (alphas.empty()) throw std::invalid_argument("no alpha values to sweep");
  std::vector<json> rows;
  std::string lines;
  for (double a : alphas) {
    RunSpec s = spec;
    s.pipeline.alpha = a;
    char name[32];
    std::snprintf(name, sizeof name, "alpha_%.2f", a);
    const RunResult r = detect(s, out_dir / name);
    json row = {{"alpha", a}, {"coverage", r.report["coverage"]}, {"methods", json::object()}};
    for (const auto& [m, v] : r.report["methods"].items()) {
      row["methods"][m] = {{"auc", v["auc"]}, {"aug", v["aug"]}};
    }
    lines += row.dump() + "\n";
    rows.push_back(std::move(row));
  }
  std::filesystem::create_directories(out_dir);
  write_file(out_dir / "sweep.jsonl", lines);
  return rows;
}

}  // namespace vloop
