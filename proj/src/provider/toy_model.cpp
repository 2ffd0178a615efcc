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

#include "vloop/toy_model.hpp"

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "vloop/error.hpp"
#include "vloop/hash.hpp"
#include "vloop/text.hpp"

namespace vloop {
namespace {

const std::vector<std::string>& builtin_words() {
  static const std::vector<std::string> kWords = {
      "yes",       "no",         "the",        "a",         "in",        "of",
      "is",        "left",       "right",      "upper",     "lower",     "middle",
      "lung",      "lobe",       "heart",      "liver",     "kidney",    "spleen",
      "brain",     "bowel",      "chest",      "abdomen",   "pelvis",    "spine",
      "pneumothorax", "effusion", "pleural",   "nodule",    "mass",      "cyst",
      "edema",     "fracture",   "hemorrhage", "infarct",   "tumor",     "cardiomegaly",
      "atelectasis", "consolidation", "opacity", "calcification", "large", "small",
      "round",     "irregular",  "hyperdense", "hypodense", "ct",        "mri",
      "x-ray",     "ultrasound", "axial",      "coronal",   "sagittal",  "normal",
      "abnormal",  "enlarged",   "bilateral",  "one",       "two",       "three"};
  return kWords;
}

std::uint64_t seed_from(std::string_view material) {
  const std::string digest = sha256_hex(material);
  return std::stoull(digest.substr(0, 16), nullptr, 16);
}

RowMatrix random_matrix(std::mt19937_64& rng, int rows, int cols, double scale) {
  std::normal_distribution<double> dist(0.0, scale);
  RowMatrix m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = dist(rng);
  return m;
}

RowMatrix layer_norm(const RowMatrix& x) {
  RowMatrix out(x.rows(), x.cols());
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    const double mean = x.row(i).mean();
    const double var = (x.row(i).array() - mean).square().mean();
    out.row(i) = (x.row(i).array() - mean) / std::sqrt(var + 1e-5);
  }
  return out;
}

std::string double_bits(double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, sizeof bits);
  return std::to_string(bits);
}

}  // namespace

std::shared_ptr<const ToyModelParams> ToyModelParams::build(const ToyModelConfig& cfg) {
  if (cfg.embed_dim <= 0 || cfg.layers <= 0 || cfg.heads <= 0 || cfg.grid <= 0 ||
      cfg.patch_vocab <= 0 || cfg.max_seq <= 0 || cfg.embed_dim % cfg.heads != 0) {
    throw ProviderError("invalid toy model configuration");
  }
  auto p = std::make_shared<ToyModelParams>();
  p->config = cfg;
  p->vocab = {"<bos>", "<sep>", "<eos>", "<unk>"};
  for (int i = 0; i < cfg.patch_vocab; ++i) p->vocab.push_back("<patch" + std::to_string(i) + ">");
  p->first_word = static_cast<int>(p->vocab.size());
  const auto& words = cfg.words.empty() ? builtin_words() : cfg.words;
  for (const auto& w : words) {
    if (word_tokens(w).size() != 1 || word_tokens(w).front() != w) {
      throw ProviderError("toy vocabulary word '" + w + "' is not a single normalized token");
    }
    if (p->index.count(w)) continue;
    p->vocab.push_back(w);
  }
  for (int i = 0; i < static_cast<int>(p->vocab.size()); ++i) p->index[p->vocab[i]] = i;

  std::mt19937_64 rng(cfg.seed);
  const int d = cfg.embed_dim;
  const double wscale = 1.0 / std::sqrt(static_cast<double>(d));
  p->embedding = random_matrix(rng, static_cast<int>(p->vocab.size()), d, 1.0);
  p->positional = random_matrix(rng, cfg.max_seq, d, 0.1);
  for (int l = 0; l < cfg.layers; ++l) {
    Layer layer;
    layer.wq = random_matrix(rng, d, d, wscale);
    layer.wk = random_matrix(rng, d, d, wscale);
    layer.wv = random_matrix(rng, d, d, wscale);
    layer.wo = random_matrix(rng, d, d, wscale);
    layer.w1 = random_matrix(rng, d, 2 * d, wscale);
    layer.w2 = random_matrix(rng, 2 * d, d, wscale / std::sqrt(2.0));
    p->layers.push_back(std::move(layer));
  }
  return p;
}

int ToyModelParams::token_id(const std::string& word) const {
  auto it = index.find(word);
  return it == index.end() ? unk : it->second;
}

ToyModel::ToyModel(std::shared_ptr<const ToyModelParams> params) : params_(std::move(params)) {
  if (!params_) throw ProviderError("toy model requires parameters");
}

std::vector<int> ToyModel::image_tokens(const std::string& image_ref) const {
  const auto& p = *params_;
  std::mt19937_64 rng(seed_from("image|" + std::to_string(p.config.seed) + "|" + image_ref));
  std::uniform_int_distribution<int> dist(0, p.config.patch_vocab - 1);
  std::vector<int> out(static_cast<std::size_t>(p.visual_len()));
  for (int& t : out) t = p.first_patch + dist(rng);
  return out;
}

std::vector<int> ToyModel::text_tokens(const std::string& text) const {
  std::vector<int> out;
  for (const auto& w : word_tokens(normalize_text(text))) out.push_back(params_->token_id(w));
  return out;
}

ToySequence ToyModel::sequence(const std::string& image_ref, const std::string& question,
                               const std::vector<int>& answer) const {
  const auto& p = *params_;
  ToySequence s;
  s.tokens.push_back(p.bos);
  s.layout.visual_begin = s.tokens.size();
  for (int t : image_tokens(image_ref)) s.tokens.push_back(t);
  s.layout.visual_end = s.tokens.size();
  for (int t : text_tokens(question)) {
    s.layout.text_rows.push_back(s.tokens.size());
    s.tokens.push_back(t);
  }
  s.tokens.push_back(p.sep);
  s.answer_begin = s.tokens.size();
  for (int t : answer) {
    s.layout.text_rows.push_back(s.tokens.size());
    s.tokens.push_back(t);
  }
  s.layout.seq_len = s.tokens.size();
  if (static_cast<int>(s.tokens.size()) > p.config.max_seq) {
    throw ProviderError("toy sequence exceeds max_seq");
  }
  return s;
}

ToyForward ToyModel::forward(const ToySequence& seq, const std::optional<VisualBias>& bias,
                             bool keep_attention) const {
  const auto& p = *params_;
  const int n = static_cast<int>(seq.tokens.size());
  const int d = p.config.embed_dim;
  const int dh = d / p.config.heads;
  const double scale = 1.0 / std::sqrt(static_cast<double>(dh));

  vac::VisualAttentionVector zero{std::vector<double>(static_cast<std::size_t>(p.visual_len()), 0.0)};
  const vac::VisualAttentionVector& bias_vec = bias ? bias->vector : zero;
  const double alpha = bias ? bias->alpha : 0.0;

  RowMatrix x(n, d);
  for (int i = 0; i < n; ++i) x.row(i) = p.embedding.row(seq.tokens[i]) + p.positional.row(i);

  ToyForward out;
  for (const auto& layer : p.layers) {
    const RowMatrix h = layer_norm(x);
    const RowMatrix q = h * layer.wq;
    const RowMatrix k = h * layer.wk;
    const RowMatrix v = h * layer.wv;
    RowMatrix mixed(n, d);
    std::vector<RowMatrix> maps;
    for (int head = 0; head < p.config.heads; ++head) {
      RowMatrix probs = (q.middleCols(head * dh, dh) * k.middleCols(head * dh, dh).transpose()) * scale;
      for (int i = 0; i < n; ++i) {
        const double m = probs.row(i).head(i + 1).maxCoeff();
        double sum = 0.0;
        for (int j = 0; j <= i; ++j) sum += (probs(i, j) = std::exp(probs(i, j) - m));
        for (int j = 0; j <= i; ++j) probs(i, j) /= sum;
        for (int j = i + 1; j < n; ++j) probs(i, j) = 0.0;
      }
      vac::reweight_attention(std::span<double>(probs.data(), static_cast<std::size_t>(n) * n),
                              seq.layout, bias_vec, alpha);
      mixed.middleCols(head * dh, dh) = probs * v.middleCols(head * dh, dh);
      if (keep_attention) maps.push_back(std::move(probs));
    }
    x += mixed * layer.wo;
    const RowMatrix h2 = layer_norm(x);
    x += (h2 * layer.w1).cwiseMax(0.0) * layer.w2;
    if (keep_attention) out.attention.push_back(std::move(maps));
  }
  const RowMatrix final_h = layer_norm(x.bottomRows(1));
  out.last_logits = p.embedding * final_h.row(0).transpose();
  return out;
}

ToyProvider::ToyProvider(std::shared_ptr<const ToyModelParams> params,
                         std::unordered_set<std::string> image_catalog)
    : model_(std::move(params)), catalog_(std::move(image_catalog)) {}

std::string ToyProvider::id() const {
  const auto& c = model_.params().config;
  return "toy:seed=" + std::to_string(c.seed) + ",d=" + std::to_string(c.embed_dim) +
         ",L=" + std::to_string(c.layers) + ",H=" + std::to_string(c.heads) +
         ",G=" + std::to_string(c.grid);
}

void ToyProvider::check_request(const ProviderRequest& req) const {
  req.validate();
  if (req.image_ref.empty() || (!catalog_.empty() && !catalog_.count(req.image_ref))) {
    throw ProviderError("unknown image_ref '" + req.image_ref + "'");
  }
  if (req.visual_bias &&
      req.visual_bias->vector.size() != static_cast<std::size_t>(model_.params().visual_len())) {
    throw ProviderError("visual bias has length " + std::to_string(req.visual_bias->vector.size()) +
                        ", provider has N_v = " + std::to_string(model_.params().visual_len()));
  }
}

GenerationResult ToyProvider::generate(const ProviderRequest& req) {
  check_request(req);
  const auto& p = model_.params();
  const int vocab = static_cast<int>(p.vocab.size());

  std::string seed_material = "sample|" + std::to_string(p.config.seed) + "|" + req.image_ref +
                              "|" + req.question + "|" + double_bits(req.temperature) + "|" +
                              std::to_string(req.sample_index.value_or(-1));
  std::mt19937_64 rng(seed_from(seed_material));
  std::uniform_real_distribution<double> unif(0.0, 1.0);

  GenerationResult result;
  result.temperature_used = req.temperature;
  last_dists_.clear();
  std::vector<int> answer;
  for (int step = 0; step < req.max_tokens; ++step) {
    const ToySequence seq = model_.sequence(req.image_ref, req.question, answer);
    const ToyForward fwd = model_.forward(seq, req.visual_bias, false);

    // Only words and (after the first step) <eos> may be emitted.
    std::vector<int> allowed;
    if (step > 0) allowed.push_back(p.eos);
    for (int t = p.first_word; t < vocab; ++t) allowed.push_back(t);

    double max_logit = -std::numeric_limits<double>::infinity();
    for (int t : allowed) max_logit = std::max(max_logit, fwd.last_logits[t]);
    Eigen::VectorXd dist = Eigen::VectorXd::Zero(vocab);
    double sum = 0.0;
    for (int t : allowed) sum += (dist[t] = std::exp(fwd.last_logits[t] - max_logit));
    dist /= sum;
    last_dists_.push_back(dist);

    int chosen = allowed.front();
    if (req.temperature == 0.0) {
      for (int t : allowed)
        if (dist[t] > dist[chosen]) chosen = t;
    } else {
      std::vector<double> w;
      w.reserve(allowed.size());
      double wmax = -std::numeric_limits<double>::infinity();
      for (int t : allowed) wmax = std::max(wmax, fwd.last_logits[t] / req.temperature);
      double wsum = 0.0;
      for (int t : allowed) {
        w.push_back(std::exp(fwd.last_logits[t] / req.temperature - wmax));
        wsum += w.back();
      }
      double u = unif(rng) * wsum;
      std::size_t pick = allowed.size() - 1;
      for (std::size_t i = 0; i < w.size(); ++i) {
        if (u < w[i]) {
          pick = i;
          break;
        }
        u -= w[i];
      }
      chosen = allowed[pick];
    }
    if (chosen == p.eos) break;

    double entropy = 0.0;
    for (int t : allowed)
      if (dist[t] > 0.0) entropy -= dist[t] * std::log(dist[t]);
    answer.push_back(chosen);
    result.token_probs.push_back(std::max(dist[chosen], std::numeric_limits<double>::min()));
    result.token_entropies.push_back(std::max(entropy, 0.0));
  }

  std::vector<std::string> words;
  for (int t : answer) words.push_back(p.vocab[t]);
  result.answer_text = join(words, " ");
  if (req.want_attention) result.attention = teacher_forced_trace(req, result.answer_text);
  return result;
}

AttentionTrace ToyProvider::teacher_forced_trace(const ProviderRequest& req,
                                                 std::string_view answer) const {
  check_request(req);
  const auto& p = model_.params();
  const ToySequence seq =
      model_.sequence(req.image_ref, req.question, model_.text_tokens(std::string(answer)));
  const ToyForward fwd = model_.forward(seq, req.visual_bias, true);
  const auto& layout = seq.layout;
  const std::size_t nv = layout.visual_end - layout.visual_begin;
  const std::size_t nt = layout.text_rows.size();
  if (nt == 0) throw ProviderError("no text tokens to aggregate attention over");

  AttentionTrace trace(p.layers.size(), static_cast<std::size_t>(p.config.heads), nt, nv);
  for (std::size_t l = 0; l < p.layers.size(); ++l)
    for (std::size_t h = 0; h < static_cast<std::size_t>(p.config.heads); ++h)
      for (std::size_t t = 0; t < nt; ++t)
        for (std::size_t v = 0; v < nv; ++v)
          trace.at(l, h, t, v) = fwd.attention[l][h](static_cast<Eigen::Index>(layout.text_rows[t]),
                                                     static_cast<Eigen::Index>(layout.visual_begin + v));
  return trace;
}

vac::VisualAttentionVector ToyProvider::export_visual_attention(const ProviderRequest& req,
                                                               std::string_view answer) {
  return vac::aggregate(teacher_forced_trace(req, answer));
}

}  // namespace vloop
