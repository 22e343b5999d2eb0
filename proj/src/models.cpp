// Copyright 2026 The textdistill Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "textdistill/models.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

constexpr float kInspirerKind = 0.0f;
constexpr float kTargetKind = 1.0f;

void init_uniform(Tensor& t, double bound, Rng& rng) {
  for (Real& v : t.mutable_values()) v = static_cast<Real>(uniform(rng, -bound, bound));
}

void init_normal(Tensor& t, double stddev, Rng& rng) {
  for (Real& v : t.mutable_values()) v = static_cast<Real>(normal(rng, 0.0, stddev));
}

void init_xavier(Tensor& t, std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  init_uniform(t, std::sqrt(6.0 / static_cast<double>(fan_in + fan_out)), rng);
}

void fill(Tensor& t, Real value) {
  for (Real& v : t.mutable_values()) v = value;
}

// y = W^T x + b for rank-1 x, W: [in x out].
Tensor linear(const Tensor& x, const Tensor& w, const Tensor& b) {
  const std::size_t in = x.numel();
  return reshape(add_rowwise(matmul(reshape(x, {1, in}), w), b), {w.dim(1)});
}

std::string layer_key(std::size_t l, const char* leaf) {
  return "layer" + std::to_string(l) + "." + leaf;
}

std::vector<CheckpointEntry> with_meta(std::vector<CheckpointEntry> body, float kind,
                                       std::vector<float> config,
                                       std::vector<float> extra = {}) {
  std::vector<CheckpointEntry> out;
  out.push_back({"meta.kind", {1}, {kind}});
  out.push_back({"meta.config", {static_cast<std::uint32_t>(config.size())}, config});
  if (!extra.empty()) {
    out.push_back({"meta.filter_sizes", {static_cast<std::uint32_t>(extra.size())}, extra});
  }
  for (auto& e : body) out.push_back(std::move(e));
  return out;
}

const CheckpointEntry& find_entry(const std::vector<CheckpointEntry>& entries,
                                  std::string_view name) {
  for (const auto& e : entries) {
    if (e.name == name) return e;
  }
  throw DataError("checkpoint lacks tensor " + std::string(name));
}

std::size_t as_count(float v) { return static_cast<std::size_t>(std::lround(v)); }
double as_rate(float v) { return std::round(static_cast<double>(v) * 1e6) / 1e6; }

}  // namespace

std::string to_string(Activation a) {
  switch (a) {
    case Activation::kNone: return "none";
    case Activation::kRelu: return "relu";
    case Activation::kTanh: return "tanh";
  }
  return "none";
}

Activation parse_activation(std::string_view name) {
  if (name == "none") return Activation::kNone;
  if (name == "relu") return Activation::kRelu;
  if (name == "tanh") return Activation::kTanh;
  throw ConfigError("unknown projection activation \"" + std::string(name) +
                    "\" (expected none, relu or tanh)");
}

Tensor apply_activation(const Tensor& x, Activation a) {
  switch (a) {
    case Activation::kNone: return x;
    case Activation::kRelu: return relu(x);
    case Activation::kTanh: return tanh(x);
  }
  return x;
}

void InspirerConfig::validate() const {
  if (layers < 1) throw ConfigError("inspirer: layers must be >= 1");
  if (hidden < 1 || heads < 1 || hidden % heads != 0) {
    throw ConfigError("inspirer: hidden size " + std::to_string(hidden) +
                      " not divisible by " + std::to_string(heads) + " heads");
  }
  if (ff_dim < 1 || mlp_hidden < 1 || projection_dim < 1) {
    throw ConfigError("inspirer: ff_dim, mlp_hidden and projection_dim must be positive");
  }
  if (max_len < 1) throw ConfigError("inspirer: max_len must be >= 1");
  if (vocab_size <= static_cast<std::size_t>(kUnkId)) {
    throw ConfigError("inspirer: vocab_size must exceed the reserved ids");
  }
  if (classes < 2) throw ConfigError("inspirer: need at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("inspirer: dropout must be in [0, 1)");
}

void TargetConfig::validate() const {
  if (filter_sizes.empty()) throw ConfigError("target: no filter sizes");
  for (std::size_t i = 0; i < filter_sizes.size(); ++i) {
    if (filter_sizes[i] < 1) throw ConfigError("target: filter sizes must be positive");
    if (i > 0 && filter_sizes[i] <= filter_sizes[i - 1]) {
      throw ConfigError("target: filter sizes must be strictly increasing");
    }
  }
  if (channels < 1) throw ConfigError("target: channels must be >= 1");
  if (emb_dim < 1 || projection_dim < 1) {
    throw ConfigError("target: emb_dim and projection_dim must be positive");
  }
  if (vocab_size <= static_cast<std::size_t>(kUnkId)) {
    throw ConfigError("target: vocab_size must exceed the reserved ids");
  }
  if (classes < 2) throw ConfigError("target: need at least 2 classes");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw ConfigError("target: dropout must be in [0, 1)");
}

std::size_t TargetConfig::widest_filter() const {
  return filter_sizes.empty() ? 0 : *std::max_element(filter_sizes.begin(), filter_sizes.end());
}

// ---------------------------------------------------------------------------
// ParamStore

Tensor ParamStore::add(std::string name, Shape shape) {
  if (contains(name)) throw ConfigError("duplicate parameter " + name);
  Tensor t = Tensor::zeros(std::move(shape), true);
  entries_.push_back({std::move(name), t});
  return t;
}

const Tensor& ParamStore::at(std::string_view name) const {
  for (const auto& e : entries_) {
    if (e.name == name) return e.tensor;
  }
  throw ConfigError("no parameter named " + std::string(name));
}

bool ParamStore::contains(std::string_view name) const {
  return std::any_of(entries_.begin(), entries_.end(),
                     [&](const Entry& e) { return e.name == name; });
}

std::vector<Tensor> ParamStore::tensors() const {
  std::vector<Tensor> out;
  for (const auto& e : entries_) out.push_back(e.tensor);
  return out;
}

std::vector<Tensor> ParamStore::tensors_with_prefix(std::string_view prefix) const {
  std::vector<Tensor> out;
  for (const auto& e : entries_) {
    if (e.name.starts_with(prefix)) out.push_back(e.tensor);
  }
  return out;
}

std::size_t ParamStore::numel() const {
  std::size_t n = 0;
  for (const auto& e : entries_) n += e.tensor.numel();
  return n;
}

std::size_t ParamStore::numel_excluding_prefix(std::string_view prefix) const {
  std::size_t n = 0;
  for (const auto& e : entries_) {
    if (!e.name.starts_with(prefix)) n += e.tensor.numel();
  }
  return n;
}

ParamStore ParamStore::clone() const {
  ParamStore out;
  for (const auto& e : entries_) out.entries_.push_back({e.name, e.tensor.clone()});
  return out;
}

void ParamStore::set_requires_grad(bool on) {
  for (auto& e : entries_) e.tensor.set_requires_grad(on);
}

void ParamStore::zero_grad() {
  for (auto& e : entries_) e.tensor.zero_grad();
}

bool ParamStore::bitwise_equal(const ParamStore& other) const {
  if (entries_.size() != other.entries_.size()) return false;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& a = entries_[i];
    const auto& b = other.entries_[i];
    if (a.name != b.name || a.tensor.shape() != b.tensor.shape()) return false;
    const auto x = a.tensor.values(), y = b.tensor.values();
    if (!std::equal(x.begin(), x.end(), y.begin(), [](Real p, Real q) {
          return std::bit_cast<std::conditional_t<sizeof(Real) == 4, std::uint32_t,
                                                  std::uint64_t>>(p) ==
                 std::bit_cast<std::conditional_t<sizeof(Real) == 4, std::uint32_t,
                                                  std::uint64_t>>(q);
        })) {
      return false;
    }
  }
  return true;
}

std::vector<CheckpointEntry> ParamStore::to_checkpoint() const {
  std::vector<CheckpointEntry> out;
  for (const auto& e : entries_) {
    CheckpointEntry c;
    c.name = e.name;
    for (std::size_t d : e.tensor.shape()) c.dims.push_back(static_cast<std::uint32_t>(d));
    for (Real v : e.tensor.values()) c.values.push_back(static_cast<float>(v));
    out.push_back(std::move(c));
  }
  return out;
}

void ParamStore::load(const std::vector<CheckpointEntry>& entries) {
  for (auto& e : entries_) {
    const CheckpointEntry& src = find_entry(entries, e.name);
    Shape shape(src.dims.begin(), src.dims.end());
    if (shape != e.tensor.shape()) {
      throw DataError("checkpoint tensor " + e.name + " has shape " + shape_str(shape) +
                      ", model expects " + shape_str(e.tensor.shape()));
    }
    auto dst = e.tensor.mutable_values();
    for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = static_cast<Real>(src.values[i]);
  }
}

// ---------------------------------------------------------------------------
// Inspirer

namespace {

ParamStore build_inspirer_params(const InspirerConfig& c) {
  ParamStore p;
  const std::size_t d = c.hidden;
  p.add("emb.token", {c.vocab_size, d});
  p.add("emb.position", {c.max_len, d});
  p.add("emb.ln.gamma", {d});
  p.add("emb.ln.beta", {d});
  for (std::size_t l = 0; l < c.layers; ++l) {
    for (const char* m : {"q", "k", "v", "o"}) {
      p.add(layer_key(l, (std::string("attn.w") + m).c_str()), {d, d});
      p.add(layer_key(l, (std::string("attn.b") + m).c_str()), {d});
    }
    p.add(layer_key(l, "ln1.gamma"), {d});
    p.add(layer_key(l, "ln1.beta"), {d});
    p.add(layer_key(l, "ff1.w"), {d, c.ff_dim});
    p.add(layer_key(l, "ff1.b"), {c.ff_dim});
    p.add(layer_key(l, "ff2.w"), {c.ff_dim, d});
    p.add(layer_key(l, "ff2.b"), {d});
    p.add(layer_key(l, "ln2.gamma"), {d});
    p.add(layer_key(l, "ln2.beta"), {d});
  }
  p.add("cls.w1", {d, c.mlp_hidden});
  p.add("cls.b1", {c.mlp_hidden});
  p.add("cls.w2", {c.mlp_hidden, c.classes});
  p.add("cls.b2", {c.classes});
  for (std::size_t l = 0; l < c.layers; ++l) {
    p.add("proj." + std::to_string(l) + ".w", {d, c.projection_dim});
    p.add("proj." + std::to_string(l) + ".b", {c.projection_dim});
  }
  return p;
}

std::vector<float> inspirer_meta(const InspirerConfig& c) {
  return {static_cast<float>(c.layers),     static_cast<float>(c.hidden),
          static_cast<float>(c.heads),      static_cast<float>(c.ff_dim),
          static_cast<float>(c.vocab_size), static_cast<float>(c.max_len),
          static_cast<float>(c.classes),    static_cast<float>(c.mlp_hidden),
          static_cast<float>(c.projection_dim), static_cast<float>(c.dropout)};
}

}  // namespace

InspirerModel::InspirerModel(const InspirerConfig& config, std::uint64_t seed)
    : config_(config) {
  config_.validate();
  params_ = build_inspirer_params(config_);
  Rng rng(seed);
  for (const auto& e : params_.entries()) {
    Tensor t = e.tensor;
    const std::string& n = e.name;
    if (n.starts_with("emb.token") || n.starts_with("emb.position")) {
      init_normal(t, 0.1, rng);
    } else if (n.ends_with("gamma")) {
      fill(t, Real(1));
    } else if (t.rank() == 2) {
      init_xavier(t, t.dim(0), t.dim(1), rng);
    }
  }
}

InspirerModel::InspirerModel(const InspirerConfig& config, ParamStore params)
    : config_(config), params_(std::move(params)) {}

InspirerModel InspirerModel::from_checkpoint(const std::vector<CheckpointEntry>& entries) {
  if (checkpoint_kind(entries) != "inspirer") {
    throw DataError("checkpoint does not hold an inspirer model");
  }
  const auto& m = find_entry(entries, "meta.config").values;
  if (m.size() != 10) throw DataError("inspirer checkpoint: malformed meta.config");
  InspirerConfig c;
  c.layers = as_count(m[0]);
  c.hidden = as_count(m[1]);
  c.heads = as_count(m[2]);
  c.ff_dim = as_count(m[3]);
  c.vocab_size = as_count(m[4]);
  c.max_len = as_count(m[5]);
  c.classes = as_count(m[6]);
  c.mlp_hidden = as_count(m[7]);
  c.projection_dim = as_count(m[8]);
  c.dropout = as_rate(m[9]);
  c.validate();
  ParamStore p = build_inspirer_params(c);
  p.load(entries);
  return InspirerModel(c, std::move(p));
}

InspirerModel InspirerModel::load(const std::filesystem::path& path) {
  return from_checkpoint(read_checkpoint(path));
}

std::vector<CheckpointEntry> InspirerModel::to_checkpoint() const {
  return with_meta(params_.to_checkpoint(), kInspirerKind, inspirer_meta(config_));
}

void InspirerModel::save(const std::filesystem::path& path) const {
  write_checkpoint(path, to_checkpoint());
}

TransformerLayerParams InspirerModel::layer(std::size_t l) const {
  TransformerLayerParams p;
  p.attention.wq = params_.at(layer_key(l, "attn.wq"));
  p.attention.bq = params_.at(layer_key(l, "attn.bq"));
  p.attention.wk = params_.at(layer_key(l, "attn.wk"));
  p.attention.bk = params_.at(layer_key(l, "attn.bk"));
  p.attention.wv = params_.at(layer_key(l, "attn.wv"));
  p.attention.bv = params_.at(layer_key(l, "attn.bv"));
  p.attention.wo = params_.at(layer_key(l, "attn.wo"));
  p.attention.bo = params_.at(layer_key(l, "attn.bo"));
  p.ln1_gamma = params_.at(layer_key(l, "ln1.gamma"));
  p.ln1_beta = params_.at(layer_key(l, "ln1.beta"));
  p.ff1_w = params_.at(layer_key(l, "ff1.w"));
  p.ff1_b = params_.at(layer_key(l, "ff1.b"));
  p.ff2_w = params_.at(layer_key(l, "ff2.w"));
  p.ff2_b = params_.at(layer_key(l, "ff2.b"));
  p.ln2_gamma = params_.at(layer_key(l, "ln2.gamma"));
  p.ln2_beta = params_.at(layer_key(l, "ln2.beta"));
  return p;
}

ForwardTrace InspirerModel::forward(std::span<const TokenId> tokens, Mode mode,
                                    Rng* rng) const {
  const std::size_t n = tokens.size();
  if (n == 0 || tokens[0] != kClsId) {
    throw PreconditionError("inspirer: input must start with the classification token");
  }
  if (n > config_.max_len) {
    throw PreconditionError("inspirer: input of " + std::to_string(n) +
                            " tokens exceeds max_len " + std::to_string(config_.max_len));
  }
  const bool train = mode == Mode::kTrain && rng != nullptr && config_.dropout > 0.0;
  const Real p_drop = static_cast<Real>(config_.dropout);

  ForwardTrace trace;
  trace.content_mask.resize(n);
  bool has_pad = false;
  for (std::size_t i = 0; i < n; ++i) {
    trace.content_mask[i] = tokens[i] != kPadId;
    has_pad = has_pad || !trace.content_mask[i];
  }
  const std::vector<bool> key_keep = has_pad ? trace.content_mask : std::vector<bool>{};

  std::vector<TokenId> positions(n);
  for (std::size_t i = 0; i < n; ++i) positions[i] = static_cast<TokenId>(i);
  Tensor x = add(embedding_lookup(params_.at("emb.token"), tokens),
                 embedding_lookup(params_.at("emb.position"), positions));
  x = layer_norm(x, params_.at("emb.ln.gamma"), params_.at("emb.ln.beta"));
  if (train) x = dropout(x, p_drop, *rng);

  for (std::size_t l = 0; l < config_.layers; ++l) {
    x = attention_block(x, layer(l), config_.heads, key_keep, p_drop,
                        train ? rng : nullptr);
    trace.layer_states.push_back(x);
  }
  trace.pooled = row(x, 0);
  Tensor h = trace.pooled;
  if (train) h = dropout(h, p_drop, *rng);
  const Tensor hidden = tanh(linear(h, params_.at("cls.w1"), params_.at("cls.b1")));
  trace.logits = linear(hidden, params_.at("cls.w2"), params_.at("cls.b2"));
  return trace;
}

std::vector<Tensor> InspirerModel::encoder_parameters() const {
  std::vector<Tensor> out = params_.tensors_with_prefix("emb.");
  for (const Tensor& t : params_.tensors_with_prefix("layer")) out.push_back(t);
  return out;
}

std::vector<Tensor> InspirerModel::head_parameters() const {
  return params_.tensors_with_prefix("cls.");
}

InspirerModel InspirerModel::clone() const { return InspirerModel(config_, params_.clone()); }

void project_features(const InspirerModel& model, ForwardTrace& trace,
                      const AlignmentSpec& spec, Activation activation) {
  const ParamStore& p = model.params();
  for (std::size_t l : spec.layers()) {
    if (l >= trace.layer_states.size()) {
      throw ConfigError("alignment references transformer layer " + std::to_string(l) +
                        " but the trace has " + std::to_string(trace.layer_states.size()));
    }
    const Tensor summary = mean_rows(trace.layer_states[l], trace.content_mask);
    const std::string key = std::string(kProjectionPrefix) + std::to_string(l);
    trace.projected[l] = apply_activation(
        linear(summary, p.at(key + ".w"), p.at(key + ".b")), activation);
  }
}

// ---------------------------------------------------------------------------
// Target

namespace {

ParamStore build_target_params(const TargetConfig& c) {
  ParamStore p;
  p.add("emb.token", {c.vocab_size, c.emb_dim});
  for (std::size_t k : c.filter_sizes) {
    p.add("conv" + std::to_string(k) + ".w", {k * c.emb_dim, c.channels});
    p.add("conv" + std::to_string(k) + ".b", {c.channels});
  }
  p.add("cls.w", {c.pooled_dim(), c.classes});
  p.add("cls.b", {c.classes});
  for (std::size_t k : c.filter_sizes) {
    p.add("proj." + std::to_string(k) + ".w", {c.channels, c.projection_dim});
    p.add("proj." + std::to_string(k) + ".b", {c.projection_dim});
  }
  return p;
}

std::vector<float> target_meta(const TargetConfig& c) {
  return {static_cast<float>(c.channels),
          static_cast<float>(c.emb_dim),
          static_cast<float>(c.vocab_size),
          static_cast<float>(c.classes),
          static_cast<float>(c.projection_dim),
          static_cast<float>(static_cast<int>(c.projection_activation)),
          static_cast<float>(c.dropout)};
}

}  // namespace

TargetModel::TargetModel(const TargetConfig& config, std::uint64_t seed) : config_(config) {
  config_.validate();
  params_ = build_target_params(config_);
  Rng rng(seed);
  for (const auto& e : params_.entries()) {
    Tensor t = e.tensor;
    if (e.name == "emb.token") {
      init_uniform(t, 0.05, rng);
      auto v = t.mutable_values();
      std::fill_n(v.begin() + static_cast<std::size_t>(kPadId) * config_.emb_dim,
                  config_.emb_dim, Real(0));
    } else if (t.rank() == 2) {
      init_xavier(t, t.dim(0), t.dim(1), rng);
    }
  }
}

TargetModel::TargetModel(const TargetConfig& config, ParamStore params)
    : config_(config), params_(std::move(params)) {}

TargetModel TargetModel::from_checkpoint(const std::vector<CheckpointEntry>& entries) {
  if (checkpoint_kind(entries) != "target") {
    throw DataError("checkpoint does not hold a target model");
  }
  const auto& m = find_entry(entries, "meta.config").values;
  if (m.size() != 7) throw DataError("target checkpoint: malformed meta.config");
  TargetConfig c;
  c.filter_sizes.clear();
  for (float k : find_entry(entries, "meta.filter_sizes").values) {
    c.filter_sizes.push_back(as_count(k));
  }
  c.channels = as_count(m[0]);
  c.emb_dim = as_count(m[1]);
  c.vocab_size = as_count(m[2]);
  c.classes = as_count(m[3]);
  c.projection_dim = as_count(m[4]);
  const int act = static_cast<int>(std::lround(m[5]));
  if (act < 0 || act > 2) throw DataError("target checkpoint: bad activation code");
  c.projection_activation = static_cast<Activation>(act);
  c.dropout = as_rate(m[6]);
  c.validate();
  ParamStore p = build_target_params(c);
  p.load(entries);
  return TargetModel(c, std::move(p));
}

TargetModel TargetModel::load(const std::filesystem::path& path) {
  return from_checkpoint(read_checkpoint(path));
}

std::vector<CheckpointEntry> TargetModel::to_checkpoint() const {
  std::vector<float> sizes;
  for (std::size_t k : config_.filter_sizes) sizes.push_back(static_cast<float>(k));
  return with_meta(params_.to_checkpoint(), kTargetKind, target_meta(config_), sizes);
}

void TargetModel::save(const std::filesystem::path& path) const {
  write_checkpoint(path, to_checkpoint());
}

void TargetModel::set_embeddings(std::span<const Real> table) {
  Tensor emb = params_.at("emb.token");
  auto dst = emb.mutable_values();
  if (table.size() != dst.size()) {
    throw DimensionError("embedding table has " + std::to_string(table.size()) +
                      " values, model expects " + std::to_string(dst.size()));
  }
  std::copy(table.begin(), table.end(), dst.begin());
  std::fill_n(dst.begin() + static_cast<std::size_t>(kPadId) * config_.emb_dim,
              config_.emb_dim, Real(0));
}

std::vector<ConvFilterBank> TargetModel::banks() const {
  std::vector<ConvFilterBank> out;
  for (std::size_t k : config_.filter_sizes) {
    out.push_back({k, params_.at("conv" + std::to_string(k) + ".w"),
                   params_.at("conv" + std::to_string(k) + ".b")});
  }
  return out;
}

ForwardTrace TargetModel::forward(std::span<const TokenId> tokens, Mode mode,
                                  Rng* rng) const {
  const bool train = mode == Mode::kTrain && rng != nullptr && config_.dropout > 0.0;
  ForwardTrace trace;
  const Tensor emb = embedding_lookup(params_.at("emb.token"), tokens, kPadId);
  const auto bank_list = banks();
  const std::vector<Tensor> maps = conv1d_bank(emb, bank_list);
  std::vector<Tensor> pooled;
  for (std::size_t i = 0; i < bank_list.size(); ++i) {
    const std::size_t k = bank_list[i].width;
    trace.feature_maps[k] = maps[i];
    trace.pooled_by_size[k] = relu(maxpool_over_time(maps[i]));
    pooled.push_back(trace.pooled_by_size[k]);
  }
  trace.pooled = pooled.size() == 1 ? pooled[0] : concat(pooled);
  Tensor c = trace.pooled;
  if (train) c = dropout(c, static_cast<Real>(config_.dropout), *rng);
  trace.logits = linear(c, params_.at("cls.w"), params_.at("cls.b"));
  return trace;
}

TargetModel TargetModel::clone() const { return TargetModel(config_, params_.clone()); }

void project_features(const TargetModel& model, ForwardTrace& trace,
                      const AlignmentSpec& spec, Activation activation) {
  const ParamStore& p = model.params();
  for (std::size_t k : spec.filter_sizes()) {
    const auto it = trace.pooled_by_size.find(k);
    if (it == trace.pooled_by_size.end()) {
      throw ConfigError("alignment references filter size " + std::to_string(k) +
                        " which the target network does not have");
    }
    const std::string key = std::string(kProjectionPrefix) + std::to_string(k);
    trace.projected[k] =
        apply_activation(linear(it->second, p.at(key + ".w"), p.at(key + ".b")), activation);
  }
}

std::string checkpoint_kind(const std::vector<CheckpointEntry>& entries) {
  const auto& kind = find_entry(entries, "meta.kind").values;
  if (kind.size() != 1) throw DataError("checkpoint: malformed meta.kind");
  if (kind[0] == kInspirerKind) return "inspirer";
  if (kind[0] == kTargetKind) return "target";
  throw DataError("checkpoint: unknown model kind");
}

}  // namespace textdistill
