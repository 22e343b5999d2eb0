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

#include "textdistill/config.hpp"

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <set>
#include <sstream>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

// Reads fields from one JSON object and rejects keys nobody asked for.
class Fields {
 public:
  Fields(const json& j, std::string context) : j_(j), context_(std::move(context)) {
    if (!j_.is_object()) throw ConfigError(context_ + ": expected an object");
  }

  bool has(const char* key) const { return j_.contains(key); }

  const json& raw(const char* key) {
    seen_.insert(key);
    return j_.at(key);
  }

  void read(const char* key, std::size_t& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "a non-negative integer");
    out = v.get<std::size_t>();
  }
  void read(const char* key, std::uint64_t& out, int) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number_integer() || v.get<long long>() < 0) fail(key, "a non-negative integer");
    out = v.get<std::uint64_t>();
  }
  void read(const char* key, double& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_number()) fail(key, "a number");
    out = v.get<double>();
  }
  void read(const char* key, bool& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_boolean()) fail(key, "true or false");
    out = v.get<bool>();
  }
  void read(const char* key, std::string& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_string()) fail(key, "a string");
    out = v.get<std::string>();
  }
  void read(const char* key, std::vector<std::size_t>& out) {
    if (!take(key)) return;
    const json& v = j_.at(key);
    if (!v.is_array()) fail(key, "an array of integers");
    out.clear();
    for (const auto& e : v) {
      if (!e.is_number_integer() || e.get<long long>() < 0) fail(key, "an array of integers");
      out.push_back(e.get<std::size_t>());
    }
  }

  void finish() const {
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (seen_.count(it.key()) == 0) {
        throw ConfigError(context_ + ": unknown key \"" + it.key() + "\"");
      }
    }
  }

 private:
  bool take(const char* key) {
    seen_.insert(key);
    return j_.contains(key);
  }
  [[noreturn]] void fail(const char* key, const char* expected) const {
    throw ConfigError(context_ + "." + key + ": expected " + expected);
  }

  const json& j_;
  std::string context_;
  std::set<std::string> seen_;
};

std::filesystem::path resolve(const std::string& p, const std::filesystem::path& base) {
  if (p.empty()) return {};
  std::filesystem::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path;
}

SyntheticSpec read_synthetic(const json& j, const std::string& context) {
  SyntheticSpec s;
  Fields f(j, context);
  f.read("classes", s.classes);
  f.read("background_words", s.background_words);
  f.read("keywords_per_class", s.keywords_per_class);
  f.read("min_len", s.min_len);
  f.read("max_len", s.max_len);
  f.read("injection_rate", s.injection_rate);
  f.read("label_noise", s.label_noise);
  f.read("labeled", s.labeled);
  f.read("unlabeled", s.unlabeled);
  f.read("dev", s.dev);
  f.read("test", s.test);
  f.read("seed", s.seed, 0);
  f.finish();
  s.validate();
  return s;
}

}  // namespace

void RunConfig::validate() const {
  // Vocabulary size and class count come from the data; check the rest.
  InspirerConfig ins = inspirer;
  TargetConfig tgt = target;
  ins.vocab_size = tgt.vocab_size = std::max<std::size_t>(inspirer.vocab_size, kFirstWordId + 1);
  ins.classes = tgt.classes = std::max<std::size_t>(inspirer.classes, 2);
  ins.validate();
  tgt.validate();
  augment.validate();
  if (inspirer.projection_dim != target.projection_dim) {
    throw ConfigError("inspirer.projection_dim and target.projection_dim must match");
  }
  if (data.max_len < target.widest_filter()) {
    // Sequences are padded up to the widest filter anyway; this only guards
    // against truncating everything below it.
    throw ConfigError("data.max_len is shorter than the widest filter");
  }
  if (train.labeled_batch == 0 || train.unsup_ratio == 0) {
    throw ConfigError("train.labeled_batch and train.unsup_ratio must be positive");
  }
  for (double lr : {train.inspirer_encoder_lr, train.inspirer_head_lr, train.target_lr}) {
    if (!(lr > 0.0)) throw ConfigError("learning rates must be positive");
  }
  alignment().validate(inspirer.layers, target.filter_sizes);
}

AlignmentSpec RunConfig::alignment() const {
  if (distill.alignment.empty()) return AlignmentSpec::monotone(inspirer.layers, target.filter_sizes);
  return AlignmentSpec::parse(distill.alignment);
}

TargetLossOptions RunConfig::loss_options() const {
  TargetLossOptions o;
  o.mode = distill.mode;
  o.output_distill = distill.output_distill;
  o.feature_distill = distill.feature_distill;
  o.consistency = distill.consistency;
  o.alignment = alignment();
  return o;
}

RunConfig parse_run_config(const json& j, const std::filesystem::path& base_dir) {
  RunConfig c;
  Fields top(j, "config");
  top.read("seed", c.seed, 0);

  if (top.has("data")) {
    Fields f(top.raw("data"), "data");
    if (f.has("synthetic")) c.data.synthetic = read_synthetic(f.raw("synthetic"), "data.synthetic");
    std::string dir, train, unlabeled, dev, test, embeddings;
    f.read("dir", dir);
    f.read("train", train);
    f.read("unlabeled", unlabeled);
    f.read("dev", dev);
    f.read("test", test);
    f.read("embeddings", embeddings);
    f.read("classes", c.data.classes);
    f.read("max_len", c.data.max_len);
    f.finish();
    c.data.dir = resolve(dir, base_dir);
    c.data.train = resolve(train, base_dir);
    c.data.unlabeled = resolve(unlabeled, base_dir);
    c.data.dev = resolve(dev, base_dir);
    c.data.test = resolve(test, base_dir);
    c.data.embeddings = resolve(embeddings, base_dir);
  }
  if (top.has("inspirer")) {
    Fields f(top.raw("inspirer"), "inspirer");
    f.read("layers", c.inspirer.layers);
    f.read("hidden", c.inspirer.hidden);
    f.read("heads", c.inspirer.heads);
    f.read("ff_dim", c.inspirer.ff_dim);
    f.read("mlp_hidden", c.inspirer.mlp_hidden);
    f.read("projection_dim", c.inspirer.projection_dim);
    f.read("dropout", c.inspirer.dropout);
    f.finish();
  }
  if (top.has("target")) {
    Fields f(top.raw("target"), "target");
    std::string act = to_string(c.target.projection_activation);
    f.read("filter_sizes", c.target.filter_sizes);
    f.read("channels", c.target.channels);
    f.read("emb_dim", c.target.emb_dim);
    f.read("projection_dim", c.target.projection_dim);
    f.read("projection_activation", act);
    f.read("dropout", c.target.dropout);
    f.finish();
    c.target.projection_activation = parse_activation(act);
  }
  if (top.has("augment")) {
    Fields f(top.raw("augment"), "augment");
    std::string kind = to_string(c.augment.kind);
    f.read("kind", kind);
    f.read("rate", c.augment.rate);
    f.finish();
    c.augment.kind = parse_augment_kind(kind);
  }
  if (top.has("train")) {
    Fields f(top.raw("train"), "train");
    std::string tsa = to_string(c.train.tsa);
    f.read("inspirer_epochs", c.train.inspirer_epochs);
    f.read("target_epochs", c.train.target_epochs);
    f.read("supervised_epochs", c.train.supervised_epochs);
    f.read("labeled_batch", c.train.labeled_batch);
    f.read("unsup_ratio", c.train.unsup_ratio);
    f.read("inspirer_encoder_lr", c.train.inspirer_encoder_lr);
    f.read("inspirer_head_lr", c.train.inspirer_head_lr);
    f.read("target_lr", c.train.target_lr);
    f.read("tsa", tsa);
    f.finish();
    c.train.tsa = parse_tsa_kind(tsa);
  }
  if (top.has("distill")) {
    Fields f(top.raw("distill"), "distill");
    std::string mode = to_string(c.distill.mode);
    f.read("mode", mode);
    f.read("output_distill", c.distill.output_distill);
    f.read("feature_distill", c.distill.feature_distill);
    f.read("consistency", c.distill.consistency);
    f.read("alignment", c.distill.alignment);
    f.finish();
    c.distill.mode = parse_distill_mode(mode);
  }
  top.finish();
  c.inspirer.max_len = c.data.max_len;
  c.validate();
  return c;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  try {
    return json::parse(ss.str());
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": malformed JSON (" + e.what() + ")");
  }
}

RunConfig load_run_config(const std::filesystem::path& path) {
  return parse_run_config(read_json_file(path), path.parent_path());
}

ordered_json to_json(const SyntheticSpec& s) {
  ordered_json j;
  j["classes"] = s.classes;
  j["background_words"] = s.background_words;
  j["keywords_per_class"] = s.keywords_per_class;
  j["min_len"] = s.min_len;
  j["max_len"] = s.max_len;
  j["injection_rate"] = s.injection_rate;
  j["label_noise"] = s.label_noise;
  j["labeled"] = s.labeled;
  j["unlabeled"] = s.unlabeled;
  j["dev"] = s.dev;
  j["test"] = s.test;
  j["seed"] = s.seed;
  return j;
}

ordered_json to_json(const RunConfig& c) {
  ordered_json j;
  j["seed"] = c.seed;
  ordered_json data;
  if (c.data.synthetic) data["synthetic"] = to_json(*c.data.synthetic);
  auto put_path = [&](const char* key, const std::filesystem::path& p) {
    if (!p.empty()) data[key] = p.string();
  };
  put_path("dir", c.data.dir);
  put_path("train", c.data.train);
  put_path("unlabeled", c.data.unlabeled);
  put_path("dev", c.data.dev);
  put_path("test", c.data.test);
  put_path("embeddings", c.data.embeddings);
  data["classes"] = c.data.classes;
  data["max_len"] = c.data.max_len;
  j["data"] = data;

  ordered_json ins;
  ins["layers"] = c.inspirer.layers;
  ins["hidden"] = c.inspirer.hidden;
  ins["heads"] = c.inspirer.heads;
  ins["ff_dim"] = c.inspirer.ff_dim;
  ins["mlp_hidden"] = c.inspirer.mlp_hidden;
  ins["projection_dim"] = c.inspirer.projection_dim;
  ins["dropout"] = c.inspirer.dropout;
  j["inspirer"] = ins;

  ordered_json tgt;
  tgt["filter_sizes"] = c.target.filter_sizes;
  tgt["channels"] = c.target.channels;
  tgt["emb_dim"] = c.target.emb_dim;
  tgt["projection_dim"] = c.target.projection_dim;
  tgt["projection_activation"] = to_string(c.target.projection_activation);
  tgt["dropout"] = c.target.dropout;
  j["target"] = tgt;

  j["augment"] = {{"kind", to_string(c.augment.kind)}, {"rate", c.augment.rate}};

  ordered_json tr;
  tr["inspirer_epochs"] = c.train.inspirer_epochs;
  tr["target_epochs"] = c.train.target_epochs;
  tr["supervised_epochs"] = c.train.supervised_epochs;
  tr["labeled_batch"] = c.train.labeled_batch;
  tr["unsup_ratio"] = c.train.unsup_ratio;
  tr["inspirer_encoder_lr"] = c.train.inspirer_encoder_lr;
  tr["inspirer_head_lr"] = c.train.inspirer_head_lr;
  tr["target_lr"] = c.train.target_lr;
  tr["tsa"] = to_string(c.train.tsa);
  j["train"] = tr;

  ordered_json d;
  d["mode"] = to_string(c.distill.mode);
  d["output_distill"] = c.distill.output_distill;
  d["feature_distill"] = c.distill.feature_distill;
  d["consistency"] = c.distill.consistency;
  d["alignment"] = c.alignment().str();
  j["distill"] = d;
  return j;
}

SyntheticSpec parse_synthetic_spec(const json& j) { return read_synthetic(j, "synthetic spec"); }

SyntheticSpec load_synthetic_spec(const std::filesystem::path& path) {
  return parse_synthetic_spec(read_json_file(path));
}

std::optional<std::uint64_t> seed_from_environment() {
  const char* v = std::getenv("TEXTDISTILL_SEED");
  if (v == nullptr || *v == '\0') return std::nullopt;
  char* end = nullptr;
  const unsigned long long s = std::strtoull(v, &end, 10);
  if (end == v || *end != '\0') throw ConfigError("TEXTDISTILL_SEED must be an unsigned integer");
  return static_cast<std::uint64_t>(s);
}

DatasetBundle load_dataset(const DataConfig& config) {
  if (config.synthetic) return generate_synthetic(*config.synthetic, config.max_len);
  // Explicit paths must exist; files implied by `dir` other than the
  // training file are optional.
  auto read_split = [&](const std::filesystem::path& p, const char* name) {
    if (!p.empty()) return load_jsonl(p);
    if (config.dir.empty()) return std::vector<TextRecord>{};
    const auto implied = config.dir / (std::string(name) + ".jsonl");
    if (!std::filesystem::exists(implied)) return std::vector<TextRecord>{};
    return load_jsonl(implied);
  };
  if (config.train.empty() && (config.dir.empty() || !std::filesystem::exists(config.dir / "train.jsonl"))) {
    throw ConfigError("data: no synthetic spec and no training file");
  }
  TextSplits splits;
  splits.train = read_split(config.train, "train");
  splits.unlabeled = read_split(config.unlabeled, "unlabeled");
  splits.dev = read_split(config.dev, "dev");
  splits.test = read_split(config.test, "test");
  return build_bundle(splits, config.classes, config.max_len);
}

void bind_to_data(RunConfig& config, const DatasetBundle& bundle) {
  config.inspirer.vocab_size = bundle.vocab.size();
  config.target.vocab_size = bundle.vocab.size();
  config.inspirer.classes = bundle.classes;
  config.target.classes = bundle.classes;
  config.inspirer.max_len = config.data.max_len;
}

}  // namespace textdistill
