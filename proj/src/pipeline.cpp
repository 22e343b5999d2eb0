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

#include "textdistill/pipeline.hpp"

#include <cctype>
#include <chrono>
#include <cmath>

#include "textdistill/errors.hpp"
#include "textdistill/optim.hpp"

namespace textdistill {

namespace {

constexpr std::uint64_t kInspirerInit = 101;
constexpr std::uint64_t kTargetInit = 102;
constexpr std::uint64_t kInspirerBatches = 103;
constexpr std::uint64_t kTargetBatches = 104;
constexpr std::uint64_t kInspirerDropout = 105;
constexpr std::uint64_t kTargetDropout = 106;
constexpr std::uint64_t kEmbeddingInit = 107;

constexpr const char* kInspirerCheckpoint = "inspirer.ckpt";
constexpr const char* kTargetCheckpoint = "target.ckpt";

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

int argmax(const Tensor& logits) {
  const auto v = logits.values();
  std::size_t best = 0;
  for (std::size_t c = 1; c < v.size(); ++c) {
    if (v[c] > v[best]) best = c;
  }
  return static_cast<int>(best);
}

void check_finite(const ObjectiveResult& r, const char* phase, std::size_t step) {
  if (!std::isfinite(r.loss.item()) || !std::isfinite(r.breakdown.total)) {
    throw NumericError(std::string(phase) + " training diverged: non-finite loss at step " +
                       std::to_string(step));
  }
}

// Runs one optimization step, tagging numeric failures with their location.
template <typename Step>
ObjectiveResult run_step(const char* phase, std::size_t step, Step&& body) {
  try {
    return body();
  } catch (const NumericError& e) {
    const std::string what = e.what();
    if (what.find(" at step ") != std::string::npos) throw;
    throw NumericError(std::string(phase) + " training diverged at step " + std::to_string(step) +
                       ": " + what);
  }
}

TfidfTable maybe_tfidf(const RunConfig& config, const DatasetBundle& bundle) {
  if (config.augment.kind != AugmentKind::kTfidfReplace) return {};
  std::vector<TokenSeq> corpus;
  for (const auto& e : bundle.labeled) corpus.push_back(e.tokens);
  for (const auto& u : bundle.unlabeled) corpus.push_back(u);
  return build_tfidf_table(corpus, bundle.vocab.size());
}

void require_bound(const RunConfig& config, const DatasetBundle& bundle) {
  if (config.inspirer.vocab_size != bundle.vocab.size() ||
      config.target.vocab_size != bundle.vocab.size() ||
      config.inspirer.classes != bundle.classes || config.target.classes != bundle.classes) {
    throw ConfigError("configuration is not bound to this dataset (vocabulary or class count)");
  }
}

nlohmann::ordered_json step_json(const StepRecord& r) {
  nlohmann::ordered_json j;
  j["type"] = "step";
  j["phase"] = r.phase;
  j["step"] = r.step;
  j["epoch"] = r.epoch;
  j["eta"] = r.eta;
  j["tsa_masked"] = r.tsa_masked;
  for (const auto& [name, v] : r.losses.fields()) j[name] = v;
  return j;
}

struct RunFiles {
  std::optional<std::filesystem::path> dir;
  MetricsWriter metrics;

  explicit RunFiles(const std::optional<std::filesystem::path>& out_dir) : dir(out_dir) {
    if (!dir) return;
    std::filesystem::create_directories(*dir);
    metrics = MetricsWriter(*dir / "metrics.jsonl");
  }

  void finish(const std::string& phase, const RunConfig& config, const DatasetBundle& bundle,
              const RunMetrics& m, const std::string& checkpoint) {
    if (!dir) return;
    metrics.write_final(phase, m);
    bundle.vocab.save(*dir / "vocab.txt");
    nlohmann::ordered_json manifest;
    manifest["phase"] = phase;
    manifest["seed"] = config.seed;
    manifest["checkpoint"] = checkpoint;
    manifest["vocab"] = "vocab.txt";
    manifest["metrics"] = "metrics.jsonl";
    manifest["data"] = {{"labeled", bundle.n()},
                        {"unlabeled", bundle.m()},
                        {"dev", bundle.dev.size()},
                        {"test", bundle.test.size()},
                        {"classes", bundle.classes},
                        {"vocab_size", bundle.vocab.size()}};
    manifest["best_epoch"] = m.best_epoch ? nlohmann::ordered_json(*m.best_epoch) : nullptr;
    manifest["best_dev_accuracy"] = m.best_dev_accuracy;
    manifest["test_accuracy"] = m.test_accuracy;
    manifest["config"] = to_json(config);
    std::ofstream(*dir / "manifest.json") << manifest.dump(2) << '\n';
    nlohmann::ordered_json timing;
    for (const auto& [name, s] : m.seconds) timing[name] = s;
    std::ofstream(*dir / "timing.json") << timing.dump(2) << '\n';
  }
};

// Tracks the best-dev model across epochs. Without a dev split the latest
// epoch wins.
template <typename Model>
class BestKeeper {
 public:
  explicit BestKeeper(const Model& init) : best_(init.clone()) {}

  void offer(const Model& model, std::size_t epoch, double dev, bool has_dev, RunMetrics& m) {
    if (!has_dev || !m.best_epoch || dev > m.best_dev_accuracy) {
      best_ = model.clone();
      m.best_epoch = epoch;
      m.best_dev_accuracy = dev;
    }
  }
  Model take() { return std::move(best_); }

 private:
  Model best_;
};

}  // namespace

// ---------------------------------------------------------------------------
// Metrics

MetricsWriter::MetricsWriter(const std::filesystem::path& path)
    : out_(std::make_unique<std::ofstream>(path, std::ios::binary | std::ios::trunc)) {
  if (!*out_) throw DataError("cannot write " + path.string());
}

void MetricsWriter::emit(const nlohmann::ordered_json& j) {
  if (out_) *out_ << j.dump() << '\n';
}

void MetricsWriter::write(const StepRecord& r) { emit(step_json(r)); }

void MetricsWriter::write(const EpochRecord& r) {
  nlohmann::ordered_json j;
  j["type"] = "epoch";
  j["phase"] = r.phase;
  j["epoch"] = r.epoch;
  j["dev_accuracy"] = r.dev_accuracy;
  emit(j);
}

void MetricsWriter::write_final(const std::string& phase, const RunMetrics& m) {
  nlohmann::ordered_json j;
  j["type"] = "final";
  j["phase"] = phase;
  j["best_epoch"] = m.best_epoch ? nlohmann::ordered_json(*m.best_epoch) : nullptr;
  j["best_dev_accuracy"] = m.best_dev_accuracy;
  j["test_accuracy"] = m.test_accuracy;
  emit(j);
}

// ---------------------------------------------------------------------------
// Evaluation

TokenSeq pad_for_target(const TokenSeq& tokens, const TargetConfig& config) {
  TokenSeq out = tokens;
  if (out.size() < config.widest_filter()) out.resize(config.widest_filter(), kPadId);
  return out;
}

std::vector<int> predict(const TargetModel& model, const std::vector<TokenSeq>& inputs) {
  NoGradGuard no_grad;
  std::vector<int> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) {
    out.push_back(argmax(model.forward(pad_for_target(x, model.config()), Mode::kEval).logits));
  }
  return out;
}

std::vector<int> predict(const InspirerModel& model, const std::vector<TokenSeq>& inputs) {
  NoGradGuard no_grad;
  std::vector<int> out;
  out.reserve(inputs.size());
  for (const auto& x : inputs) out.push_back(argmax(model.forward(x, Mode::kEval).logits));
  return out;
}

namespace {

template <typename Model>
double accuracy(const Model& model, const std::vector<LabeledExample>& split) {
  if (split.empty()) throw PreconditionError("evaluate: empty split");
  std::vector<TokenSeq> inputs;
  inputs.reserve(split.size());
  for (const auto& e : split) inputs.push_back(e.tokens);
  const auto pred = predict(model, inputs);
  std::size_t correct = 0;
  for (std::size_t i = 0; i < split.size(); ++i) correct += pred[i] == split[i].label ? 1 : 0;
  return static_cast<double>(correct) / static_cast<double>(split.size());
}

}  // namespace

double evaluate(const InspirerModel& model, const std::vector<LabeledExample>& split) {
  return accuracy(model, split);
}

double evaluate(const TargetModel& model, const std::vector<LabeledExample>& split) {
  return accuracy(model, split);
}

// ---------------------------------------------------------------------------
// Stage 1

InspirerRun train_inspirer(const RunConfig& config, const DatasetBundle& bundle,
                           const std::optional<std::filesystem::path>& out_dir) {
  const auto start = Clock::now();
  config.validate();
  require_bound(config, bundle);
  if (bundle.unlabeled.empty()) throw DataError("inspirer training needs unlabeled data");

  InspirerModel model(config.inspirer, derive_seed(config.seed, {kInspirerInit}));
  // Projection heads only serve stage 2, where the inspirer is frozen.
  for (Tensor t : model.params().tensors_with_prefix(kProjectionPrefix)) t.set_requires_grad(false);
  Adam optimizer;
  optimizer.add_group(model.encoder_parameters(), config.train.inspirer_encoder_lr);
  optimizer.add_group(model.head_parameters(), config.train.inspirer_head_lr);

  const TfidfTable tfidf = maybe_tfidf(config, bundle);
  BatchOptions options;
  options.labeled_batch = config.train.labeled_batch;
  options.unsup_ratio = config.train.unsup_ratio;
  options.use_unlabeled = true;
  const std::size_t bu = options.labeled_batch * options.unsup_ratio;
  const std::size_t steps_per_epoch =
      std::max((bundle.n() + options.labeled_batch - 1) / options.labeled_batch,
               (bundle.m() + bu - 1) / bu);
  TsaSchedule schedule{config.train.tsa, config.train.inspirer_epochs * steps_per_epoch,
                       bundle.classes};

  RunFiles files(out_dir);
  RunMetrics metrics;
  BestKeeper<InspirerModel> best(model);
  Rng dropout_rng(derive_seed(config.seed, {kInspirerDropout}));
  const std::uint64_t batch_seed = derive_seed(config.seed, {kInspirerBatches});
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.train.inspirer_epochs; ++epoch) {
    const auto batches =
        make_batches(bundle, options, config.augment,
                     config.augment.kind == AugmentKind::kTfidfReplace ? &tfidf : nullptr,
                     batch_seed, epoch);
    for (const auto& b : batches) {
      const ObjectiveResult r = run_step("inspirer", step, [&] {
        optimizer.zero_grad();
        ObjectiveResult o =
            inspirer_objective(model, b.labeled, b.unlabeled, schedule, step, dropout_rng);
        check_finite(o, "inspirer", step);
        o.loss.backward();
        optimizer.step();
        return o;
      });
      StepRecord rec{"inspirer", step, epoch, r.tsa_threshold, r.tsa_masked, r.breakdown};
      files.metrics.write(rec);
      metrics.steps.push_back(std::move(rec));
      ++step;
    }
    optimizer.zero_grad();
    const bool has_dev = !bundle.dev.empty();
    const double dev = has_dev ? evaluate(model, bundle.dev) : 0.0;
    EpochRecord er{"inspirer", epoch, dev};
    files.metrics.write(er);
    metrics.epochs.push_back(er);
    best.offer(model, epoch, dev, has_dev, metrics);
  }

  InspirerModel chosen = best.take();
  if (!bundle.test.empty()) metrics.test_accuracy = evaluate(chosen, bundle.test);
  metrics.seconds["train_inspirer"] = seconds_since(start);
  if (out_dir) chosen.save(*out_dir / kInspirerCheckpoint);
  files.finish("inspirer", config, bundle, metrics, kInspirerCheckpoint);
  return {std::move(chosen), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Stage 2

namespace {

TargetModel init_target(const RunConfig& config, const DatasetBundle& bundle) {
  TargetModel model(config.target, derive_seed(config.seed, {kTargetInit}));
  if (!config.data.embeddings.empty()) {
    model.set_embeddings(load_embeddings(config.data.embeddings, bundle.vocab,
                                         config.target.emb_dim,
                                         derive_seed(config.seed, {kEmbeddingInit})));
  }
  return model;
}

BatchOptions target_batches(const RunConfig& config, bool use_unlabeled) {
  BatchOptions o;
  o.labeled_batch = config.train.labeled_batch;
  o.unsup_ratio = config.train.unsup_ratio;
  o.use_unlabeled = use_unlabeled;
  o.min_len = config.target.widest_filter();
  return o;
}

void check_teacher(const RunConfig& config, const InspirerModel& teacher,
                   const TargetLossOptions& options) {
  const InspirerConfig& t = teacher.config();
  if (t.vocab_size != config.target.vocab_size || t.classes != config.target.classes) {
    throw ConfigError("inspirer checkpoint does not match the data (vocabulary or classes)");
  }
  if (t.projection_dim != config.target.projection_dim) {
    throw ConfigError("inspirer and target projection sizes differ");
  }
  if (options.feature_distill) options.alignment.validate(t.layers, config.target.filter_sizes);
}

}  // namespace

TargetRun distill_target(const RunConfig& config, const InspirerModel& teacher,
                         const DatasetBundle& bundle,
                         const std::optional<std::filesystem::path>& out_dir) {
  const auto start = Clock::now();
  config.validate();
  require_bound(config, bundle);
  const TargetLossOptions options = config.loss_options();
  check_teacher(config, teacher, options);

  TargetModel model = init_target(config, bundle);
  Adam optimizer;
  optimizer.add_group(model.params().tensors(), config.train.target_lr);

  const TfidfTable tfidf = maybe_tfidf(config, bundle);
  const BatchOptions batch_options = target_batches(config, options.uses_unlabeled());
  const Activation activation = config.target.projection_activation;

  RunFiles files(out_dir);
  RunMetrics metrics;
  BestKeeper<TargetModel> best(model);
  Rng dropout_rng(derive_seed(config.seed, {kTargetDropout}));
  const std::uint64_t batch_seed = derive_seed(config.seed, {kTargetBatches});
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.train.target_epochs; ++epoch) {
    const auto batches =
        make_batches(bundle, batch_options, config.augment,
                     config.augment.kind == AugmentKind::kTfidfReplace ? &tfidf : nullptr,
                     batch_seed, epoch);
    for (const auto& b : batches) {
      const ObjectiveResult r = run_step("target", step, [&] {
        optimizer.zero_grad();
        const TeacherSignals ts =
            teacher_signals(teacher, b.labeled, b.unlabeled, options, activation);
        const StudentSignals ss =
            student_signals(model, b.labeled, b.unlabeled, options, dropout_rng);
        ObjectiveResult o = target_objective(b.labeled.labels, ts, ss, options);
        check_finite(o, "target", step);
        o.loss.backward();
        optimizer.step();
        return o;
      });
      StepRecord rec{"target", step, epoch, 1.0, 0, r.breakdown};
      files.metrics.write(rec);
      metrics.steps.push_back(std::move(rec));
      ++step;
    }
    optimizer.zero_grad();
    const bool has_dev = !bundle.dev.empty();
    const double dev = has_dev ? evaluate(model, bundle.dev) : 0.0;
    EpochRecord er{"target", epoch, dev};
    files.metrics.write(er);
    metrics.epochs.push_back(er);
    best.offer(model, epoch, dev, has_dev, metrics);
  }

  TargetModel chosen = best.take();
  if (!bundle.test.empty()) metrics.test_accuracy = evaluate(chosen, bundle.test);
  metrics.seconds["distill"] = seconds_since(start);
  if (out_dir) chosen.save(*out_dir / kTargetCheckpoint);
  files.finish("distill", config, bundle, metrics, kTargetCheckpoint);
  return {std::move(chosen), std::move(metrics)};
}

TargetRun train_supervised(const RunConfig& config, const DatasetBundle& bundle,
                           const std::optional<std::filesystem::path>& out_dir) {
  const auto start = Clock::now();
  config.validate();
  require_bound(config, bundle);

  TargetModel model = init_target(config, bundle);
  Adam optimizer;
  optimizer.add_group(model.params().tensors(), config.train.target_lr);
  const BatchOptions batch_options = target_batches(config, false);

  RunFiles files(out_dir);
  RunMetrics metrics;
  BestKeeper<TargetModel> best(model);
  Rng dropout_rng(derive_seed(config.seed, {kTargetDropout}));
  const std::uint64_t batch_seed = derive_seed(config.seed, {kTargetBatches});
  std::size_t step = 0;
  for (std::size_t epoch = 0; epoch < config.train.supervised_epochs; ++epoch) {
    const auto batches = make_batches(bundle, batch_options, config.augment, nullptr, batch_seed, epoch);
    for (const auto& b : batches) {
      const ObjectiveResult r = run_step("supervised", step, [&] {
        optimizer.zero_grad();
        std::vector<Tensor> rows;
        for (const auto& x : b.labeled.tokens) {
          rows.push_back(model.forward(x, Mode::kTrain, &dropout_rng).logits);
        }
        ObjectiveResult o;
        o.loss = nll_loss(log_softmax(stack_rows(rows)), b.labeled.labels);
        o.breakdown.l_ce = static_cast<double>(o.loss.item());
        o.breakdown.total = o.breakdown.component_sum();
        check_finite(o, "supervised", step);
        o.loss.backward();
        optimizer.step();
        return o;
      });
      StepRecord rec{"supervised", step, epoch, 1.0, 0, r.breakdown};
      files.metrics.write(rec);
      metrics.steps.push_back(std::move(rec));
      ++step;
    }
    optimizer.zero_grad();
    const bool has_dev = !bundle.dev.empty();
    const double dev = has_dev ? evaluate(model, bundle.dev) : 0.0;
    EpochRecord er{"supervised", epoch, dev};
    files.metrics.write(er);
    metrics.epochs.push_back(er);
    best.offer(model, epoch, dev, has_dev, metrics);
  }

  TargetModel chosen = best.take();
  if (!bundle.test.empty()) metrics.test_accuracy = evaluate(chosen, bundle.test);
  metrics.seconds["train_supervised"] = seconds_since(start);
  if (out_dir) chosen.save(*out_dir / kTargetCheckpoint);
  files.finish("supervised", config, bundle, metrics, kTargetCheckpoint);
  return {std::move(chosen), std::move(metrics)};
}

// ---------------------------------------------------------------------------
// Drivers

RunConfig without_component(const RunConfig& config, const std::string& component) {
  RunConfig c = config;
  if (component == "output_distill") {
    c.distill.output_distill = false;
  } else if (component == "feature_distill") {
    c.distill.feature_distill = false;
  } else if (component == "consistency") {
    c.distill.consistency = false;
  } else {
    throw ConfigError("unknown component \"" + component +
                      "\" (expected output_distill, feature_distill or consistency)");
  }
  return c;
}

namespace {

std::optional<std::filesystem::path> arm_dir(const std::optional<std::filesystem::path>& root,
                                             const std::string& name) {
  if (!root) return std::nullopt;
  std::string safe;
  for (char c : name) safe.push_back(std::isalnum(static_cast<unsigned char>(c)) || c == '_' ? c : '_');
  return *root / safe;
}

}  // namespace

std::vector<ComparisonRow> run_ablation(const RunConfig& config, const InspirerModel& teacher,
                                        const DatasetBundle& bundle,
                                        const std::vector<std::string>& removals,
                                        const std::optional<std::filesystem::path>& out_dir) {
  std::vector<std::pair<std::string, RunConfig>> arms{{"full", config}};
  for (const auto& r : removals) arms.emplace_back("without_" + r, without_component(config, r));
  std::vector<ComparisonRow> rows;
  for (const auto& [name, arm] : arms) {
    const TargetRun run = distill_target(arm, teacher, bundle, arm_dir(out_dir, name));
    rows.push_back({name, run.metrics.best_dev_accuracy, run.metrics.test_accuracy});
  }
  if (out_dir) write_comparison(*out_dir / "ablation.json", rows);
  return rows;
}

std::vector<ComparisonRow> run_alignment_sweep(const RunConfig& config,
                                               const InspirerModel& teacher,
                                               const DatasetBundle& bundle,
                                               const std::vector<AlignmentSpec>& specs,
                                               const std::optional<std::filesystem::path>& out_dir) {
  for (const auto& s : specs) s.validate(teacher.config().layers, config.target.filter_sizes);
  std::vector<ComparisonRow> rows;
  for (const auto& s : specs) {
    RunConfig arm = config;
    arm.distill.alignment = s.str();
    arm.distill.feature_distill = true;
    const TargetRun run = distill_target(arm, teacher, bundle, arm_dir(out_dir, "align_" + s.str()));
    rows.push_back({s.str(), run.metrics.best_dev_accuracy, run.metrics.test_accuracy});
  }
  if (out_dir) write_comparison(*out_dir / "sweep.json", rows);
  return rows;
}

void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& r : rows) {
    j.push_back({{"name", r.name},
                 {"best_dev_accuracy", r.best_dev_accuracy},
                 {"test_accuracy", r.test_accuracy}});
  }
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  out << j.dump(2) << '\n';
}

}  // namespace textdistill
