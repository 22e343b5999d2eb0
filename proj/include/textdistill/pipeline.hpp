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

#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "textdistill/config.hpp"
#include "textdistill/data.hpp"
#include "textdistill/losses.hpp"
#include "textdistill/models.hpp"

namespace textdistill {

struct StepRecord {
  std::string phase;
  std::size_t step = 0;
  std::size_t epoch = 0;
  double eta = 1.0;
  std::size_t tsa_masked = 0;
  LossBreakdown losses;
};

struct EpochRecord {
  std::string phase;
  std::size_t epoch = 0;
  double dev_accuracy = 0;
};

struct RunMetrics {
  std::vector<StepRecord> steps;
  std::vector<EpochRecord> epochs;
  std::optional<std::size_t> best_epoch;  // unset: initialization kept
  double best_dev_accuracy = 0;
  double test_accuracy = 0;
  std::map<std::string, double> seconds;  // wall clock per phase
};

// Line-delimited metrics sink. Records carry no timing so that reruns with
// the same seed write identical bytes.
class MetricsWriter {
 public:
  MetricsWriter() = default;
  explicit MetricsWriter(const std::filesystem::path& path);
  void write(const StepRecord& r);
  void write(const EpochRecord& r);
  void write_final(const std::string& phase, const RunMetrics& m);
  bool active() const { return out_ != nullptr; }

 private:
  void emit(const nlohmann::ordered_json& j);
  std::unique_ptr<std::ofstream> out_;
};

double evaluate(const InspirerModel& model, const std::vector<LabeledExample>& split);
double evaluate(const TargetModel& model, const std::vector<LabeledExample>& split);
std::vector<int> predict(const TargetModel& model, const std::vector<TokenSeq>& inputs);
std::vector<int> predict(const InspirerModel& model, const std::vector<TokenSeq>& inputs);

struct InspirerRun {
  InspirerModel model;
  RunMetrics metrics;
};

struct TargetRun {
  TargetModel model;
  RunMetrics metrics;
};

// `config` must be bound to the bundle (see bind_to_data). When out_dir is
// given, the run directory receives the checkpoint, vocab.txt, metrics.jsonl,
// manifest.json and timing.json.
InspirerRun train_inspirer(const RunConfig& config, const DatasetBundle& bundle,
                           const std::optional<std::filesystem::path>& out_dir = {});
// The teacher stays untouched; it runs in eval mode without gradient.
TargetRun distill_target(const RunConfig& config, const InspirerModel& teacher,
                         const DatasetBundle& bundle,
                         const std::optional<std::filesystem::path>& out_dir = {});
// Cross-entropy only on the labeled pool.
TargetRun train_supervised(const RunConfig& config, const DatasetBundle& bundle,
                           const std::optional<std::filesystem::path>& out_dir = {});

struct ComparisonRow {
  std::string name;
  double best_dev_accuracy = 0;
  double test_accuracy = 0;
};

// Components: "output_distill", "feature_distill", "consistency". The first
// row is the unmodified configuration.
std::vector<ComparisonRow> run_ablation(const RunConfig& config, const InspirerModel& teacher,
                                        const DatasetBundle& bundle,
                                        const std::vector<std::string>& removals,
                                        const std::optional<std::filesystem::path>& out_dir = {});
std::vector<ComparisonRow> run_alignment_sweep(
    const RunConfig& config, const InspirerModel& teacher, const DatasetBundle& bundle,
    const std::vector<AlignmentSpec>& specs,
    const std::optional<std::filesystem::path>& out_dir = {});

// Applies a component removal to a config; unknown names raise ConfigError.
RunConfig without_component(const RunConfig& config, const std::string& component);

void write_comparison(const std::filesystem::path& path, const std::vector<ComparisonRow>& rows);

// Padded copy accepted by the target network.
TokenSeq pad_for_target(const TokenSeq& tokens, const TargetConfig& config);

}  // namespace textdistill
