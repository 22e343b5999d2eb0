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
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "json.hpp"
#include "textdistill/alignment.hpp"
#include "textdistill/augmentation.hpp"
#include "textdistill/data.hpp"
#include "textdistill/losses.hpp"
#include "textdistill/models.hpp"

namespace textdistill {

struct DataConfig {
  // Either a synthetic corpus generated in memory or JSONL files. `dir`
  // expands to dir/{train,unlabeled,dev,test}.jsonl; explicit paths win.
  std::optional<SyntheticSpec> synthetic;
  std::filesystem::path dir;
  std::filesystem::path train;
  std::filesystem::path unlabeled;
  std::filesystem::path dev;
  std::filesystem::path test;
  std::filesystem::path embeddings;  // optional word-vector file for the target
  std::size_t classes = 0;           // 0: infer from labels
  std::size_t max_len = 64;
};

struct TrainConfig {
  std::size_t inspirer_epochs = 10;
  std::size_t target_epochs = 10;
  // The labeled-only baseline sees far fewer steps per epoch.
  std::size_t supervised_epochs = 10;
  std::size_t labeled_batch = 4;
  std::size_t unsup_ratio = 3;
  double inspirer_encoder_lr = 1e-3;
  double inspirer_head_lr = 1e-3;
  double target_lr = 1e-3;
  TsaKind tsa = TsaKind::kLinear;
};

struct DistillConfig {
  DistillMode mode = DistillMode::kSoft;
  bool output_distill = true;
  bool feature_distill = true;
  bool consistency = true;
  // Empty: monotone pairing of all layers with all filter sizes.
  std::string alignment;
};

struct RunConfig {
  std::uint64_t seed = 1;
  DataConfig data;
  InspirerConfig inspirer;
  TargetConfig target;
  AugmentPolicy augment;
  TrainConfig train;
  DistillConfig distill;

  void validate() const;
  AlignmentSpec alignment() const;
  TargetLossOptions loss_options() const;
};

// Unknown keys and wrongly typed values raise ConfigError. Relative data
// paths are resolved against `base_dir`.
RunConfig parse_run_config(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
RunConfig load_run_config(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const RunConfig& config);

SyntheticSpec parse_synthetic_spec(const nlohmann::json& j);
SyntheticSpec load_synthetic_spec(const std::filesystem::path& path);
nlohmann::ordered_json to_json(const SyntheticSpec& spec);

nlohmann::json read_json_file(const std::filesystem::path& path);

// Seed override from the TEXTDISTILL_SEED environment variable, if set.
std::optional<std::uint64_t> seed_from_environment();

// Loads or generates the data described by the config.
DatasetBundle load_dataset(const DataConfig& config);

// Fills vocabulary size, class count and max length from the data.
void bind_to_data(RunConfig& config, const DatasetBundle& bundle);

}  // namespace textdistill
