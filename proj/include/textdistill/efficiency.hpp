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
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "textdistill/batch.hpp"
#include "textdistill/models.hpp"

namespace textdistill {

// Counting rule used throughout: one multiply-add is 2 FLOPs; only matrix
// products and convolutions enter the headline number. Softmax, layer norm,
// activations, bias adds and dropout are itemized separately.
inline constexpr const char* kFlopRule =
    "multiply-add = 2 FLOPs; headline counts matrix products and convolutions "
    "(attention projections, attention scores and mixing, feed-forward, "
    "convolution banks, classifier heads); softmax, normalization, activations "
    "and bias adds are itemized separately as elementwise operations";

// Inference parameters (embeddings, encoder, classifier). Projection heads
// used only for feature distillation are excluded; see projection_params.
std::size_t count_params(const InspirerConfig& config);
std::size_t count_params(const TargetConfig& config);
std::size_t projection_params(const InspirerConfig& config);
std::size_t projection_params(const TargetConfig& config);

struct FlopEstimate {
  std::uint64_t total = 0;                        // headline
  std::map<std::string, std::uint64_t> breakdown;  // sums to total
};

FlopEstimate estimate_flops(const InspirerConfig& config, std::size_t seq_len);
FlopEstimate estimate_flops(const TargetConfig& config, std::size_t seq_len);

struct LatencyStats {
  double mean_seconds = 0;
  double stddev_seconds = 0;
  std::size_t trials = 0;
};

// Times `run` over the probe set. `warmup` passes are discarded; each trial
// covers the whole set and contributes seconds per example.
LatencyStats benchmark(const std::function<void(const TokenSeq&)>& run,
                       const std::vector<TokenSeq>& probes, std::size_t trials,
                       std::size_t warmup = 2);
LatencyStats benchmark_inference(const InspirerModel& model, const std::vector<TokenSeq>& probes,
                                 std::size_t trials);
LatencyStats benchmark_inference(const TargetModel& model, const std::vector<TokenSeq>& probes,
                                 std::size_t trials);

struct CostReport {
  std::string model;
  std::size_t params = 0;
  std::size_t projection_params = 0;
  std::size_t seq_len = 0;
  FlopEstimate flops;
  std::uint64_t elementwise_ops = 0;  // measured on one forward pass
  LatencyStats latency;
  std::optional<double> speedup;  // baseline latency / this latency
  std::string baseline;

  nlohmann::ordered_json to_json() const;
  static CostReport from_json(const nlohmann::json& j);
};

double speedup(const LatencyStats& baseline, const LatencyStats& candidate);

// Random probe sequences of exactly seq_len tokens ([CLS] then word ids).
std::vector<TokenSeq> random_probes(std::size_t count, std::size_t seq_len,
                                    std::size_t vocab_size, std::uint64_t seed);

CostReport cost_report(const InspirerModel& model, std::size_t seq_len, std::size_t trials,
                       std::uint64_t seed);
CostReport cost_report(const TargetModel& model, std::size_t seq_len, std::size_t trials,
                       std::uint64_t seed);

// Paper-scale configurations: a BERT-base sized encoder at 256 tokens and the
// six-size, 200-channel TextCNN over 300-d embeddings.
InspirerConfig full_scale_inspirer();
TargetConfig full_scale_target();

}  // namespace textdistill
