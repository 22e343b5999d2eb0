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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textdistill/alignment.hpp"
#include "textdistill/checkpoint.hpp"
#include "textdistill/ops.hpp"
#include "textdistill/rng.hpp"
#include "textdistill/tensor.hpp"
#include "textdistill/tokens.hpp"

namespace textdistill {

enum class Activation { kNone, kRelu, kTanh };
enum class Mode { kTrain, kEval };

std::string to_string(Activation a);
Activation parse_activation(std::string_view name);
Tensor apply_activation(const Tensor& x, Activation a);

// Transformer "inspirer". Desk-scale defaults.
struct InspirerConfig {
  std::size_t layers = 4;
  std::size_t hidden = 64;
  std::size_t heads = 4;
  std::size_t ff_dim = 128;
  std::size_t vocab_size = 0;
  std::size_t max_len = 64;
  std::size_t classes = 2;
  std::size_t mlp_hidden = 64;
  std::size_t projection_dim = 32;
  double dropout = 0.1;

  void validate() const;
  bool operator==(const InspirerConfig&) const = default;
};

// TextCNN "target".
struct TargetConfig {
  std::vector<std::size_t> filter_sizes = {2, 3, 4, 5};
  std::size_t channels = 16;
  std::size_t emb_dim = 32;
  std::size_t vocab_size = 0;
  std::size_t classes = 2;
  std::size_t projection_dim = 32;
  Activation projection_activation = Activation::kRelu;
  double dropout = 0.5;

  void validate() const;
  std::size_t widest_filter() const;
  // Length of the concatenated pooled vector c.
  std::size_t pooled_dim() const { return channels * filter_sizes.size(); }
  bool operator==(const TargetConfig&) const = default;
};

// Named, ordered parameter tensors. Insertion order fixes checkpoint layout
// and optimizer traversal order.
class ParamStore {
 public:
  struct Entry {
    std::string name;
    Tensor tensor;
  };

  Tensor add(std::string name, Shape shape);
  const Tensor& at(std::string_view name) const;
  bool contains(std::string_view name) const;
  const std::vector<Entry>& entries() const { return entries_; }

  std::vector<Tensor> tensors() const;
  std::vector<Tensor> tensors_with_prefix(std::string_view prefix) const;
  std::size_t numel() const;
  std::size_t numel_excluding_prefix(std::string_view prefix) const;

  ParamStore clone() const;
  void set_requires_grad(bool on);
  void zero_grad();
  bool bitwise_equal(const ParamStore& other) const;

  std::vector<CheckpointEntry> to_checkpoint() const;
  // Copies values for every stored name from `entries`; shapes must match.
  void load(const std::vector<CheckpointEntry>& entries);

 private:
  std::vector<Entry> entries_;
};

// Everything one forward pass exposes. Inspirer traces fill layer_states
// and content_mask; target traces fill feature_maps and pooled_by_size.
// `projected` is filled by project_features, keyed by layer index
// (inspirer) or filter size (target).
struct ForwardTrace {
  Tensor logits;                              // [C]
  Tensor pooled;                              // h (inspirer) or c (target)
  std::vector<Tensor> layer_states;           // L x [n x d]
  std::vector<bool> content_mask;             // non-pad positions
  std::map<std::size_t, Tensor> feature_maps;    // k -> [(n-k+1) x ch]
  std::map<std::size_t, Tensor> pooled_by_size;  // k -> [ch]
  std::map<std::size_t, Tensor> projected;       // key -> [projection_dim]
};

// Parameter-name prefix of the feature projections. They are training-time
// auxiliaries and are excluded from inference parameter counts.
inline constexpr std::string_view kProjectionPrefix = "proj.";

class InspirerModel {
 public:
  InspirerModel(const InspirerConfig& config, std::uint64_t seed);

  static InspirerModel from_checkpoint(const std::vector<CheckpointEntry>& entries);
  static InspirerModel load(const std::filesystem::path& path);
  std::vector<CheckpointEntry> to_checkpoint() const;
  void save(const std::filesystem::path& path) const;

  // tokens[0] must be the classification token; pad ids are masked out of
  // attention. rng is consulted for dropout in train mode only.
  ForwardTrace forward(std::span<const TokenId> tokens, Mode mode,
                       Rng* rng = nullptr) const;

  const InspirerConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  std::vector<Tensor> encoder_parameters() const;
  std::vector<Tensor> head_parameters() const;
  InspirerModel clone() const;

 private:
  InspirerModel(const InspirerConfig& config, ParamStore params);
  TransformerLayerParams layer(std::size_t l) const;

  InspirerConfig config_;
  ParamStore params_;
};

class TargetModel {
 public:
  TargetModel(const TargetConfig& config, std::uint64_t seed);

  static TargetModel from_checkpoint(const std::vector<CheckpointEntry>& entries);
  static TargetModel load(const std::filesystem::path& path);
  std::vector<CheckpointEntry> to_checkpoint() const;
  void save(const std::filesystem::path& path) const;

  // tokens must be at least widest_filter() long (pad beforehand).
  ForwardTrace forward(std::span<const TokenId> tokens, Mode mode,
                       Rng* rng = nullptr) const;

  // Overwrites rows of the embedding table (e.g. from pretrained vectors).
  // The pad row is forced to zero.
  void set_embeddings(std::span<const Real> table);

  const TargetConfig& config() const { return config_; }
  ParamStore& params() { return params_; }
  const ParamStore& params() const { return params_; }
  TargetModel clone() const;

 private:
  TargetModel(const TargetConfig& config, ParamStore params);

  TargetConfig config_;
  ParamStore params_;
  std::vector<ConvFilterBank> banks() const;
};

// If^l = act(W_l * mean over content positions of layer l + b_l) for every
// layer named in the alignment.
void project_features(const InspirerModel& model, ForwardTrace& trace,
                      const AlignmentSpec& spec, Activation activation);
// Tf^k = act(W_k * pooled vector of bank k + b_k) for every size in the alignment.
void project_features(const TargetModel& model, ForwardTrace& trace,
                      const AlignmentSpec& spec, Activation activation);

// Reads the model kind stored in a checkpoint: "inspirer" or "target".
std::string checkpoint_kind(const std::vector<CheckpointEntry>& entries);

}  // namespace textdistill
