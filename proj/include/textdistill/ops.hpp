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
#include <span>
#include <vector>

#include "textdistill/rng.hpp"
#include "textdistill/tensor.hpp"

namespace textdistill {

using TokenId = std::int32_t;

// Every op below records a backward rule when grad mode is on and any input
// requires grad. Reductions run sequentially in row-major order so that
// gradients are bitwise reproducible.

// [m x k] * [k x n] -> [m x n]
Tensor matmul(const Tensor& a, const Tensor& b);
Tensor transpose(const Tensor& a);
// Same values in a new shape with equal element count.
Tensor reshape(const Tensor& a, Shape shape);

Tensor add(const Tensor& a, const Tensor& b);
Tensor sub(const Tensor& a, const Tensor& b);
Tensor mul(const Tensor& a, const Tensor& b);
Tensor scale(const Tensor& a, Real factor);
// [m x n] + [n] broadcast over rows.
Tensor add_rowwise(const Tensor& a, const Tensor& row);

Tensor relu(const Tensor& a);
Tensor tanh(const Tensor& a);
Tensor square(const Tensor& a);
// log(max(x, floor)); the gradient is zero where the floor is active.
Tensor log_floor(const Tensor& a, Real floor);

// Over the whole tensor for rank 1, row-wise for rank 2. Max-subtracted.
Tensor softmax(const Tensor& logits);
Tensor log_softmax(const Tensor& logits);
// Row-wise softmax over the columns with keep[j] == true; masked columns get
// probability exactly 0. At least one column must be kept.
Tensor masked_softmax(const Tensor& scores, const std::vector<bool>& keep);

Tensor sum(const Tensor& a);
Tensor mean(const Tensor& a);
// Mean over rows i with keep[i] (all rows when keep is empty): [n x d] -> [d]
Tensor mean_rows(const Tensor& a, const std::vector<bool>& keep = {});

Tensor row(const Tensor& a, std::size_t index);
Tensor slice_cols(const Tensor& a, std::size_t begin, std::size_t end);
Tensor concat_cols(const std::vector<Tensor>& parts);
// Rank-1 concatenation.
Tensor concat(const std::vector<Tensor>& parts);
// Equal-length rank-1 tensors -> [B x d]
Tensor stack_rows(const std::vector<Tensor>& rows);
// out[i] = a[i, labels[i]]
Tensor pick(const Tensor& a, std::span<const int> labels);

// table [V x d], ids -> [n x d]. Rows equal to `frozen_id` receive no
// gradient (pass a negative id to disable).
Tensor embedding_lookup(const Tensor& table, std::span<const TokenId> ids,
                        TokenId frozen_id = -1);
// Row-wise layer normalization with affine gamma/beta of length d.
Tensor layer_norm(const Tensor& x, const Tensor& gamma, const Tensor& beta,
                  Real eps = Real(1e-5));
// Inverted dropout: seeded Bernoulli keep mask scaled by 1/(1-p).
Tensor dropout(const Tensor& x, Real p, Rng& rng);

// Valid 1-D convolution over time. x: [n x d], weight: [(k*d) x channels]
// laid out window-major (row index = offset * d + feature), bias: [channels].
// Result: [(n - k + 1) x channels].
Tensor conv1d(const Tensor& x, const Tensor& weight, const Tensor& bias,
              std::size_t width);

// Per-channel max over time; ties route the gradient to the lowest index.
Tensor maxpool_over_time(const Tensor& feature_map);

struct ConvFilterBank {
  std::size_t width = 0;
  Tensor weight;  // [(width*d) x channels]
  Tensor bias;    // [channels]
};

// One feature map per bank, in bank order.
std::vector<Tensor> conv1d_bank(const Tensor& embeddings,
                                const std::vector<ConvFilterBank>& banks);

struct AttentionParams {
  Tensor wq, bq, wk, bk, wv, bv, wo, bo;  // [d x d] / [d]
};

struct TransformerLayerParams {
  AttentionParams attention;
  Tensor ln1_gamma, ln1_beta;
  Tensor ff1_w, ff1_b;  // [d x ff], [ff]
  Tensor ff2_w, ff2_b;  // [ff x d], [d]
  Tensor ln2_gamma, ln2_beta;
};

// Multi-head scaled dot-product self attention including the output
// projection. key_keep (optional) masks padded keys.
Tensor multi_head_attention(const Tensor& x, const AttentionParams& p,
                            std::size_t heads,
                            const std::vector<bool>& key_keep = {});

// Post-norm encoder layer: LN(x + Drop(MHA(x))) then LN(h + Drop(FFN(h))).
// rng == nullptr disables dropout (eval mode).
Tensor attention_block(const Tensor& x, const TransformerLayerParams& p,
                       std::size_t heads,
                       const std::vector<bool>& key_keep = {},
                       Real dropout_p = Real(0), Rng* rng = nullptr);

// Thread-local operation counter. Multiply-adds inside matmul and conv1d
// count as 2 FLOPs ("mul_add"); element-wise work (activations, softmax,
// normalization, bias adds) is tallied separately as "elementwise".
struct FlopCounts {
  std::uint64_t mul_add = 0;
  std::uint64_t elementwise = 0;
};

class FlopCounter {
 public:
  FlopCounter();
  ~FlopCounter();
  FlopCounter(const FlopCounter&) = delete;
  FlopCounter& operator=(const FlopCounter&) = delete;
  const FlopCounts& counts() const { return counts_; }

 private:
  FlopCounts counts_;
  FlopCounter* previous_;
  friend void count_flops(std::uint64_t, std::uint64_t);
};

void count_flops(std::uint64_t mul_add, std::uint64_t elementwise);

}  // namespace textdistill
