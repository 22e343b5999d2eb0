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

// Finite-difference checks for every differentiable op. Built twice: against
// the 32-bit library and against the 64-bit verification build.

#include <gtest/gtest.h>

#include "gradcheck.hpp"
#include "textdistill/ops.hpp"

namespace textdistill {
namespace {

using testing::grad_check;
using testing::kGradTolerance;
using testing::random_tensor;

using Fn = std::function<Tensor(const std::vector<Tensor>&)>;

constexpr int kInstances = 3;

void expect_grad_ok(const Fn& f, std::vector<Tensor> inputs, std::uint64_t seed) {
  const auto r = grad_check(f, std::move(inputs), seed);
  EXPECT_LE(r.max_relative_error, kGradTolerance) << r.worst_input;
}

// Values bounded away from zero so kinked ops stay differentiable under the
// finite-difference step.
Tensor away_from_zero(Shape shape, Rng& rng) {
  std::vector<Real> v(shape_numel(shape));
  for (Real& x : v) {
    const double mag = uniform(rng, 0.1, 1.0);
    x = static_cast<Real>(bernoulli(rng, 0.5) ? mag : -mag);
  }
  return Tensor::from_values(std::move(shape), std::move(v), true);
}

// Distinct values at least 0.1 apart, so argmax never flips under the step.
Tensor spaced(Shape shape, Rng& rng) {
  const std::size_t n = shape_numel(shape);
  std::vector<Real> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<Real>(0.1 * static_cast<double>(i) - 1.0);
  shuffle(v, rng);
  return Tensor::from_values(std::move(shape), std::move(v), true);
}

TEST(GradientTest, Matmul) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(100 + s);
    expect_grad_ok([](const auto& in) { return matmul(in[0], in[1]); },
                   {random_tensor({3, 4}, rng), random_tensor({4, 2}, rng)}, s);
  }
}

TEST(GradientTest, TransposeReshape) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(110 + s);
    expect_grad_ok([](const auto& in) { return transpose(in[0]); }, {random_tensor({3, 5}, rng)}, s);
    expect_grad_ok([](const auto& in) { return reshape(in[0], {5, 3}); },
                   {random_tensor({3, 5}, rng)}, s);
  }
}

TEST(GradientTest, Elementwise) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(120 + s);
    expect_grad_ok([](const auto& in) { return add(in[0], in[1]); },
                   {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return sub(in[0], in[1]); },
                   {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return mul(in[0], in[1]); },
                   {random_tensor({2, 3}, rng), random_tensor({2, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return scale(in[0], Real(-1.7)); },
                   {random_tensor({4}, rng)}, s);
    expect_grad_ok([](const auto& in) { return add_rowwise(in[0], in[1]); },
                   {random_tensor({3, 4}, rng), random_tensor({4}, rng)}, s);
  }
}

TEST(GradientTest, Activations) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(130 + s);
    expect_grad_ok([](const auto& in) { return relu(in[0]); }, {away_from_zero({3, 4}, rng)}, s);
    expect_grad_ok([](const auto& in) { return tanh(in[0]); }, {random_tensor({3, 4}, rng, -2, 2)}, s);
    expect_grad_ok([](const auto& in) { return square(in[0]); }, {random_tensor({5}, rng)}, s);
    expect_grad_ok([](const auto& in) { return log_floor(in[0], Real(1e-8)); },
                   {random_tensor({5}, rng, 0.2, 2.0)}, s);
  }
}

TEST(GradientTest, SoftmaxFamily) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(140 + s);
    expect_grad_ok([](const auto& in) { return softmax(in[0]); }, {random_tensor({4}, rng, -2, 2)}, s);
    expect_grad_ok([](const auto& in) { return softmax(in[0]); },
                   {random_tensor({3, 4}, rng, -2, 2)}, s);
    expect_grad_ok([](const auto& in) { return log_softmax(in[0]); },
                   {random_tensor({3, 4}, rng, -2, 2)}, s);
    expect_grad_ok(
        [](const auto& in) { return masked_softmax(in[0], {true, false, true, true}); },
        {random_tensor({3, 4}, rng, -2, 2)}, s);
  }
}

TEST(GradientTest, Reductions) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(150 + s);
    expect_grad_ok([](const auto& in) { return sum(in[0]); }, {random_tensor({2, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return mean(in[0]); }, {random_tensor({2, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return mean_rows(in[0]); }, {random_tensor({4, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return mean_rows(in[0], {true, false, true, false}); },
                   {random_tensor({4, 3}, rng)}, s);
  }
}

TEST(GradientTest, Indexing) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(160 + s);
    expect_grad_ok([](const auto& in) { return row(in[0], 1); }, {random_tensor({3, 4}, rng)}, s);
    expect_grad_ok([](const auto& in) { return slice_cols(in[0], 1, 3); },
                   {random_tensor({3, 4}, rng)}, s);
    expect_grad_ok([](const auto& in) { return concat_cols({in[0], in[1]}); },
                   {random_tensor({3, 2}, rng), random_tensor({3, 3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return concat({in[0], in[1]}); },
                   {random_tensor({2}, rng), random_tensor({3}, rng)}, s);
    expect_grad_ok([](const auto& in) { return stack_rows({in[0], in[1]}); },
                   {random_tensor({3}, rng), random_tensor({3}, rng)}, s);
    const std::vector<int> labels{2, 0, 1};
    expect_grad_ok([&](const auto& in) { return pick(in[0], labels); },
                   {random_tensor({3, 3}, rng)}, s);
    const std::vector<TokenId> ids{1, 3, 1, 0};
    expect_grad_ok([&](const auto& in) { return embedding_lookup(in[0], ids); },
                   {random_tensor({5, 3}, rng)}, s);
  }
}

TEST(GradientTest, LayerNorm) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(170 + s);
    expect_grad_ok([](const auto& in) { return layer_norm(in[0], in[1], in[2]); },
                   {random_tensor({3, 5}, rng, -2, 2), random_tensor({5}, rng, 0.5, 1.5),
                    random_tensor({5}, rng)},
                   s);
  }
}

TEST(GradientTest, DropoutWithFixedMask) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(180 + s);
    // Re-seeding inside the function keeps the mask identical across calls.
    expect_grad_ok(
        [s](const auto& in) {
          Rng mask_rng(900 + s);
          return dropout(in[0], Real(0.4), mask_rng);
        },
        {random_tensor({4, 3}, rng)}, s);
  }
}

TEST(GradientTest, Conv1d) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(190 + s);
    const std::size_t width = 2 + static_cast<std::size_t>(s);
    expect_grad_ok(
        [width](const auto& in) { return conv1d(in[0], in[1], in[2], width); },
        {random_tensor({6, 3}, rng), random_tensor({width * 3, 4}, rng), random_tensor({4}, rng)},
        s);
  }
}

TEST(GradientTest, MaxPoolOverTime) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(200 + s);
    expect_grad_ok([](const auto& in) { return maxpool_over_time(in[0]); }, {spaced({6, 4}, rng)}, s);
  }
}

TEST(GradientTest, ConvBank) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(210 + s);
    expect_grad_ok(
        [](const auto& in) {
          const auto maps = conv1d_bank(in[0], {{2, in[1], in[2]}, {3, in[3], in[4]}});
          return concat({reshape(maps[0], {maps[0].numel()}), reshape(maps[1], {maps[1].numel()})});
        },
        {random_tensor({5, 2}, rng), random_tensor({4, 3}, rng), random_tensor({3}, rng),
         random_tensor({6, 3}, rng), random_tensor({3}, rng)},
        s);
  }
}

std::vector<Tensor> block_inputs(std::size_t n, std::size_t d, std::size_t ff, Rng& rng) {
  std::vector<Tensor> in{random_tensor({n, d}, rng)};
  // The key bias shifts every score in a row equally, so softmax cancels it
  // and its gradient is identically zero; it is held constant here and
  // covered by KeyBiasGradientVanishes.
  // Wide value weights make the attention mix matter after the residual, so
  // query/key gradients stand well above 32-bit rounding noise.
  for (int i = 0; i < 4; ++i) {
    const double w = i < 2 ? 1.0 : (i == 2 ? 2.0 : 0.7);
    in.push_back(random_tensor({d, d}, rng, -w, w));
    in.push_back(random_tensor({d}, rng, -0.2, 0.2, /*requires_grad=*/i != 1));
  }
  in.push_back(random_tensor({d}, rng, 0.5, 1.5));
  in.push_back(random_tensor({d}, rng, -0.2, 0.2));
  in.push_back(random_tensor({d, ff}, rng, -0.7, 0.7));
  // Biased so every feed-forward ReLU stays on its linear piece.
  in.push_back(random_tensor({ff}, rng, 4.0, 5.0));
  in.push_back(random_tensor({ff, d}, rng, -0.7, 0.7));
  in.push_back(random_tensor({d}, rng, -0.2, 0.2));
  in.push_back(random_tensor({d}, rng, 0.5, 1.5));
  in.push_back(random_tensor({d}, rng, -0.2, 0.2));
  return in;
}

TransformerLayerParams block_params(const std::vector<Tensor>& in) {
  TransformerLayerParams p;
  p.attention = {in[1], in[2], in[3], in[4], in[5], in[6], in[7], in[8]};
  p.ln1_gamma = in[9];
  p.ln1_beta = in[10];
  p.ff1_w = in[11];
  p.ff1_b = in[12];
  p.ff2_w = in[13];
  p.ff2_b = in[14];
  p.ln2_gamma = in[15];
  p.ln2_beta = in[16];
  return p;
}

TEST(GradientTest, MultiHeadAttention) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(220 + s);
    auto in = block_inputs(3, 4, 6, rng);
    in.resize(9);
    expect_grad_ok(
        [](const auto& x) {
          const AttentionParams p{x[1], x[2], x[3], x[4], x[5], x[6], x[7], x[8]};
          return multi_head_attention(x[0], p, 2, {true, true, false});
        },
        in, s);
  }
}

TEST(GradientTest, AttentionBlock) {
  for (int s = 0; s < kInstances; ++s) {
    Rng rng(230 + s);
    expect_grad_ok([](const auto& x) { return attention_block(x[0], block_params(x), 2); },
                   block_inputs(3, 4, 6, rng), s);
  }
}

TEST(GradientTest, AttentionBlockWithKeyMask) {
  Rng rng(240);
  expect_grad_ok(
      [](const auto& x) {
        return attention_block(x[0], block_params(x), 2, {true, true, true, false, false});
      },
      block_inputs(5, 4, 6, rng), 7);
}

TEST(GradientTest, KeyBiasGradientVanishes) {
  Rng rng(250);
  auto in = block_inputs(4, 4, 6, rng);
  in[4].set_requires_grad(true);
  const Tensor out = attention_block(in[0], block_params(in), 2, {true, true, true, false});
  sum(mul(out, random_tensor(out.shape(), rng, -1.0, 1.0, false))).backward();
  for (Real g : in[4].grad()) EXPECT_NEAR(static_cast<double>(g), 0.0, 1e-5);
}

}  // namespace
}  // namespace textdistill
