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


#include <gtest/gtest.h>

#include <cmath>

#include "textdistill/errors.hpp"
#include "textdistill/losses.hpp"
#include "textdistill/tokens.hpp"

namespace textdistill {
namespace {

Tensor random_probs(std::size_t rows, std::size_t cols, Rng& rng, double spread = 3.0) {
  std::vector<Real> v(rows * cols);
  for (Real& x : v) x = static_cast<Real>(uniform(rng, -spread, spread));
  return softmax(Tensor::from_values({rows, cols}, std::move(v)));
}

Tensor one_hot_rows(const std::vector<int>& labels, std::size_t cols) {
  Tensor t = Tensor::zeros({labels.size(), cols});
  for (std::size_t i = 0; i < labels.size(); ++i) {
    t.mutable_values()[i * cols + static_cast<std::size_t>(labels[i])] = Real(1);
  }
  return t;
}

TEST(LossTest, KlOfDistributionWithItselfIsZero) {
  Rng rng(1);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor p = random_probs(4, 3 + trial % 4, rng, 1.0 + trial);
    EXPECT_NEAR(consistency_kl(p, p).item(), 0.0, 1e-7);
  }
  const Tensor one_hot = one_hot_rows({0, 2}, 3);
  EXPECT_NEAR(consistency_kl(one_hot, one_hot).item(), 0.0, 1e-7);
}

TEST(LossTest, AllTermsAreNonNegative) {
  Rng rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor p = random_probs(5, 3, rng, 0.5 + trial);
    const Tensor q = random_probs(5, 3, rng, 0.5 + trial);
    const std::vector<int> y{0, 1, 2, 1, 0};
    EXPECT_GE(consistency_kl(p, q).item(), -1e-7);
    EXPECT_GE(ce_loss(q, y).item(), -1e-7);
    EXPECT_GE(hard_distill(p, q).item(), -1e-7);
    EXPECT_GE(soft_distill(p, q).item(), -1e-7);
    const FeatureMap t{{0, row(p, 0)}}, s{{2, row(q, 0)}};
    EXPECT_GE(feature_distill(t, s, AlignmentSpec::parse("{0}-{2}")).item(), -1e-7);
  }
}

TEST(LossTest, KlByHand) {
  const Tensor p = Tensor::matrix({{0.5, 0.5}});
  const Tensor q = Tensor::matrix({{0.25, 0.75}});
  const double expect = 0.5 * std::log(0.5 / 0.25) + 0.5 * std::log(0.5 / 0.75);
  EXPECT_NEAR(consistency_kl(p, q).item(), expect, 1e-6);
}

TEST(LossTest, HardDistillEqualsCeUnderOneHotTeacher) {
  Rng rng(3);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> y(6);
    for (int& v : y) v = static_cast<int>(uniform_index(rng, 4));
    const Tensor student = random_probs(6, 4, rng);
    EXPECT_NEAR(hard_distill(one_hot_rows(y, 4), student).item(), ce_loss(student, y).item(), 1e-7);
  }
}

TEST(LossTest, CeAndSoftDistillByHand) {
  const Tensor p = Tensor::matrix({{0.2, 0.8}, {0.6, 0.4}});
  const std::vector<int> y{1, 1};
  EXPECT_NEAR(ce_loss(p, y).item(), -(std::log(0.8) + std::log(0.4)) / 2, 1e-6);
  const Tensor zt = Tensor::matrix({{1, 2}, {0, 0}});
  const Tensor zs = Tensor::matrix({{0, 0}, {3, 0}});
  EXPECT_NEAR(soft_distill(zt, zs).item(), (1 + 4 + 9) / 2.0, 1e-6);
}

TEST(LossTest, FeatureDistillAveragesPairMse) {
  const FeatureMap t{{0, Tensor::vector({1, 1})}, {1, Tensor::vector({0, 2})}};
  const FeatureMap s{{2, Tensor::vector({0, 1})}, {3, Tensor::vector({0, 0})}};
  // pair (0,2): mean(1, 0) = 0.5; pair (1,3): mean(0, 4) = 2.
  EXPECT_NEAR(feature_distill(t, s, AlignmentSpec::parse("{0,1}-{2,3}")).item(), 1.25, 1e-6);
  EXPECT_EQ(feature_distill(t, s, AlignmentSpec()).item(), Real(0));
  EXPECT_THROW(feature_distill(t, s, AlignmentSpec::parse("{0}-{5}")), ConfigError);
}

TEST(LossTest, TeacherSidesReceiveNoGradient) {
  Tensor p = Tensor::matrix({{0.3, 0.7}}, true);
  Tensor q = Tensor::matrix({{0.6, 0.4}}, true);
  consistency_kl(p, q).backward();
  EXPECT_FALSE(p.has_grad());
  EXPECT_TRUE(q.has_grad());
  Tensor zt = Tensor::matrix({{1, 2}}, true);
  Tensor zs = Tensor::matrix({{0, 0}}, true);
  soft_distill(zt, zs).backward();
  EXPECT_FALSE(zt.has_grad());
  EXPECT_TRUE(zs.has_grad());
}

TEST(LossTest, PseudoLabelsBreakTiesLow) {
  const Tensor p = Tensor::matrix({{0.5, 0.5}, {0.2, 0.8}, {0.4, 0.3}});
  EXPECT_EQ(pseudo_labels(p), (std::vector<int>{0, 1, 0}));
}

TEST(LossTest, NllWeightsNormalizeByKeptRows) {
  const Tensor lp = Tensor::matrix({{-1, -2}, {-3, -4}});
  const std::vector<int> y{0, 1};
  const std::vector<Real> keep_second{0, 1};
  EXPECT_NEAR(nll_loss(lp, y, keep_second).item(), 4.0, 1e-6);
  const std::vector<Real> none{0, 0};
  EXPECT_EQ(nll_loss(lp, y, none).item(), Real(0));
  const std::vector<int> bad{0, 2};
  EXPECT_THROW(nll_loss(lp, bad), DataError);
}

TEST(TsaTest, ThresholdRisesFromChanceToOne) {
  for (TsaKind kind : {TsaKind::kLinear, TsaKind::kLog, TsaKind::kExp}) {
    const TsaSchedule s{kind, 100, 4};
    const double start = kind == TsaKind::kExp ? 0.25 + 0.75 * std::exp(-5.0) : 0.25;
    EXPECT_NEAR(tsa_threshold(0, s), start, 1e-12) << to_string(kind);
    EXPECT_EQ(tsa_threshold(100, s), 1.0);
    EXPECT_EQ(tsa_threshold(250, s), 1.0);
    double prev = 0;
    for (std::size_t t = 0; t <= 100; t += 5) {
      const double eta = tsa_threshold(t, s);
      EXPECT_GE(eta, prev);
      prev = eta;
    }
  }
  EXPECT_NEAR(tsa_threshold(50, {TsaKind::kLinear, 100, 2}), 0.75, 1e-12);
  EXPECT_NEAR(tsa_threshold(50, {TsaKind::kLog, 100, 2}), (1 - std::exp(-2.5)) * 0.5 + 0.5, 1e-12);
  EXPECT_NEAR(tsa_threshold(50, {TsaKind::kExp, 100, 2}), std::exp(-2.5) * 0.5 + 0.5, 1e-12);
  EXPECT_EQ(tsa_threshold(0, {TsaKind::kNone, 100, 2}), 1.0);
}

TEST(TsaTest, MaskDropsConfidentExamples) {
  const Tensor p = Tensor::matrix({{0.9, 0.1}, {0.4, 0.6}, {0.3, 0.7}});
  const std::vector<int> y{0, 0, 1};
  EXPECT_EQ(tsa_mask(p, y, 0.65), (std::vector<Real>{0, 1, 0}));
  EXPECT_EQ(tsa_mask(p, y, 1.0), (std::vector<Real>{1, 1, 1}));
}

TEST(TsaTest, NamesRoundTrip) {
  for (TsaKind k : {TsaKind::kLinear, TsaKind::kLog, TsaKind::kExp, TsaKind::kNone}) {
    EXPECT_EQ(parse_tsa_kind(to_string(k)), k);
  }
  EXPECT_THROW(parse_tsa_kind("cosine"), ConfigError);
  EXPECT_EQ(parse_distill_mode("hard"), DistillMode::kHard);
  EXPECT_THROW(parse_distill_mode("medium"), ConfigError);
}

TEST(LossBreakdownTest, SumAndFieldOrder) {
  LossBreakdown b;
  b.l_ce = 1;
  b.l_soft_sup = 2;
  b.l_feat_unsup = 0.5;
  b.l_consist_S = 0.25;
  EXPECT_EQ(b.component_sum(), 3.75);
  const auto f = b.fields();
  ASSERT_EQ(f.size(), 10u);
  EXPECT_EQ(f.front().first, "l_ce");
  EXPECT_EQ(f.back().first, "total");
}

InspirerConfig tiny_inspirer() {
  InspirerConfig c;
  c.layers = 1;
  c.hidden = 8;
  c.heads = 2;
  c.ff_dim = 8;
  c.vocab_size = 12;
  c.max_len = 8;
  c.classes = 2;
  c.mlp_hidden = 4;
  c.projection_dim = 4;
  return c;
}

TargetConfig tiny_target() {
  TargetConfig c;
  c.filter_sizes = {2, 3};
  c.channels = 3;
  c.emb_dim = 4;
  c.vocab_size = 12;
  c.classes = 2;
  c.projection_dim = 4;
  return c;
}

LabeledBatch labeled() { return {{{kClsId, 3, 4, 5}, {kClsId, 6, 7, 8}}, {0, 1}}; }
UnlabeledBatch unlabeled() {
  return {{{kClsId, 9, 10, 11}, {kClsId, 3, 9, 5}}, {{kClsId, 9, 11, kPadId}, {kClsId, 3, 5, kPadId}}};
}

TEST(ObjectiveTest, InspirerBreakdownMatchesLoss) {
  const InspirerModel m(tiny_inspirer(), 1);
  Rng rng(1);
  const auto r = inspirer_objective(m, labeled(), unlabeled(), {TsaKind::kNone, 10, 2}, 0, rng);
  EXPECT_NEAR(r.breakdown.total, r.loss.item(), 1e-6);
  EXPECT_EQ(r.breakdown.total, r.breakdown.component_sum());
  EXPECT_GT(r.breakdown.l_ce, 0.0);
  EXPECT_EQ(r.tsa_masked, 0u);
  EXPECT_EQ(r.tsa_threshold, 1.0);
  EXPECT_THROW(inspirer_objective(m, labeled(), UnlabeledBatch{}, {}, 0, rng), PreconditionError);
}

TEST(ObjectiveTest, InspirerTsaAtChanceMasksConfidentRows) {
  const InspirerModel m(tiny_inspirer(), 1);
  Rng rng(1);
  const auto r = inspirer_objective(m, labeled(), unlabeled(), {TsaKind::kLinear, 10, 2}, 0, rng);
  EXPECT_EQ(r.tsa_threshold, 0.5);
  // Two classes: exactly the rows already predicting their label above 0.5
  // are masked, so at most both.
  EXPECT_LE(r.tsa_masked, 2u);
}

TEST(ObjectiveTest, TargetTermsFollowOptions) {
  const InspirerModel teacher(tiny_inspirer(), 2);
  const TargetModel student(tiny_target(), 3);
  LabeledBatch lb = labeled();
  UnlabeledBatch ub = unlabeled();
  TargetLossOptions options;
  options.alignment = AlignmentSpec::parse("{0}-{3}");
  const TeacherSignals t = teacher_signals(teacher, lb, ub, options, Activation::kRelu);
  EXPECT_EQ(t.labeled.size(), 2u);
  EXPECT_TRUE(t.labeled[0].layer_states.empty());
  for (auto* v : {&lb.tokens, &ub.original, &ub.augmented}) {
    for (auto& s : *v) s.erase(s.begin());
  }
  Rng rng(4);
  const StudentSignals s = student_signals(student, lb, ub, options, rng);
  const auto full = target_objective(lb.labels, t, s, options);
  const LossBreakdown& b = full.breakdown;
  EXPECT_GT(b.l_soft_sup, 0.0);
  EXPECT_GT(b.l_soft_unsup, 0.0);
  EXPECT_GT(b.l_feat_sup, 0.0);
  EXPECT_GE(b.l_consist_S, 0.0);
  EXPECT_EQ(b.l_hard_sup, 0.0);
  EXPECT_NEAR(b.total, full.loss.item(), 1e-5);

  TargetLossOptions ce_only;
  ce_only.output_distill = ce_only.feature_distill = ce_only.consistency = false;
  const auto ce = target_objective(lb.labels, {}, s, ce_only);
  EXPECT_EQ(ce.breakdown.total, ce.breakdown.l_ce);

  EXPECT_THROW(target_objective(lb.labels, {}, s, options), UsageError);
  const std::vector<int> wrong{0};
  EXPECT_THROW(target_objective(wrong, t, s, options), UsageError);
}

TEST(ObjectiveTest, TargetHardModeLogsHardTerms) {
  const InspirerModel teacher(tiny_inspirer(), 2);
  const TargetModel student(tiny_target(), 3);
  LabeledBatch lb = labeled();
  UnlabeledBatch ub = unlabeled();
  TargetLossOptions options;
  options.mode = DistillMode::kHard;
  options.feature_distill = false;
  const TeacherSignals t = teacher_signals(teacher, lb, ub, options, Activation::kRelu);
  for (auto* v : {&lb.tokens, &ub.original, &ub.augmented}) {
    for (auto& s : *v) s.erase(s.begin());
  }
  Rng rng(4);
  const auto r = target_objective(lb.labels, t, student_signals(student, lb, ub, options, rng), options);
  EXPECT_GT(r.breakdown.l_hard_sup, 0.0);
  EXPECT_GT(r.breakdown.l_hard_unsup, 0.0);
  EXPECT_EQ(r.breakdown.l_soft_sup, 0.0);
  EXPECT_EQ(r.breakdown.l_feat_sup, 0.0);
}

}  // namespace
}  // namespace textdistill
