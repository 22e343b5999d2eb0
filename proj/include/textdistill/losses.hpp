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
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "textdistill/alignment.hpp"
#include "textdistill/batch.hpp"
#include "textdistill/models.hpp"
#include "textdistill/tensor.hpp"

namespace textdistill {

inline constexpr Real kLogFloor = Real(1e-8);

// Per-step values of every objective term. Terms that are switched off stay
// exactly 0. Output distillation is recorded under l_soft_* or l_hard_*
// depending on the configured mode.
struct LossBreakdown {
  double l_ce = 0;
  double l_consist_T = 0;
  double l_soft_sup = 0;
  double l_soft_unsup = 0;
  double l_hard_sup = 0;
  double l_hard_unsup = 0;
  double l_feat_sup = 0;
  double l_feat_unsup = 0;
  double l_consist_S = 0;
  double total = 0;

  double component_sum() const;
  // (name, value) pairs in a fixed order, total last.
  std::vector<std::pair<std::string, double>> fields() const;
};

enum class TsaKind { kLinear, kLog, kExp, kNone };

std::string to_string(TsaKind kind);
TsaKind parse_tsa_kind(std::string_view name);

struct TsaSchedule {
  TsaKind kind = TsaKind::kLinear;
  std::size_t total_steps = 1;
  std::size_t classes = 2;
};

// Confidence threshold eta(t). kNone always returns 1.
double tsa_threshold(std::size_t step, const TsaSchedule& schedule);
// 1 for examples whose true-class probability is at most eta, else 0.
std::vector<Real> tsa_mask(const Tensor& probs, std::span<const int> labels, double eta);

// Weighted negative log-likelihood over rows of log-probabilities [B x C].
// Normalized by the number of nonzero weights (at least 1); an empty weight
// vector means all ones.
Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels,
                std::span<const Real> weights = {});
// Mean over the batch of -log p[y_i] for probability rows [B x C].
Tensor ce_loss(const Tensor& probs, std::span<const int> labels,
               std::span<const Real> weights = {});
// Mean over the batch of KL(p_orig || p_aug); p_orig is held fixed.
Tensor consistency_kl(const Tensor& p_orig, const Tensor& p_aug);
// Mean over the batch of ||z_T - z_S||^2; z_T is held fixed.
Tensor soft_distill(const Tensor& z_teacher, const Tensor& z_student);
// Teacher argmax (lowest class on ties) per row.
std::vector<int> pseudo_labels(const Tensor& p_teacher);
// Cross-entropy of student rows against teacher argmax labels.
Tensor hard_distill(const Tensor& p_teacher, const Tensor& p_student);

using FeatureMap = std::map<std::size_t, Tensor>;
// Mean over pairs (l, k) of MSE(teacher[l], student[k]); teacher held fixed.
Tensor feature_distill(const FeatureMap& teacher, const FeatureMap& student,
                       const AlignmentSpec& spec);

struct ObjectiveResult {
  Tensor loss;
  LossBreakdown breakdown;
  double tsa_threshold = 1.0;
  std::size_t tsa_masked = 0;
};

// Softmax over the clean unlabeled inputs in eval mode, without gradient.
Tensor consistency_targets(const InspirerModel& model, const std::vector<TokenSeq>& originals);

// CE on the labeled batch with TSA masking plus consistency KL on the
// unlabeled pairs. The clean branch runs in eval mode without gradient.
ObjectiveResult inspirer_objective(const InspirerModel& model, const LabeledBatch& labeled,
                                   const UnlabeledBatch& unlabeled,
                                   const TsaSchedule& schedule, std::size_t step,
                                   Rng& dropout_rng);
// Same, with precomputed clean-branch targets [m x C] held constant.
ObjectiveResult inspirer_objective(const InspirerModel& model, const LabeledBatch& labeled,
                                   const UnlabeledBatch& unlabeled, const Tensor& p_clean,
                                   const TsaSchedule& schedule, std::size_t step,
                                   Rng& dropout_rng);

enum class DistillMode { kSoft, kHard };

std::string to_string(DistillMode mode);
DistillMode parse_distill_mode(std::string_view name);

struct TargetLossOptions {
  DistillMode mode = DistillMode::kSoft;
  bool output_distill = true;
  bool feature_distill = true;
  bool consistency = true;
  AlignmentSpec alignment;

  bool uses_teacher() const { return output_distill || feature_distill; }
  bool uses_unlabeled() const { return uses_teacher() || consistency; }
};

// Teacher outputs; one trace per labeled example and per unlabeled u_j,
// computed without gradient. Projected features are needed when feature
// distillation is on.
struct TeacherSignals {
  std::vector<ForwardTrace> labeled;
  std::vector<ForwardTrace> unlabeled;
};

// Student outputs. unlabeled_clean carries the fixed reference for the
// consistency term; unlabeled feeds the distillation terms.
struct StudentSignals {
  std::vector<ForwardTrace> labeled;
  std::vector<ForwardTrace> unlabeled;
  std::vector<ForwardTrace> unlabeled_clean;
  std::vector<ForwardTrace> augmented;
};

// Sum of CE, output distillation (labeled and unlabeled), feature
// distillation (labeled and unlabeled) and student consistency, unit weights.
ObjectiveResult target_objective(std::span<const int> labels, const TeacherSignals& teacher,
                                 const StudentSignals& student,
                                 const TargetLossOptions& options);

TeacherSignals teacher_signals(const InspirerModel& teacher, const LabeledBatch& labeled,
                               const UnlabeledBatch& unlabeled,
                               const TargetLossOptions& options, Activation activation);
StudentSignals student_signals(const TargetModel& student, const LabeledBatch& labeled,
                               const UnlabeledBatch& unlabeled,
                               const TargetLossOptions& options, Rng& dropout_rng);

}  // namespace textdistill
