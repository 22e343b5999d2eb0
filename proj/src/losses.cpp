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

#include "textdistill/losses.hpp"

#include <algorithm>
#include <cmath>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

Tensor zero_scalar() { return Tensor::scalar(Real(0)); }

Tensor stack_logits(const std::vector<ForwardTrace>& traces) {
  std::vector<Tensor> rows;
  rows.reserve(traces.size());
  for (const auto& t : traces) rows.push_back(t.logits);
  return stack_rows(rows);
}

void require_rows(const Tensor& t, const char* what) {
  if (t.rank() != 2) {
    throw DimensionError(std::string(what) + ": expected [B x C], got " + shape_str(t.shape()));
  }
}

void require_same_shape(const Tensor& a, const Tensor& b, const char* what) {
  if (a.shape() != b.shape()) {
    throw DimensionError(std::string(what) + ": shapes " + shape_str(a.shape()) + " and " +
                         shape_str(b.shape()) + " differ");
  }
}

double value_of(const Tensor& t) { return static_cast<double>(t.item()); }

}  // namespace

double LossBreakdown::component_sum() const {
  return l_ce + l_consist_T + l_soft_sup + l_soft_unsup + l_hard_sup + l_hard_unsup +
         l_feat_sup + l_feat_unsup + l_consist_S;
}

std::vector<std::pair<std::string, double>> LossBreakdown::fields() const {
  return {{"l_ce", l_ce},
          {"l_consist_T", l_consist_T},
          {"l_soft_sup", l_soft_sup},
          {"l_soft_unsup", l_soft_unsup},
          {"l_hard_sup", l_hard_sup},
          {"l_hard_unsup", l_hard_unsup},
          {"l_feat_sup", l_feat_sup},
          {"l_feat_unsup", l_feat_unsup},
          {"l_consist_S", l_consist_S},
          {"total", total}};
}

std::string to_string(TsaKind kind) {
  switch (kind) {
    case TsaKind::kLinear: return "linear";
    case TsaKind::kLog: return "log";
    case TsaKind::kExp: return "exp";
    case TsaKind::kNone: return "none";
  }
  return "none";
}

TsaKind parse_tsa_kind(std::string_view name) {
  if (name == "linear") return TsaKind::kLinear;
  if (name == "log") return TsaKind::kLog;
  if (name == "exp") return TsaKind::kExp;
  if (name == "none") return TsaKind::kNone;
  throw ConfigError("unknown tsa schedule \"" + std::string(name) +
                    "\" (expected linear, log, exp or none)");
}

double tsa_threshold(std::size_t step, const TsaSchedule& schedule) {
  if (schedule.kind == TsaKind::kNone) return 1.0;
  const double floor = 1.0 / static_cast<double>(std::max<std::size_t>(schedule.classes, 1));
  const double r =
      schedule.total_steps == 0
          ? 1.0
          : std::min(1.0, static_cast<double>(step) / static_cast<double>(schedule.total_steps));
  double alpha = r;
  if (schedule.kind == TsaKind::kLog) alpha = 1.0 - std::exp(-5.0 * r);
  if (schedule.kind == TsaKind::kExp) alpha = std::exp(5.0 * (r - 1.0));
  // The log and exp curves only approach their end points; pin them.
  if (r >= 1.0) alpha = 1.0;
  return alpha * (1.0 - floor) + floor;
}

std::vector<Real> tsa_mask(const Tensor& probs, std::span<const int> labels, double eta) {
  require_rows(probs, "tsa_mask");
  const std::size_t rows = probs.dim(0), cols = probs.dim(1);
  if (labels.size() != rows) throw DimensionError("tsa_mask: label count mismatch");
  std::vector<Real> mask(rows, Real(1));
  for (std::size_t i = 0; i < rows; ++i) {
    if (labels[i] < 0 || static_cast<std::size_t>(labels[i]) >= cols) {
      throw DataError("label " + std::to_string(labels[i]) + " out of range");
    }
    if (static_cast<double>(probs.at(i, static_cast<std::size_t>(labels[i]))) > eta) {
      mask[i] = Real(0);
    }
  }
  return mask;
}

Tensor nll_loss(const Tensor& log_probs, std::span<const int> labels,
                std::span<const Real> weights) {
  require_rows(log_probs, "nll_loss");
  const std::size_t rows = log_probs.dim(0);
  if (!weights.empty() && weights.size() != rows) {
    throw DimensionError("nll_loss: weight count mismatch");
  }
  const Tensor picked = pick(log_probs, labels);
  std::size_t active = 0;
  std::vector<Real> w(rows, Real(1));
  for (std::size_t i = 0; i < rows; ++i) {
    if (!weights.empty()) w[i] = weights[i];
    if (w[i] != Real(0)) ++active;
  }
  const Real denom = static_cast<Real>(std::max<std::size_t>(active, 1));
  for (Real& v : w) v = -v / denom;
  return sum(mul(picked, Tensor::from_values({rows}, std::move(w))));
}

Tensor ce_loss(const Tensor& probs, std::span<const int> labels, std::span<const Real> weights) {
  require_rows(probs, "ce_loss");
  return nll_loss(log_floor(probs, kLogFloor), labels, weights);
}

Tensor consistency_kl(const Tensor& p_orig, const Tensor& p_aug) {
  require_rows(p_aug, "consistency_kl");
  require_same_shape(p_orig, p_aug, "consistency_kl");
  const Tensor ref = p_orig.detach();
  const Tensor terms = mul(ref, sub(log_floor(ref, kLogFloor), log_floor(p_aug, kLogFloor)));
  return scale(sum(terms), Real(1) / static_cast<Real>(p_aug.dim(0)));
}

Tensor soft_distill(const Tensor& z_teacher, const Tensor& z_student) {
  require_rows(z_student, "soft_distill");
  require_same_shape(z_teacher, z_student, "soft_distill");
  const Tensor diff = sub(z_teacher.detach(), z_student);
  return scale(sum(square(diff)), Real(1) / static_cast<Real>(z_student.dim(0)));
}

std::vector<int> pseudo_labels(const Tensor& p_teacher) {
  require_rows(p_teacher, "pseudo_labels");
  const std::size_t rows = p_teacher.dim(0), cols = p_teacher.dim(1);
  std::vector<int> out(rows, 0);
  for (std::size_t i = 0; i < rows; ++i) {
    for (std::size_t c = 1; c < cols; ++c) {
      if (p_teacher.at(i, c) > p_teacher.at(i, static_cast<std::size_t>(out[i]))) {
        out[i] = static_cast<int>(c);
      }
    }
  }
  return out;
}

Tensor hard_distill(const Tensor& p_teacher, const Tensor& p_student) {
  require_same_shape(p_teacher, p_student, "hard_distill");
  const std::vector<int> labels = pseudo_labels(p_teacher);
  return ce_loss(p_student, labels);
}

Tensor feature_distill(const FeatureMap& teacher, const FeatureMap& student,
                       const AlignmentSpec& spec) {
  if (spec.empty()) return zero_scalar();
  std::vector<Tensor> terms;
  for (const AlignmentPair& pair : spec.pairs()) {
    const auto t = teacher.find(pair.layer);
    const auto s = student.find(pair.filter_size);
    if (t == teacher.end() || s == student.end()) {
      throw ConfigError("feature_distill: no projected feature for pair (" +
                        std::to_string(pair.layer) + ", " + std::to_string(pair.filter_size) +
                        ")");
    }
    require_same_shape(t->second, s->second, "feature_distill");
    terms.push_back(mean(square(sub(t->second.detach(), s->second))));
  }
  Tensor total = terms[0];
  for (std::size_t i = 1; i < terms.size(); ++i) total = add(total, terms[i]);
  return scale(total, Real(1) / static_cast<Real>(terms.size()));
}

Tensor consistency_targets(const InspirerModel& model, const std::vector<TokenSeq>& originals) {
  NoGradGuard no_grad;
  std::vector<Tensor> rows;
  for (const auto& u : originals) rows.push_back(model.forward(u, Mode::kEval).logits);
  return softmax(stack_rows(rows));
}

ObjectiveResult inspirer_objective(const InspirerModel& model, const LabeledBatch& labeled,
                                   const UnlabeledBatch& unlabeled,
                                   const TsaSchedule& schedule, std::size_t step,
                                   Rng& dropout_rng) {
  if (unlabeled.empty()) throw PreconditionError("inspirer objective: empty unlabeled batch");
  return inspirer_objective(model, labeled, unlabeled, consistency_targets(model, unlabeled.original),
                            schedule, step, dropout_rng);
}

ObjectiveResult inspirer_objective(const InspirerModel& model, const LabeledBatch& labeled,
                                   const UnlabeledBatch& unlabeled, const Tensor& p_clean,
                                   const TsaSchedule& schedule, std::size_t step,
                                   Rng& dropout_rng) {
  if (unlabeled.empty()) throw PreconditionError("inspirer objective: empty unlabeled batch");
  if (p_clean.rank() != 2 || p_clean.dim(0) != unlabeled.augmented.size()) {
    throw DimensionError("inspirer objective: clean targets " + shape_str(p_clean.shape()) +
                         " for " + std::to_string(unlabeled.augmented.size()) +
                         " augmented examples");
  }
  ObjectiveResult result;
  result.tsa_threshold = tsa_threshold(step, schedule);

  Tensor ce = zero_scalar();
  if (!labeled.empty()) {
    std::vector<Tensor> rows;
    for (const auto& x : labeled.tokens) {
      rows.push_back(model.forward(x, Mode::kTrain, &dropout_rng).logits);
    }
    const Tensor z = stack_rows(rows);
    std::vector<Real> weights;
    {
      NoGradGuard no_grad;
      weights = tsa_mask(softmax(z.detach()), labeled.labels, result.tsa_threshold);
    }
    result.tsa_masked = static_cast<std::size_t>(std::count(weights.begin(), weights.end(), Real(0)));
    ce = nll_loss(log_softmax(z), labeled.labels, weights);
  }

  std::vector<Tensor> rows;
  for (const auto& a : unlabeled.augmented) {
    rows.push_back(model.forward(a, Mode::kTrain, &dropout_rng).logits);
  }
  const Tensor kl = consistency_kl(p_clean.detach(), softmax(stack_rows(rows)));

  result.loss = add(ce, kl);
  result.breakdown.l_ce = value_of(ce);
  result.breakdown.l_consist_T = value_of(kl);
  result.breakdown.total = result.breakdown.component_sum();
  return result;
}

std::string to_string(DistillMode mode) { return mode == DistillMode::kSoft ? "soft" : "hard"; }

DistillMode parse_distill_mode(std::string_view name) {
  if (name == "soft") return DistillMode::kSoft;
  if (name == "hard") return DistillMode::kHard;
  throw ConfigError("unknown distill mode \"" + std::string(name) + "\" (expected soft or hard)");
}

namespace {

Tensor output_term(const std::vector<ForwardTrace>& teacher,
                   const std::vector<ForwardTrace>& student, DistillMode mode) {
  const Tensor zt = stack_logits(teacher);
  const Tensor zs = stack_logits(student);
  if (mode == DistillMode::kSoft) return soft_distill(zt, zs);
  return hard_distill(softmax(zt.detach()), softmax(zs));
}

Tensor feature_term(const std::vector<ForwardTrace>& teacher,
                    const std::vector<ForwardTrace>& student, const AlignmentSpec& spec) {
  Tensor total = feature_distill(teacher[0].projected, student[0].projected, spec);
  for (std::size_t i = 1; i < student.size(); ++i) {
    total = add(total, feature_distill(teacher[i].projected, student[i].projected, spec));
  }
  return scale(total, Real(1) / static_cast<Real>(student.size()));
}

void require_teacher(const std::vector<ForwardTrace>& teacher, std::size_t count,
                     const char* split) {
  if (teacher.size() != count) {
    throw UsageError(std::string("target objective: missing teacher trace for the ") + split +
                     " batch (" + std::to_string(teacher.size()) + " of " +
                     std::to_string(count) + ")");
  }
  for (const auto& t : teacher) {
    if (!t.logits.defined()) {
      throw UsageError(std::string("target objective: empty teacher trace in the ") + split +
                       " batch");
    }
  }
}

}  // namespace

ObjectiveResult target_objective(std::span<const int> labels, const TeacherSignals& teacher,
                                 const StudentSignals& student,
                                 const TargetLossOptions& options) {
  if (student.labeled.size() != labels.size() || labels.empty()) {
    throw UsageError("target objective: student traces do not match the labeled batch");
  }
  ObjectiveResult result;
  LossBreakdown& b = result.breakdown;

  Tensor total = nll_loss(log_softmax(stack_logits(student.labeled)), labels);
  b.l_ce = value_of(total);

  const bool has_unlabeled = !student.unlabeled.empty();
  if (options.uses_teacher()) {
    require_teacher(teacher.labeled, student.labeled.size(), "labeled");
    if (has_unlabeled) require_teacher(teacher.unlabeled, student.unlabeled.size(), "unlabeled");
  }

  if (options.output_distill) {
    const Tensor sup = output_term(teacher.labeled, student.labeled, options.mode);
    total = add(total, sup);
    (options.mode == DistillMode::kSoft ? b.l_soft_sup : b.l_hard_sup) = value_of(sup);
    if (has_unlabeled) {
      const Tensor unsup = output_term(teacher.unlabeled, student.unlabeled, options.mode);
      total = add(total, unsup);
      (options.mode == DistillMode::kSoft ? b.l_soft_unsup : b.l_hard_unsup) = value_of(unsup);
    }
  }

  if (options.feature_distill && !options.alignment.empty()) {
    const Tensor sup = feature_term(teacher.labeled, student.labeled, options.alignment);
    total = add(total, sup);
    b.l_feat_sup = value_of(sup);
    if (has_unlabeled) {
      const Tensor unsup = feature_term(teacher.unlabeled, student.unlabeled, options.alignment);
      total = add(total, unsup);
      b.l_feat_unsup = value_of(unsup);
    }
  }

  if (options.consistency && !student.augmented.empty()) {
    if (student.unlabeled_clean.size() != student.augmented.size()) {
      throw UsageError("target objective: clean and augmented branches differ in size");
    }
    const Tensor kl = consistency_kl(softmax(stack_logits(student.unlabeled_clean)).detach(),
                                     softmax(stack_logits(student.augmented)));
    total = add(total, kl);
    b.l_consist_S = value_of(kl);
  }

  result.loss = total;
  b.total = b.component_sum();
  return result;
}

TeacherSignals teacher_signals(const InspirerModel& teacher, const LabeledBatch& labeled,
                               const UnlabeledBatch& unlabeled,
                               const TargetLossOptions& options, Activation activation) {
  TeacherSignals out;
  if (!options.uses_teacher()) return out;
  NoGradGuard no_grad;
  auto run = [&](const TokenSeq& x) {
    ForwardTrace t = teacher.forward(x, Mode::kEval);
    if (options.feature_distill) project_features(teacher, t, options.alignment, activation);
    // Only the logits and projections are consumed downstream.
    t.layer_states.clear();
    return t;
  };
  for (const auto& x : labeled.tokens) out.labeled.push_back(run(x));
  for (const auto& u : unlabeled.original) out.unlabeled.push_back(run(u));
  return out;
}

StudentSignals student_signals(const TargetModel& student, const LabeledBatch& labeled,
                               const UnlabeledBatch& unlabeled,
                               const TargetLossOptions& options, Rng& dropout_rng) {
  StudentSignals out;
  const Activation act = student.config().projection_activation;
  auto run = [&](const TokenSeq& x) {
    ForwardTrace t = student.forward(x, Mode::kTrain, &dropout_rng);
    if (options.feature_distill) project_features(student, t, options.alignment, act);
    return t;
  };
  for (const auto& x : labeled.tokens) out.labeled.push_back(run(x));
  if (options.uses_teacher()) {
    for (const auto& u : unlabeled.original) out.unlabeled.push_back(run(u));
  }
  if (options.consistency) {
    {
      NoGradGuard no_grad;
      for (const auto& u : unlabeled.original) {
        out.unlabeled_clean.push_back(student.forward(u, Mode::kEval));
      }
    }
    for (const auto& a : unlabeled.augmented) {
      out.augmented.push_back(student.forward(a, Mode::kTrain, &dropout_rng));
    }
  }
  return out;
}

}  // namespace textdistill
