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

#include "textdistill/augmentation.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "textdistill/errors.hpp"
#include "textdistill/tokens.hpp"

namespace textdistill {

namespace {

bool is_special(TokenId t) { return t == kPadId || t == kClsId; }

TokenId random_word(std::size_t vocab_size, Rng& rng) {
  const std::size_t words = vocab_size - static_cast<std::size_t>(kFirstWordId);
  return static_cast<TokenId>(static_cast<std::size_t>(kFirstWordId) + uniform_index(rng, words));
}

}  // namespace

std::string to_string(AugmentKind kind) {
  switch (kind) {
    case AugmentKind::kTokenDropout: return "token_dropout";
    case AugmentKind::kUniformReplace: return "uniform_replace";
    case AugmentKind::kTfidfReplace: return "tfidf_replace";
  }
  return "token_dropout";
}

AugmentKind parse_augment_kind(std::string_view name) {
  if (name == "token_dropout") return AugmentKind::kTokenDropout;
  if (name == "uniform_replace") return AugmentKind::kUniformReplace;
  if (name == "tfidf_replace") return AugmentKind::kTfidfReplace;
  throw ConfigError("unknown augmentation \"" + std::string(name) +
                    "\" (expected token_dropout, uniform_replace or tfidf_replace)");
}

void AugmentPolicy::validate() const {
  if (!(rate >= 0.0 && rate <= 1.0)) {
    throw ConfigError("augmentation rate " + std::to_string(rate) + " outside [0, 1]");
  }
}

TfidfTable build_tfidf_table(const std::vector<TokenSeq>& corpus, std::size_t vocab_size) {
  if (corpus.empty()) throw DataError("tf-idf: empty corpus");
  const double docs = static_cast<double>(corpus.size());
  std::vector<std::size_t> df(vocab_size, 0);
  std::vector<double> tf_sum(vocab_size, 0.0);
  std::vector<std::size_t> counts(vocab_size, 0);
  for (const TokenSeq& doc : corpus) {
    std::size_t length = 0;
    std::set<TokenId> seen;
    for (TokenId t : doc) {
      if (is_special(t)) continue;
      if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
        throw DataError("tf-idf: token id " + std::to_string(t) + " outside the vocabulary");
      }
      ++counts[static_cast<std::size_t>(t)];
      seen.insert(t);
      ++length;
    }
    for (TokenId t : seen) {
      const auto id = static_cast<std::size_t>(t);
      ++df[id];
      tf_sum[id] += static_cast<double>(counts[id]) / static_cast<double>(length);
      counts[id] = 0;
    }
  }

  TfidfTable table;
  table.idf.assign(vocab_size, 0.0);
  table.score.assign(vocab_size, 0.0);
  double max_score = 0.0;
  for (std::size_t id = 0; id < vocab_size; ++id) {
    table.idf[id] = std::log((1.0 + docs) / (1.0 + static_cast<double>(df[id]))) + 1.0;
    if (df[id] == 0) continue;
    // Mean term frequency over the documents that contain the token.
    table.score[id] = tf_sum[id] / static_cast<double>(df[id]) * table.idf[id];
    max_score = std::max(max_score, table.score[id]);
  }
  if (max_score > 0.0) {
    for (double& s : table.score) s /= max_score;
  }
  return table;
}

TokenSeq augment(std::span<const TokenId> tokens, const AugmentPolicy& policy,
                 std::size_t vocab_size, const TfidfTable* tfidf, Rng& rng) {
  policy.validate();
  if (tokens.empty()) throw PreconditionError("augment: empty token sequence");
  TokenSeq out(tokens.begin(), tokens.end());
  if (policy.rate == 0.0) return out;
  if (policy.kind != AugmentKind::kTokenDropout &&
      vocab_size <= static_cast<std::size_t>(kFirstWordId)) {
    throw ConfigError("augment: vocabulary has no word ids to draw replacements from");
  }

  switch (policy.kind) {
    case AugmentKind::kTokenDropout:
      for (TokenId& t : out) {
        if (!is_special(t) && bernoulli(rng, policy.rate)) t = kPadId;
      }
      break;
    case AugmentKind::kUniformReplace:
      for (TokenId& t : out) {
        if (!is_special(t) && bernoulli(rng, policy.rate)) t = random_word(vocab_size, rng);
      }
      break;
    case AugmentKind::kTfidfReplace: {
      if (tfidf == nullptr || tfidf->score.size() < vocab_size) {
        throw ConfigError("augment: tfidf_replace needs a tf-idf table for this vocabulary");
      }
      // Replacement probability proportional to 1 - score, scaled so that the
      // expected replaced fraction matches the rate.
      double weight_sum = 0.0;
      std::size_t words = 0;
      auto weight = [&](TokenId t) {
        const auto id = static_cast<std::size_t>(t);
        return id < tfidf->score.size() ? 1.0 - tfidf->score[id] : 1.0;
      };
      for (TokenId t : out) {
        if (is_special(t)) continue;
        weight_sum += weight(t);
        ++words;
      }
      if (words == 0 || weight_sum <= 0.0) break;
      const double mean_weight = weight_sum / static_cast<double>(words);
      for (TokenId& t : out) {
        if (is_special(t)) continue;
        const double p = std::min(1.0, policy.rate * weight(t) / mean_weight);
        if (bernoulli(rng, p)) t = random_word(vocab_size, rng);
      }
      break;
    }
  }
  return out;
}

TokenSeq augment(std::span<const TokenId> tokens, const AugmentPolicy& policy,
                 std::size_t vocab_size, const TfidfTable* tfidf) {
  Rng rng(policy.seed);
  return augment(tokens, policy, vocab_size, tfidf, rng);
}

}  // namespace textdistill
