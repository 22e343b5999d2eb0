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

#include "textdistill/augmentation.hpp"
#include "textdistill/errors.hpp"
#include "textdistill/tokens.hpp"

namespace textdistill {
namespace {

constexpr std::size_t kVocab = 40;
constexpr AugmentKind kAllKinds[] = {AugmentKind::kTokenDropout, AugmentKind::kUniformReplace,
                                     AugmentKind::kTfidfReplace};

TokenSeq sample_sequence(std::size_t words, std::size_t pads, std::uint64_t seed) {
  Rng rng(seed);
  TokenSeq s{kClsId};
  for (std::size_t i = 0; i < words; ++i) {
    s.push_back(static_cast<TokenId>(kFirstWordId + uniform_index(rng, kVocab - kFirstWordId)));
  }
  s.insert(s.end(), pads, kPadId);
  return s;
}

TfidfTable flat_table() {
  TfidfTable t;
  t.idf.assign(kVocab, 1.0);
  t.score.assign(kVocab, 0.5);
  return t;
}

TEST(AugmentTest, ZeroRateIsIdentity) {
  const TokenSeq s = sample_sequence(30, 3, 1);
  const TfidfTable table = flat_table();
  for (AugmentKind kind : kAllKinds) {
    EXPECT_EQ(augment(s, {kind, 0.0, 7}, kVocab, &table), s) << to_string(kind);
  }
}

TEST(AugmentTest, FullDropoutClearsEveryWord) {
  const TokenSeq s = sample_sequence(20, 2, 2);
  const TokenSeq out = augment(s, {AugmentKind::kTokenDropout, 1.0, 3}, kVocab);
  ASSERT_EQ(out.size(), s.size());
  EXPECT_EQ(out[0], kClsId);
  for (std::size_t i = 1; i < out.size(); ++i) EXPECT_EQ(out[i], kPadId);
}

TEST(AugmentTest, PreservesLengthAndSpecialTokens) {
  const TfidfTable table = flat_table();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    const TokenSeq s = sample_sequence(5 + seed % 20, seed % 4, seed);
    for (AugmentKind kind : kAllKinds) {
      const TokenSeq out = augment(s, {kind, 0.5, seed}, kVocab, &table);
      ASSERT_EQ(out.size(), s.size());
      EXPECT_EQ(out[0], kClsId);
      for (std::size_t i = 0; i < s.size(); ++i) {
        if (s[i] == kPadId) {
          EXPECT_EQ(out[i], kPadId);
        }
        EXPECT_GE(out[i], 0);
        EXPECT_LT(out[i], static_cast<TokenId>(kVocab));
        if (kind != AugmentKind::kTokenDropout && i > 0) {
          EXPECT_NE(out[i], kClsId);
        }
      }
    }
  }
}

TEST(AugmentTest, SeedDeterminesOutput) {
  const TokenSeq s = sample_sequence(50, 0, 3);
  const TfidfTable table = flat_table();
  for (AugmentKind kind : kAllKinds) {
    int differing = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const AugmentPolicy a{kind, 0.3, seed}, b{kind, 0.3, seed + 1000};
      EXPECT_EQ(augment(s, a, kVocab, &table), augment(s, a, kVocab, &table));
      if (augment(s, a, kVocab, &table) != augment(s, b, kVocab, &table)) ++differing;
    }
    EXPECT_EQ(differing, 100) << to_string(kind);
  }
}

TEST(AugmentTest, RejectsBadInputs) {
  const TokenSeq s = sample_sequence(5, 0, 4);
  EXPECT_THROW(augment(s, {AugmentKind::kTokenDropout, 1.5, 0}, kVocab), ConfigError);
  EXPECT_THROW(augment(s, {AugmentKind::kTokenDropout, -0.1, 0}, kVocab), ConfigError);
  EXPECT_THROW(augment(TokenSeq{}, {AugmentKind::kTokenDropout, 0.1, 0}, kVocab), PreconditionError);
  EXPECT_THROW(augment(s, {AugmentKind::kTfidfReplace, 0.1, 0}, kVocab, nullptr), ConfigError);
  EXPECT_THROW(parse_augment_kind("back_translate"), ConfigError);
  for (AugmentKind kind : kAllKinds) EXPECT_EQ(parse_augment_kind(to_string(kind)), kind);
}

TEST(TfidfTest, TwoDocumentIdfByHand) {
  // {"a b", "a c"} with a=3, b=4, c=5.
  const TfidfTable t = build_tfidf_table({{kClsId, 3, 4}, {kClsId, 3, 5}}, 6);
  EXPECT_NEAR(t.idf[3], std::log(3.0 / 3.0) + 1.0, 1e-12);
  EXPECT_NEAR(t.idf[4], std::log(3.0 / 2.0) + 1.0, 1e-12);
  EXPECT_LT(t.idf[3], t.idf[4]);
  EXPECT_EQ(t.idf[4], t.idf[5]);
  // tf is 1/2 everywhere, so scores are proportional to idf.
  EXPECT_NEAR(t.score[4], 1.0, 1e-12);
  EXPECT_NEAR(t.score[3], t.idf[3] / t.idf[4], 1e-12);
}

TEST(TfidfTest, UbiquitousTokenHasMinimumIdf) {
  const std::vector<TokenSeq> corpus = {{3, 4, 5}, {3, 6}, {3, 4, 7, 7}, {3}};
  const TfidfTable t = build_tfidf_table(corpus, 8);
  for (std::size_t id = kFirstWordId; id < 8; ++id) EXPECT_LE(t.idf[3], t.idf[id]);
  EXPECT_NEAR(t.idf[3], 1.0, 1e-12);
  for (double s : t.score) {
    EXPECT_GE(s, 0.0);
    EXPECT_LE(s, 1.0);
  }
  EXPECT_THROW(build_tfidf_table({}, 8), DataError);
  EXPECT_THROW(build_tfidf_table({{3, 9}}, 8), DataError);
}

TEST(TfidfTest, LowScoreTokensArePerturbedMoreOften) {
  TfidfTable table = flat_table();
  table.score[3] = 0.9;  // informative
  table.score[4] = 0.1;  // filler
  table.score[5] = 0.5;
  const TokenSeq s{kClsId, 3, 4, 5, 5};
  const double rate = 0.3;
  const double mean_w = ((1 - 0.9) + (1 - 0.1) + 2 * (1 - 0.5)) / 4.0;
  // A replacement can redraw the same id.
  const double keep_same = 1.0 / static_cast<double>(kVocab - kFirstWordId);
  auto expected = [&](double score) {
    return std::min(1.0, rate * (1 - score) / mean_w) * (1 - keep_same);
  };

  constexpr int kTrials = 10000;
  int changed3 = 0, changed4 = 0;
  Rng rng(11);
  const AugmentPolicy policy{AugmentKind::kTfidfReplace, rate, 0};
  for (int i = 0; i < kTrials; ++i) {
    const TokenSeq out = augment(s, policy, kVocab, &table, rng);
    changed3 += out[1] != 3;
    changed4 += out[2] != 4;
  }
  const double f3 = static_cast<double>(changed3) / kTrials;
  const double f4 = static_cast<double>(changed4) / kTrials;
  for (auto [f, p] : {std::pair{f3, expected(0.9)}, std::pair{f4, expected(0.1)}}) {
    EXPECT_NEAR(f, p, 5 * std::sqrt(p * (1 - p) / kTrials));
  }
  EXPECT_GT(f4, f3);
}

}  // namespace
}  // namespace textdistill
