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
#include <fstream>
#include <set>
#include <unordered_set>

#include "textdistill/data.hpp"
#include "textdistill/errors.hpp"

namespace textdistill {
namespace {

namespace fs = std::filesystem;

class TempDir {
 public:
  TempDir() {
    path_ = fs::temp_directory_path() /
            ("textdistill_data_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
             "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(path_);
  }
  ~TempDir() { fs::remove_all(path_); }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

void write_text(const fs::path& path, const std::string& content) {
  std::ofstream(path, std::ios::binary) << content;
}

TEST(TokenizeTest, FoldsCaseAndSplitsPunctuation) {
  EXPECT_EQ(tokenize("Hello, WORLD!  ok"),
            (std::vector<std::string>{"hello", ",", "world", "!", "ok"}));
  EXPECT_TRUE(tokenize("   \t\n").empty());
  const Vocab v = Vocab::from_words({"hello"});
  EXPECT_EQ(encode("Hello hello", v, 10), (TokenSeq{kClsId, 3, 3}));
}

TEST(TokenizeTest, EmptyTextPadsToFloor) {
  std::vector<TokenSeq> batch{encode("", Vocab(), 8)};
  EXPECT_EQ(batch[0], TokenSeq{kClsId});
  pad_batch(batch, 5);
  EXPECT_EQ(batch[0], (TokenSeq{kClsId, kPadId, kPadId, kPadId, kPadId}));
}

TEST(TokenizeTest, TruncatesToMaxLength) {
  std::string text;
  for (int i = 0; i < 300; ++i) text += "w" + std::to_string(i) + " ";
  EXPECT_EQ(encode(text, Vocab(), 256).size(), 256u);
  EXPECT_THROW(encode(text, Vocab(), 0), ConfigError);
}

TEST(VocabTest, ReservedIdsAndFrequencyOrder) {
  const Vocab v = Vocab::build({"b a c b", "c b d", "a"});
  ASSERT_EQ(v.size(), 7u);
  EXPECT_EQ(v.word(kPadId), "<pad>");
  EXPECT_EQ(v.word(kClsId), "<cls>");
  EXPECT_EQ(v.word(kUnkId), "<unk>");
  // b:3, a:2, c:2, d:1; equal counts in lexicographic order.
  EXPECT_EQ(std::vector<std::string>(v.words().begin() + 3, v.words().end()),
            (std::vector<std::string>{"b", "a", "c", "d"}));
  EXPECT_EQ(v.id("zzz"), kUnkId);
  for (std::size_t i = 0; i < v.size(); ++i) {
    EXPECT_EQ(v.id(v.word(static_cast<TokenId>(i))), static_cast<TokenId>(i));
  }
  EXPECT_EQ(Vocab::build({"b a c b", "c b d", "a"}, 2).size(), 6u);
  EXPECT_EQ(Vocab::build({"b a c b", "c b d", "a"}, 1, 2).size(), 5u);
  EXPECT_THROW(Vocab::from_words({"x", "x"}), DataError);
  EXPECT_THROW(Vocab::from_words({"<pad>"}), DataError);
  EXPECT_THROW(v.word(99), DataError);
}

TEST(VocabTest, SaveLoadRoundTrip) {
  TempDir dir;
  const Vocab v = Vocab::build({"the cat sat on the mat"});
  v.save(dir / "vocab.txt");
  EXPECT_EQ(Vocab::load(dir / "vocab.txt").words(), v.words());
  write_text(dir / "bad.txt", "<pad>\n<unk>\n<cls>\n");
  EXPECT_THROW(Vocab::load(dir / "bad.txt"), DataError);
}

TEST(VocabTest, EncodeDecodeRoundTrip) {
  const Vocab v = Vocab::build({"the quick brown fox jumps over the lazy dog"});
  Rng rng(5);
  for (int trial = 0; trial < 50; ++trial) {
    TokenSeq ids{kClsId};
    const std::size_t len = 1 + uniform_index(rng, 12);
    for (std::size_t i = 0; i < len; ++i) {
      ids.push_back(static_cast<TokenId>(kFirstWordId + uniform_index(rng, v.size() - kFirstWordId)));
    }
    EXPECT_EQ(encode(decode(ids, v), v, 64), ids);
  }
}

TEST(JsonlTest, NullLabelsJoinUnlabeledPool) {
  TempDir dir;
  write_text(dir / "train.jsonl",
             "{\"label\": 0, \"text\": \"good film\"}\n"
             "{\"label\": null, \"text\": \"some film\"}\n"
             "\n"
             "{\"label\": 1, \"text\": \"bad film\"}\n"
             "{\"text\": \"no label key\"}\n"
             "{\"label\": null, \"text\": \"another\"}\n");
  TextSplits splits;
  splits.train = load_jsonl(dir / "train.jsonl");
  const DatasetBundle b = build_bundle(splits, 2, 16);
  EXPECT_EQ(b.n(), 2u);
  EXPECT_EQ(b.m(), 3u);
  EXPECT_EQ(b.classes, 2u);
}

TEST(JsonlTest, MalformedLinesReportLineNumber) {
  const std::string good = "{\"label\": 1, \"text\": \"x\"}\n";
  auto message = [&](const std::string& bad) {
    try {
      parse_jsonl(good + good + bad, "f.jsonl");
    } catch (const DataError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  EXPECT_NE(message("{not json").find("f.jsonl:3"), std::string::npos);
  EXPECT_NE(message("{\"label\": 1}").find("f.jsonl:3"), std::string::npos);
  EXPECT_NE(message("{\"label\": \"pos\", \"text\": \"x\"}").find("f.jsonl:3"), std::string::npos);
  EXPECT_NE(message("{\"label\": -1, \"text\": \"x\"}").find("f.jsonl:3"), std::string::npos);
  EXPECT_NE(message("[1, 2]").find("f.jsonl:3"), std::string::npos);
}

TEST(JsonlTest, WriteLoadRoundTrip) {
  TempDir dir;
  const std::vector<TextRecord> records{{0, "alpha \"quoted\""}, {std::nullopt, "beta"}, {4, "gamma"}};
  write_jsonl(dir / "out.jsonl", records);
  const auto back = load_jsonl(dir / "out.jsonl");
  ASSERT_EQ(back.size(), records.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].label, records[i].label);
    EXPECT_EQ(back[i].text, records[i].text);
  }
}

TEST(JsonlTest, LabelsBeyondClassCountAreRejected) {
  TextSplits splits;
  splits.train = {{0, "a"}, {1, "b"}};
  splits.test = {{2, "a"}};
  EXPECT_THROW(build_bundle(splits, 2, 8), DataError);
  EXPECT_EQ(build_bundle(splits, 0, 8).classes, 3u);
}

TEST(EmbeddingTest, MatchedRowsParsedPadRowZero) {
  TempDir dir;
  write_text(dir / "vec.txt", "cat 0.1 0.2 0.3\nunseen 1 1 1\n<pad> 5 5 5\n");
  const Vocab v = Vocab::from_words({"cat", "dog"});
  const auto table = load_embeddings(dir / "vec.txt", v, 3, 9);
  ASSERT_EQ(table.size(), v.size() * 3);
  const auto cat = static_cast<std::size_t>(v.id("cat")) * 3;
  EXPECT_FLOAT_EQ(table[cat], 0.1f);
  EXPECT_FLOAT_EQ(table[cat + 1], 0.2f);
  EXPECT_FLOAT_EQ(table[cat + 2], 0.3f);
  for (std::size_t d = 0; d < 3; ++d) EXPECT_EQ(table[d], Real(0));
  const auto dog = static_cast<std::size_t>(v.id("dog")) * 3;
  for (std::size_t d = 0; d < 3; ++d) {
    EXPECT_GE(table[dog + d], Real(-0.05));
    EXPECT_LT(table[dog + d], Real(0.05));
  }
  EXPECT_EQ(load_embeddings(dir / "vec.txt", v, 3, 9), table);
}

TEST(EmbeddingTest, DimensionMismatchIsConfigError) {
  TempDir dir;
  write_text(dir / "vec.txt", "cat 0.1 0.2\n");
  EXPECT_THROW(load_embeddings(dir / "vec.txt", Vocab::from_words({"cat"}), 3, 1), ConfigError);
  write_text(dir / "nan.txt", "cat 0.1 x 0.3\n");
  EXPECT_THROW(load_embeddings(dir / "nan.txt", Vocab::from_words({"cat"}), 3, 1), DataError);
}

SyntheticSpec small_spec() {
  SyntheticSpec s;
  s.keywords_per_class = 8;
  s.injection_rate = 0.3;
  s.labeled = 40;
  s.unlabeled = 200;
  s.dev = 50;
  s.test = 200;
  s.seed = 3;
  return s;
}

// Counts each class's keywords and predicts the most frequent class.
int keyword_vote(const std::string& text, std::size_t classes) {
  std::vector<int> votes(classes, 0);
  for (const auto& w : tokenize(text)) {
    if (w.size() > 1 && w[0] == 'c' && w.find('k') != std::string::npos) {
      ++votes[static_cast<std::size_t>(std::stoi(w.substr(1, w.find('k') - 1)))];
    }
  }
  return static_cast<int>(std::max_element(votes.begin(), votes.end()) - votes.begin());
}

TEST(SyntheticTest, KeywordOracleIsPerfectWithoutNoise) {
  SyntheticSpec s = small_spec();
  s.classes = 4;
  s.injection_rate = 1.0;
  s.label_noise = 0.0;
  const TextSplits t = generate_synthetic_text(s);
  for (const auto& r : t.test) EXPECT_EQ(keyword_vote(r.text, s.classes), *r.label);
}

TEST(SyntheticTest, KeywordSetsDisjoint) {
  SyntheticSpec s = small_spec();
  s.classes = 5;
  std::set<std::string> all;
  std::size_t total = 0;
  for (const auto& set : synthetic_keywords(s)) {
    EXPECT_EQ(set.size(), s.keywords_per_class);
    all.insert(set.begin(), set.end());
    total += set.size();
  }
  EXPECT_EQ(all.size(), total);
}

TEST(SyntheticTest, SameSeedSameBundle) {
  const DatasetBundle a = generate_synthetic(small_spec(), 32);
  const DatasetBundle b = generate_synthetic(small_spec(), 32);
  EXPECT_EQ(a.vocab.words(), b.vocab.words());
  EXPECT_EQ(a.unlabeled, b.unlabeled);
  ASSERT_EQ(a.test.size(), b.test.size());
  for (std::size_t i = 0; i < a.test.size(); ++i) {
    EXPECT_EQ(a.test[i].tokens, b.test[i].tokens);
    EXPECT_EQ(a.test[i].label, b.test[i].label);
  }
  SyntheticSpec other = small_spec();
  other.seed = 4;
  EXPECT_NE(generate_synthetic(other, 32).unlabeled, a.unlabeled);
}

TEST(SyntheticTest, SplitsAreDisjointAndSized) {
  const SyntheticSpec s = small_spec();
  const TextSplits t = generate_synthetic_text(s);
  EXPECT_EQ(t.train.size(), s.labeled);
  EXPECT_EQ(t.unlabeled.size(), s.unlabeled);
  EXPECT_EQ(t.dev.size(), s.dev);
  EXPECT_EQ(t.test.size(), s.test);
  std::unordered_set<std::string> seen;
  for (const auto* split : {&t.train, &t.unlabeled, &t.dev, &t.test}) {
    for (const auto& r : *split) EXPECT_TRUE(seen.insert(r.text).second) << r.text;
  }
  for (const auto& r : t.unlabeled) EXPECT_FALSE(r.label.has_value());
  const DatasetBundle b = build_bundle(t, s.classes, 32);
  EXPECT_EQ(b.n(), s.labeled);
  EXPECT_EQ(b.m(), s.unlabeled);
}

TEST(SyntheticTest, ClassPriorsUniform) {
  SyntheticSpec s = small_spec();
  s.classes = 4;
  s.labeled = 10000;
  s.unlabeled = s.dev = s.test = 1;
  s.label_noise = 0.0;
  std::vector<double> counts(s.classes, 0.0);
  for (const auto& r : generate_synthetic_text(s).train) counts[static_cast<std::size_t>(*r.label)] += 1;
  const double n = static_cast<double>(s.labeled), p = 1.0 / static_cast<double>(s.classes);
  for (double c : counts) EXPECT_NEAR(c / n, p, 5 * std::sqrt(p * (1 - p) / n));
}

TEST(SyntheticTest, LabelNoiseOnlyOnTrainingSplit) {
  SyntheticSpec s = small_spec();
  s.injection_rate = 1.0;
  s.label_noise = 0.3;
  s.labeled = 2000;
  s.test = 500;
  const TextSplits t = generate_synthetic_text(s);
  double flipped = 0;
  for (const auto& r : t.train) flipped += keyword_vote(r.text, s.classes) != *r.label;
  const double n = static_cast<double>(s.labeled);
  EXPECT_NEAR(flipped / n, 0.3, 5 * std::sqrt(0.3 * 0.7 / n));
  for (const auto& r : t.test) EXPECT_EQ(keyword_vote(r.text, s.classes), *r.label);
}

TEST(SyntheticTest, InvalidSpecsRejected) {
  SyntheticSpec s = small_spec();
  s.classes = 1;
  EXPECT_THROW(generate_synthetic_text(s), ConfigError);
  s = small_spec();
  s.injection_rate = 0.0;
  EXPECT_THROW(generate_synthetic_text(s), ConfigError);
  s = small_spec();
  s.min_len = 5;
  s.max_len = 4;
  EXPECT_THROW(generate_synthetic_text(s), ConfigError);
}

DatasetBundle tiny_bundle(std::size_t labeled, std::size_t unlabeled) {
  DatasetBundle b;
  b.vocab = Vocab::from_words({"a", "b", "c", "d", "e", "f", "g"});
  b.classes = 2;
  for (std::size_t i = 0; i < labeled; ++i) {
    b.labeled.push_back({{kClsId, static_cast<TokenId>(3 + i % 7), static_cast<TokenId>(i)},
                         static_cast<int>(i % 2)});
  }
  for (std::size_t j = 0; j < unlabeled; ++j) {
    TokenSeq u{kClsId};
    for (std::size_t k = 0; k <= j % 5; ++k) u.push_back(static_cast<TokenId>(3 + (j + k) % 7));
    u.push_back(static_cast<TokenId>(1000 + j));
    b.unlabeled.push_back(u);
  }
  return b;
}

// The unique marker token carried by each tiny_bundle example.
TokenId marker(const TokenSeq& s, bool labeled) {
  if (labeled) return s[2];
  TokenId m = -1;
  for (TokenId t : s) {
    if (t >= 1000) m = t;
  }
  return m;
}

TEST(BatchTest, LabeledOnlyBatchSizes) {
  BatchOptions o;
  o.labeled_batch = 4;
  o.use_unlabeled = false;
  const auto steps = make_batches(tiny_bundle(10, 0), o, {}, nullptr, 1, 0);
  ASSERT_EQ(steps.size(), 3u);
  EXPECT_EQ(steps[0].labeled.size(), 4u);
  EXPECT_EQ(steps[1].labeled.size(), 4u);
  EXPECT_EQ(steps[2].labeled.size(), 2u);
  std::multiset<TokenId> seen;
  for (const auto& s : steps) {
    EXPECT_TRUE(s.unlabeled.empty());
    for (const auto& x : s.labeled.tokens) seen.insert(marker(x, true));
  }
  EXPECT_EQ(seen.size(), 10u);
  EXPECT_EQ(std::set<TokenId>(seen.begin(), seen.end()).size(), 10u);
  EXPECT_THROW(make_batches(tiny_bundle(0, 5), o, {}, nullptr, 1, 0), DataError);
}

TEST(BatchTest, UnlabeledPairsShareLength) {
  BatchOptions o;
  o.labeled_batch = 2;
  o.unsup_ratio = 3;
  o.min_len = 5;
  const auto steps = make_batches(tiny_bundle(6, 40), o, {AugmentKind::kTokenDropout, 0.5, 0}, nullptr, 2, 0);
  // ceil(40 / 6) = 7 unlabeled batches against 3 labeled ones.
  ASSERT_EQ(steps.size(), 7u);
  std::set<TokenId> unlabeled_seen;
  for (const auto& s : steps) {
    EXPECT_EQ(s.unlabeled.original.size(), s.unlabeled.augmented.size());
    for (std::size_t i = 0; i < s.unlabeled.original.size(); ++i) {
      EXPECT_EQ(s.unlabeled.original[i].size(), s.unlabeled.augmented[i].size());
      EXPECT_GE(s.unlabeled.original[i].size(), o.min_len);
      unlabeled_seen.insert(marker(s.unlabeled.original[i], false));
    }
    for (const auto& x : s.labeled.tokens) EXPECT_GE(x.size(), o.min_len);
    EXPECT_FALSE(s.labeled.empty());
  }
  EXPECT_EQ(unlabeled_seen.size(), 40u);
}

TEST(BatchTest, ShorterUnlabeledStreamCycles) {
  BatchOptions o;
  o.labeled_batch = 1;
  o.unsup_ratio = 1;
  const auto steps = make_batches(tiny_bundle(9, 4), o, {}, nullptr, 3, 0);
  ASSERT_EQ(steps.size(), 9u);
  for (const auto& s : steps) EXPECT_EQ(s.unlabeled.size(), 1u);
}

TEST(BatchTest, DeterministicPerSeedAndEpoch) {
  BatchOptions o;
  o.labeled_batch = 4;
  const DatasetBundle b = tiny_bundle(20, 60);
  const AugmentPolicy p{AugmentKind::kUniformReplace, 0.3, 0};
  auto flatten = [](const std::vector<TrainingStep>& steps) {
    std::vector<TokenSeq> all;
    for (const auto& s : steps) {
      all.insert(all.end(), s.labeled.tokens.begin(), s.labeled.tokens.end());
      all.insert(all.end(), s.unlabeled.augmented.begin(), s.unlabeled.augmented.end());
    }
    return all;
  };
  EXPECT_EQ(flatten(make_batches(b, o, p, nullptr, 5, 0)), flatten(make_batches(b, o, p, nullptr, 5, 0)));
  int differing = 0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    if (flatten(make_batches(b, o, p, nullptr, seed, 0)) != flatten(make_batches(b, o, p, nullptr, seed, 1))) {
      ++differing;
    }
  }
  EXPECT_EQ(differing, 20);
}

TEST(BatchTest, TestSplitNeverReachesTraining) {
  const DatasetBundle b = generate_synthetic(small_spec(), 32);
  std::unordered_set<std::string> test_hashes;
  auto key = [](const TokenSeq& s) {
    TokenSeq trimmed = s;
    while (!trimmed.empty() && trimmed.back() == kPadId) trimmed.pop_back();
    return std::string(reinterpret_cast<const char*>(trimmed.data()), trimmed.size() * sizeof(TokenId));
  };
  for (const auto& e : b.test) test_hashes.insert(key(e.tokens));
  BatchOptions o;
  for (std::size_t epoch = 0; epoch < 2; ++epoch) {
    for (const auto& s : make_batches(b, o, {}, nullptr, 1, epoch)) {
      for (const auto& x : s.labeled.tokens) EXPECT_EQ(test_hashes.count(key(x)), 0u);
      for (const auto& u : s.unlabeled.original) EXPECT_EQ(test_hashes.count(key(u)), 0u);
    }
  }
}

}  // namespace
}  // namespace textdistill
