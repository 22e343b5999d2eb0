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
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "textdistill/augmentation.hpp"
#include "textdistill/batch.hpp"
#include "textdistill/tensor.hpp"
#include "textdistill/tokens.hpp"

namespace textdistill {

// Lowercases ASCII letters and splits on whitespace; every ASCII punctuation
// character becomes a token of its own.
std::vector<std::string> tokenize(std::string_view text);

class Vocab {
 public:
  // Only the reserved entries.
  Vocab();

  // Words ordered by descending frequency, ties broken lexicographically.
  // max_words == 0 keeps every word with count >= min_count.
  static Vocab build(const std::vector<std::string>& texts, std::size_t min_count = 1,
                     std::size_t max_words = 0);
  // Appends the given words after the reserved ids, in order.
  static Vocab from_words(const std::vector<std::string>& words);
  // One word per line, reserved entries first.
  static Vocab load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  TokenId id(std::string_view word) const;
  const std::string& word(TokenId id) const;
  bool contains(std::string_view word) const;
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  void append(std::string word);

  std::vector<std::string> words_;
  std::unordered_map<std::string, TokenId> index_;
};

// [CLS] followed by word ids, truncated to max_len in total.
TokenSeq encode(std::string_view text, const Vocab& vocab, std::size_t max_len);
// Words joined by single spaces; [CLS] and pads are dropped.
std::string decode(std::span<const TokenId> ids, const Vocab& vocab);
// Right-pads every sequence with kPadId to max(longest, min_len).
void pad_batch(std::vector<TokenSeq>& batch, std::size_t min_len);

struct TextRecord {
  std::optional<int> label;
  std::string text;
};

std::vector<TextRecord> load_jsonl(const std::filesystem::path& path);
std::vector<TextRecord> parse_jsonl(std::string_view content, std::string_view source);
void write_jsonl(const std::filesystem::path& path, const std::vector<TextRecord>& records);

struct LabeledExample {
  TokenSeq tokens;
  int label = 0;
};

struct DatasetBundle {
  Vocab vocab;
  std::size_t classes = 0;
  std::vector<LabeledExample> labeled;
  std::vector<TokenSeq> unlabeled;
  std::vector<LabeledExample> dev;
  std::vector<LabeledExample> test;

  std::size_t n() const { return labeled.size(); }
  std::size_t m() const { return unlabeled.size(); }
};

struct TextSplits {
  std::vector<TextRecord> train;      // null labels join the unlabeled pool
  std::vector<TextRecord> unlabeled;  // labels ignored
  std::vector<TextRecord> dev;
  std::vector<TextRecord> test;
};

// Builds the vocabulary from the training and unlabeled text and encodes
// every split. classes == 0 infers the count from the largest label seen.
DatasetBundle build_bundle(const TextSplits& splits, std::size_t classes, std::size_t max_len,
                           const Vocab* vocab = nullptr);
// Encodes a labeled file against an existing vocabulary.
std::vector<LabeledExample> encode_labeled(const std::vector<TextRecord>& records,
                                           const Vocab& vocab, std::size_t max_len,
                                           std::size_t classes);

struct SyntheticSpec {
  std::size_t classes = 2;
  std::size_t background_words = 400;
  std::size_t keywords_per_class = 10;
  std::size_t min_len = 10;
  std::size_t max_len = 20;
  double injection_rate = 0.5;
  double label_noise = 0.1;  // flips labels of the labeled training split only
  std::size_t labeled = 20;
  std::size_t unlabeled = 2000;
  std::size_t dev = 400;
  std::size_t test = 1000;
  std::uint64_t seed = 1;

  void validate() const;
};

// Keyword strings of class c, in generation order.
std::vector<std::vector<std::string>> synthetic_keywords(const SyntheticSpec& spec);
// Raw text splits; no text appears in more than one split.
TextSplits generate_synthetic_text(const SyntheticSpec& spec);
DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::size_t max_len);

// Rows of the [vocab.size() x dim] table: matched words take the file's
// vector, the rest are drawn from uniform(-0.05, 0.05); the pad row is zero.
std::vector<Real> load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                  std::size_t dim, std::uint64_t seed);

struct BatchOptions {
  std::size_t labeled_batch = 4;
  std::size_t unsup_ratio = 3;
  bool use_unlabeled = true;
  std::size_t min_len = 1;  // floor for padded length, e.g. the widest filter
};

struct TrainingStep {
  LabeledBatch labeled;
  UnlabeledBatch unlabeled;
};

// One epoch of steps. With unlabeled data the epoch covers the longer of
// the two streams once and cycles the shorter one, reshuffling it on every
// pass. Without it, the labeled pool is covered once.
std::vector<TrainingStep> make_batches(const DatasetBundle& bundle, const BatchOptions& options,
                                       const AugmentPolicy& policy, const TfidfTable* tfidf,
                                       std::uint64_t seed, std::size_t epoch);

}  // namespace textdistill
