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
#include <string>
#include <string_view>
#include <vector>

#include "textdistill/batch.hpp"
#include "textdistill/rng.hpp"

namespace textdistill {

enum class AugmentKind { kTokenDropout, kUniformReplace, kTfidfReplace };

std::string to_string(AugmentKind kind);
AugmentKind parse_augment_kind(std::string_view name);

struct AugmentPolicy {
  AugmentKind kind = AugmentKind::kTokenDropout;
  double rate = 0.3;
  std::uint64_t seed = 0;

  void validate() const;
};

// Per-token-id scores in [0, 1]; ids never seen in the corpus score 0.
struct TfidfTable {
  std::vector<double> idf;
  std::vector<double> score;
};

// Documents are token-id sequences; special ids are ignored. The table is
// sized to vocab_size.
TfidfTable build_tfidf_table(const std::vector<TokenSeq>& corpus, std::size_t vocab_size);

// Perturbs word tokens; the classification token and pads are left alone and
// length is preserved. Replacements are drawn uniformly from the word ids
// [kFirstWordId, vocab_size). tfidf is required for kTfidfReplace.
TokenSeq augment(std::span<const TokenId> tokens, const AugmentPolicy& policy,
                 std::size_t vocab_size, const TfidfTable* tfidf, Rng& rng);
// Same, seeded from policy.seed.
TokenSeq augment(std::span<const TokenId> tokens, const AugmentPolicy& policy,
                 std::size_t vocab_size, const TfidfTable* tfidf = nullptr);

}  // namespace textdistill
