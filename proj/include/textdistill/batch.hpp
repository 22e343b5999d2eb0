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

#include <vector>

#include "textdistill/ops.hpp"

namespace textdistill {

using TokenSeq = std::vector<TokenId>;

struct LabeledBatch {
  std::vector<TokenSeq> tokens;
  std::vector<int> labels;

  std::size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
};

// original[j] is u_j, augmented[j] its noised version a_j (same length).
struct UnlabeledBatch {
  std::vector<TokenSeq> original;
  std::vector<TokenSeq> augmented;

  std::size_t size() const { return original.size(); }
  bool empty() const { return original.empty(); }
};

}  // namespace textdistill
