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
#include <string>
#include <string_view>
#include <vector>

namespace textdistill {

// One feature-distillation link: transformer layer `layer` is matched with
// the CNN filter bank of width `filter_size`.
struct AlignmentPair {
  std::size_t layer = 0;
  std::size_t filter_size = 0;
  bool operator==(const AlignmentPair&) const = default;
};

// Ordered list of unique layer/filter links, written "{l,...}-{k,...}" with
// the two lists paired positionally, e.g. "{0,1,2}-{2,3,5}".
class AlignmentSpec {
 public:
  AlignmentSpec() = default;
  explicit AlignmentSpec(std::vector<AlignmentPair> pairs);

  static AlignmentSpec parse(std::string_view text);

  // Sorted layers paired with sorted sizes; the longer list is evenly
  // subsampled down to the length of the shorter one.
  static AlignmentSpec monotone(std::size_t layers,
                                const std::vector<std::size_t>& filter_sizes);

  std::string str() const;
  const std::vector<AlignmentPair>& pairs() const { return pairs_; }
  bool empty() const { return pairs_.empty(); }
  std::size_t size() const { return pairs_.size(); }

  // Distinct layers / sizes in first-appearance order.
  std::vector<std::size_t> layers() const;
  std::vector<std::size_t> filter_sizes() const;

  // Throws ConfigError when a layer is >= `layer_count` or a size is not in
  // `available_sizes`.
  void validate(std::size_t layer_count,
                const std::vector<std::size_t>& available_sizes) const;

  bool operator==(const AlignmentSpec&) const = default;

 private:
  std::vector<AlignmentPair> pairs_;
};

}  // namespace textdistill
