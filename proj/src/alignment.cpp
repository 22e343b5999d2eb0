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

#include "textdistill/alignment.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <sstream>

#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

class Cursor {
 public:
  explicit Cursor(std::string_view text) : text_(text) {}

  void skip_space() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }
  bool at_end() {
    skip_space();
    return pos_ >= text_.size();
  }
  void expect(char c) {
    skip_space();
    if (pos_ >= text_.size() || text_[pos_] != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }
  bool consume(char c) {
    skip_space();
    if (pos_ < text_.size() && text_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  std::size_t number() {
    skip_space();
    const std::size_t start = pos_;
    while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
    if (start == pos_) fail("expected a non-negative integer");
    return std::stoul(std::string(text_.substr(start, pos_ - start)));
  }
  std::vector<std::size_t> list() {
    std::vector<std::size_t> out;
    expect('{');
    if (consume('}')) return out;
    do {
      out.push_back(number());
    } while (consume(','));
    expect('}');
    return out;
  }
  [[noreturn]] void fail(const std::string& what) const {
    throw ConfigError("alignment spec \"" + std::string(text_) + "\": " + what +
                      " at offset " + std::to_string(pos_));
  }

 private:
  std::string_view text_;
  std::size_t pos_ = 0;
};

std::string join(const std::vector<std::size_t>& v) {
  std::ostringstream os;
  os << '{';
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (i) os << ',';
    os << v[i];
  }
  os << '}';
  return os.str();
}

std::vector<std::size_t> subsample(const std::vector<std::size_t>& v, std::size_t k) {
  if (k >= v.size()) return v;
  if (k == 1) return {v.back()};
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < k; ++i) {
    const double pos = static_cast<double>(i) * static_cast<double>(v.size() - 1) /
                       static_cast<double>(k - 1);
    out.push_back(v[static_cast<std::size_t>(std::lround(pos))]);
  }
  return out;
}

}  // namespace

AlignmentSpec::AlignmentSpec(std::vector<AlignmentPair> pairs) : pairs_(std::move(pairs)) {
  for (std::size_t i = 0; i < pairs_.size(); ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      if (pairs_[i] == pairs_[j]) {
        throw ConfigError("alignment spec repeats pair (" + std::to_string(pairs_[i].layer) +
                          ", " + std::to_string(pairs_[i].filter_size) + ")");
      }
    }
  }
}

AlignmentSpec AlignmentSpec::parse(std::string_view text) {
  Cursor cur(text);
  const auto layers = cur.list();
  cur.expect('-');
  const auto sizes = cur.list();
  if (!cur.at_end()) cur.fail("trailing characters");
  if (layers.size() != sizes.size()) {
    cur.fail("layer list has " + std::to_string(layers.size()) + " entries, size list " +
             std::to_string(sizes.size()));
  }
  std::vector<AlignmentPair> pairs;
  for (std::size_t i = 0; i < layers.size(); ++i) pairs.push_back({layers[i], sizes[i]});
  return AlignmentSpec(std::move(pairs));
}

AlignmentSpec AlignmentSpec::monotone(std::size_t layers,
                                      const std::vector<std::size_t>& filter_sizes) {
  std::vector<std::size_t> ls(layers);
  for (std::size_t i = 0; i < layers; ++i) ls[i] = i;
  std::vector<std::size_t> ks = filter_sizes;
  std::sort(ks.begin(), ks.end());
  const std::size_t n = std::min(ls.size(), ks.size());
  ls = subsample(ls, n);
  ks = subsample(ks, n);
  std::vector<AlignmentPair> pairs;
  for (std::size_t i = 0; i < n; ++i) pairs.push_back({ls[i], ks[i]});
  return AlignmentSpec(std::move(pairs));
}

std::string AlignmentSpec::str() const {
  std::vector<std::size_t> ls, ks;
  for (const auto& p : pairs_) {
    ls.push_back(p.layer);
    ks.push_back(p.filter_size);
  }
  return join(ls) + "-" + join(ks);
}

std::vector<std::size_t> AlignmentSpec::layers() const {
  std::vector<std::size_t> out;
  for (const auto& p : pairs_) {
    if (std::find(out.begin(), out.end(), p.layer) == out.end()) out.push_back(p.layer);
  }
  return out;
}

std::vector<std::size_t> AlignmentSpec::filter_sizes() const {
  std::vector<std::size_t> out;
  for (const auto& p : pairs_) {
    if (std::find(out.begin(), out.end(), p.filter_size) == out.end()) {
      out.push_back(p.filter_size);
    }
  }
  return out;
}

void AlignmentSpec::validate(std::size_t layer_count,
                             const std::vector<std::size_t>& available_sizes) const {
  for (const auto& p : pairs_) {
    if (p.layer >= layer_count) {
      throw ConfigError("alignment " + str() + ": layer " + std::to_string(p.layer) +
                        " out of range for " + std::to_string(layer_count) + " layers");
    }
    if (std::find(available_sizes.begin(), available_sizes.end(), p.filter_size) ==
        available_sizes.end()) {
      throw ConfigError("alignment " + str() + ": no filter bank of size " +
                        std::to_string(p.filter_size));
    }
  }
}

}  // namespace textdistill
