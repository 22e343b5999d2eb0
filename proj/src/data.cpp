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

#include "textdistill/data.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>
#include <unordered_set>

#include "json.hpp"
#include "textdistill/errors.hpp"

namespace textdistill {

namespace {

constexpr std::uint64_t kLabeledStream = 11;
constexpr std::uint64_t kUnlabeledStream = 12;
constexpr std::uint64_t kAugmentStream = 13;

const char* const kReserved[] = {"<pad>", "<cls>", "<unk>"};

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string_view> split_lines(std::string_view content) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start <= content.size()) {
    const std::size_t end = content.find('\n', start);
    if (end == std::string_view::npos) {
      if (start < content.size()) lines.push_back(content.substr(start));
      break;
    }
    lines.push_back(content.substr(start, end - start));
    start = end + 1;
  }
  for (auto& l : lines) {
    if (!l.empty() && l.back() == '\r') l.remove_suffix(1);
  }
  return lines;
}

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

std::vector<std::size_t> batch_order(std::size_t count, std::uint64_t seed) {
  std::vector<std::size_t> order(count);
  for (std::size_t i = 0; i < count; ++i) order[i] = i;
  Rng rng(seed);
  shuffle(order, rng);
  return order;
}

std::size_t ceil_div(std::size_t a, std::size_t b) { return (a + b - 1) / b; }

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
  std::vector<std::string> out;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) out.push_back(std::move(current));
    current.clear();
  };
  for (char ch : text) {
    const auto c = static_cast<unsigned char>(ch);
    if (std::isspace(c)) {
      flush();
    } else if (c < 0x80 && std::ispunct(c)) {
      flush();
      out.emplace_back(1, ch);
    } else {
      current.push_back(c < 0x80 ? static_cast<char>(std::tolower(c)) : ch);
    }
  }
  flush();
  return out;
}

// ---------------------------------------------------------------------------
// Vocab

Vocab::Vocab() {
  for (const char* w : kReserved) append(w);
}

void Vocab::append(std::string word) {
  if (index_.count(word) != 0) throw DataError("vocabulary: duplicate entry \"" + word + "\"");
  index_.emplace(word, static_cast<TokenId>(words_.size()));
  words_.push_back(std::move(word));
}

Vocab Vocab::build(const std::vector<std::string>& texts, std::size_t min_count,
                   std::size_t max_words) {
  std::map<std::string, std::size_t> counts;
  for (const auto& t : texts) {
    for (auto& w : tokenize(t)) ++counts[w];
  }
  std::vector<std::pair<std::string, std::size_t>> ranked(counts.begin(), counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });
  Vocab v;
  for (auto& [word, count] : ranked) {
    if (count < min_count) break;
    if (max_words != 0 && v.size() - kFirstWordId >= max_words) break;
    if (v.contains(word)) continue;
    v.append(word);
  }
  return v;
}

Vocab Vocab::from_words(const std::vector<std::string>& words) {
  Vocab v;
  for (const auto& w : words) v.append(w);
  return v;
}

Vocab Vocab::load(const std::filesystem::path& path) {
  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  if (lines.size() < std::size(kReserved)) {
    throw DataError(path.string() + ": vocabulary lacks the reserved entries");
  }
  for (std::size_t i = 0; i < std::size(kReserved); ++i) {
    if (lines[i] != kReserved[i]) {
      throw DataError(path.string() + ":" + std::to_string(i + 1) + ": expected reserved entry " +
                      kReserved[i]);
    }
  }
  Vocab v;
  for (std::size_t i = std::size(kReserved); i < lines.size(); ++i) {
    if (lines[i].empty()) throw DataError(path.string() + ":" + std::to_string(i + 1) + ": empty entry");
    v.append(std::string(lines[i]));
  }
  return v;
}

void Vocab::save(const std::filesystem::path& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& w : words_) out << w << '\n';
}

TokenId Vocab::id(std::string_view word) const {
  const auto it = index_.find(std::string(word));
  return it == index_.end() ? kUnkId : it->second;
}

const std::string& Vocab::word(TokenId id) const {
  if (id < 0 || static_cast<std::size_t>(id) >= words_.size()) {
    throw DataError("token id " + std::to_string(id) + " outside the vocabulary");
  }
  return words_[static_cast<std::size_t>(id)];
}

bool Vocab::contains(std::string_view word) const {
  return index_.count(std::string(word)) != 0;
}

TokenSeq encode(std::string_view text, const Vocab& vocab, std::size_t max_len) {
  if (max_len == 0) throw ConfigError("encode: max_len must be >= 1");
  TokenSeq out{kClsId};
  for (const auto& w : tokenize(text)) {
    if (out.size() >= max_len) break;
    out.push_back(vocab.id(w));
  }
  return out;
}

std::string decode(std::span<const TokenId> ids, const Vocab& vocab) {
  std::string out;
  for (TokenId id : ids) {
    if (id == kClsId || id == kPadId) continue;
    if (!out.empty()) out.push_back(' ');
    out += vocab.word(id);
  }
  return out;
}

void pad_batch(std::vector<TokenSeq>& batch, std::size_t min_len) {
  std::size_t len = min_len;
  for (const auto& s : batch) len = std::max(len, s.size());
  for (auto& s : batch) s.resize(len, kPadId);
}

// ---------------------------------------------------------------------------
// JSONL

std::vector<TextRecord> parse_jsonl(std::string_view content, std::string_view source) {
  std::vector<TextRecord> out;
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = std::string(source) + ":" + std::to_string(i + 1) + ": ";
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(lines[i]);
    } catch (const nlohmann::json::exception& e) {
      throw DataError(where + "malformed JSON (" + e.what() + ")");
    }
    if (!j.is_object()) throw DataError(where + "expected an object");
    const auto text = j.find("text");
    if (text == j.end() || !text->is_string()) throw DataError(where + "\"text\" must be a string");
    TextRecord r;
    r.text = text->get<std::string>();
    const auto label = j.find("label");
    if (label != j.end() && !label->is_null()) {
      if (!label->is_number_integer()) throw DataError(where + "\"label\" must be an integer or null");
      const auto v = label->get<long long>();
      if (v < 0) throw DataError(where + "negative label");
      r.label = static_cast<int>(v);
    }
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<TextRecord> load_jsonl(const std::filesystem::path& path) {
  return parse_jsonl(read_file(path), path.string());
}

void write_jsonl(const std::filesystem::path& path, const std::vector<TextRecord>& records) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot write " + path.string());
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["label"] = r.label ? nlohmann::ordered_json(*r.label) : nlohmann::ordered_json(nullptr);
    j["text"] = r.text;
    out << j.dump() << '\n';
  }
}

// ---------------------------------------------------------------------------
// Bundles

std::vector<LabeledExample> encode_labeled(const std::vector<TextRecord>& records,
                                           const Vocab& vocab, std::size_t max_len,
                                           std::size_t classes) {
  std::vector<LabeledExample> out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    if (!r.label) throw DataError("record " + std::to_string(i + 1) + " has no label");
    if (classes != 0 && static_cast<std::size_t>(*r.label) >= classes) {
      throw DataError("record " + std::to_string(i + 1) + ": label " + std::to_string(*r.label) +
                      " >= class count " + std::to_string(classes));
    }
    out.push_back({encode(r.text, vocab, max_len), *r.label});
  }
  return out;
}

DatasetBundle build_bundle(const TextSplits& splits, std::size_t classes, std::size_t max_len,
                           const Vocab* vocab) {
  DatasetBundle b;
  if (vocab != nullptr) {
    b.vocab = *vocab;
  } else {
    std::vector<std::string> texts;
    for (const auto& r : splits.train) texts.push_back(r.text);
    for (const auto& r : splits.unlabeled) texts.push_back(r.text);
    b.vocab = Vocab::build(texts);
  }
  if (classes == 0) {
    int top = -1;
    for (const auto* split : {&splits.train, &splits.dev, &splits.test}) {
      for (const auto& r : *split) {
        if (r.label) top = std::max(top, *r.label);
      }
    }
    classes = static_cast<std::size_t>(top + 1);
  }
  if (classes < 2) throw ConfigError("dataset: need at least 2 classes");
  b.classes = classes;

  std::vector<TextRecord> train_labeled;
  for (const auto& r : splits.train) {
    if (r.label) {
      train_labeled.push_back(r);
    } else {
      b.unlabeled.push_back(encode(r.text, b.vocab, max_len));
    }
  }
  for (const auto& r : splits.unlabeled) b.unlabeled.push_back(encode(r.text, b.vocab, max_len));
  b.labeled = encode_labeled(train_labeled, b.vocab, max_len, classes);
  b.dev = encode_labeled(splits.dev, b.vocab, max_len, classes);
  b.test = encode_labeled(splits.test, b.vocab, max_len, classes);
  return b;
}

// ---------------------------------------------------------------------------
// Synthetic corpus

void SyntheticSpec::validate() const {
  if (classes < 2) throw ConfigError("synthetic: need at least 2 classes");
  if (background_words < 1 || keywords_per_class < 1) {
    throw ConfigError("synthetic: background_words and keywords_per_class must be positive");
  }
  if (min_len < 1 || max_len < min_len) {
    throw ConfigError("synthetic: need 1 <= min_len <= max_len");
  }
  if (!(injection_rate > 0.0 && injection_rate <= 1.0)) {
    throw ConfigError("synthetic: injection_rate must be in (0, 1]");
  }
  if (!(label_noise >= 0.0 && label_noise < 1.0)) {
    throw ConfigError("synthetic: label_noise must be in [0, 1)");
  }
}

std::vector<std::vector<std::string>> synthetic_keywords(const SyntheticSpec& spec) {
  std::vector<std::vector<std::string>> out(spec.classes);
  for (std::size_t c = 0; c < spec.classes; ++c) {
    for (std::size_t j = 0; j < spec.keywords_per_class; ++j) {
      out[c].push_back("c" + std::to_string(c) + "k" + std::to_string(j));
    }
  }
  return out;
}

TextSplits generate_synthetic_text(const SyntheticSpec& spec) {
  spec.validate();
  const auto keywords = synthetic_keywords(spec);
  Rng rng(spec.seed);
  std::unordered_set<std::string> seen;

  auto make = [&](bool keep_label, bool noisy) {
    for (;;) {
      const auto y = static_cast<std::size_t>(uniform_index(rng, spec.classes));
      const std::size_t len =
          spec.min_len + static_cast<std::size_t>(uniform_index(rng, spec.max_len - spec.min_len + 1));
      std::vector<std::string> words(len);
      bool injected = false;
      for (auto& w : words) {
        if (bernoulli(rng, spec.injection_rate)) {
          w = keywords[y][uniform_index(rng, spec.keywords_per_class)];
          injected = true;
        } else {
          w = "w" + std::to_string(uniform_index(rng, spec.background_words));
        }
      }
      if (!injected) {
        words[uniform_index(rng, len)] = keywords[y][uniform_index(rng, spec.keywords_per_class)];
      }
      std::size_t label = y;
      if (noisy && spec.label_noise > 0.0 && bernoulli(rng, spec.label_noise)) {
        label = (y + 1 + uniform_index(rng, spec.classes - 1)) % spec.classes;
      }
      std::string text;
      for (const auto& w : words) {
        if (!text.empty()) text.push_back(' ');
        text += w;
      }
      if (!seen.insert(text).second) continue;
      TextRecord r;
      if (keep_label) r.label = static_cast<int>(label);
      r.text = std::move(text);
      return r;
    }
  };

  TextSplits s;
  for (std::size_t i = 0; i < spec.labeled; ++i) s.train.push_back(make(true, true));
  for (std::size_t i = 0; i < spec.unlabeled; ++i) s.unlabeled.push_back(make(false, false));
  for (std::size_t i = 0; i < spec.dev; ++i) s.dev.push_back(make(true, false));
  for (std::size_t i = 0; i < spec.test; ++i) s.test.push_back(make(true, false));
  return s;
}

DatasetBundle generate_synthetic(const SyntheticSpec& spec, std::size_t max_len) {
  return build_bundle(generate_synthetic_text(spec), spec.classes, max_len);
}

// ---------------------------------------------------------------------------
// Embeddings

std::vector<Real> load_embeddings(const std::filesystem::path& path, const Vocab& vocab,
                                  std::size_t dim, std::uint64_t seed) {
  if (dim == 0) throw ConfigError("embeddings: dim must be positive");
  std::vector<Real> table(vocab.size() * dim);
  Rng rng(seed);
  for (Real& v : table) v = static_cast<Real>(uniform(rng, -0.05, 0.05));

  const std::string content = read_file(path);
  const auto lines = split_lines(content);
  for (std::size_t i = 0; i < lines.size(); ++i) {
    if (blank(lines[i])) continue;
    const std::string where = path.string() + ":" + std::to_string(i + 1) + ": ";
    std::vector<std::string_view> fields;
    std::string_view line = lines[i];
    std::size_t pos = 0;
    while (pos < line.size()) {
      while (pos < line.size() && line[pos] == ' ') ++pos;
      if (pos >= line.size()) break;
      const std::size_t end = std::min(line.find(' ', pos), line.size());
      fields.push_back(line.substr(pos, end - pos));
      pos = end;
    }
    if (fields.size() != dim + 1) {
      throw ConfigError(where + "expected " + std::to_string(dim) + " values, found " +
                        std::to_string(fields.size() - 1));
    }
    std::vector<Real> row(dim);
    for (std::size_t d = 0; d < dim; ++d) {
      double v = 0;
      const auto f = fields[d + 1];
      const auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (res.ec != std::errc() || res.ptr != f.data() + f.size()) {
        throw DataError(where + "bad number \"" + std::string(f) + "\"");
      }
      row[d] = static_cast<Real>(v);
    }
    if (!vocab.contains(fields[0])) continue;
    const auto id = static_cast<std::size_t>(vocab.id(fields[0]));
    std::copy(row.begin(), row.end(), table.begin() + static_cast<std::ptrdiff_t>(id * dim));
  }
  std::fill_n(table.begin() + static_cast<std::ptrdiff_t>(kPadId) * static_cast<std::ptrdiff_t>(dim),
              dim, Real(0));
  return table;
}

// ---------------------------------------------------------------------------
// Batches

std::vector<TrainingStep> make_batches(const DatasetBundle& bundle, const BatchOptions& options,
                                       const AugmentPolicy& policy, const TfidfTable* tfidf,
                                       std::uint64_t seed, std::size_t epoch) {
  if (options.labeled_batch == 0) throw ConfigError("labeled batch size must be positive");
  if (bundle.labeled.empty()) throw DataError("no labeled examples to train on");
  const std::size_t n = bundle.labeled.size();
  const std::size_t bl = options.labeled_batch;
  const std::size_t nb_l = ceil_div(n, bl);

  std::size_t steps = nb_l;
  std::size_t bu = 0, nb_u = 0;
  if (options.use_unlabeled) {
    if (bundle.unlabeled.empty()) throw DataError("no unlabeled examples for semi-supervised training");
    if (options.unsup_ratio == 0) throw ConfigError("unsup_ratio must be positive");
    bu = bl * options.unsup_ratio;
    nb_u = ceil_div(bundle.unlabeled.size(), bu);
    steps = std::max(nb_l, nb_u);
  }

  std::vector<TrainingStep> out(steps);
  std::vector<std::size_t> order;
  for (std::size_t s = 0; s < steps; ++s) {
    const std::size_t pass = s / nb_l, slot = s % nb_l;
    if (slot == 0) order = batch_order(n, derive_seed(seed, {kLabeledStream, epoch, pass}));
    auto& lb = out[s].labeled;
    for (std::size_t i = slot * bl; i < std::min(n, (slot + 1) * bl); ++i) {
      lb.tokens.push_back(bundle.labeled[order[i]].tokens);
      lb.labels.push_back(bundle.labeled[order[i]].label);
    }
    pad_batch(lb.tokens, options.min_len);
  }

  if (options.use_unlabeled) {
    const std::size_t m = bundle.unlabeled.size();
    Rng aug_rng(derive_seed(seed, {kAugmentStream, epoch}));
    for (std::size_t s = 0; s < steps; ++s) {
      const std::size_t pass = s / nb_u, slot = s % nb_u;
      if (slot == 0) order = batch_order(m, derive_seed(seed, {kUnlabeledStream, epoch, pass}));
      auto& ub = out[s].unlabeled;
      for (std::size_t i = slot * bu; i < std::min(m, (slot + 1) * bu); ++i) {
        const TokenSeq& u = bundle.unlabeled[order[i]];
        ub.original.push_back(u);
        ub.augmented.push_back(augment(u, policy, bundle.vocab.size(), tfidf, aug_rng));
      }
      std::size_t len = options.min_len;
      for (const auto& u : ub.original) len = std::max(len, u.size());
      for (auto& u : ub.original) u.resize(len, kPadId);
      for (auto& a : ub.augmented) a.resize(len, kPadId);
    }
  }
  return out;
}

}  // namespace textdistill
