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

#include "textdistill/efficiency.hpp"

#include <chrono>
#include <cmath>

#include "textdistill/errors.hpp"
#include "textdistill/ops.hpp"

namespace textdistill {

std::size_t count_params(const InspirerConfig& c) {
  const std::size_t d = c.hidden;
  const std::size_t embeddings = c.vocab_size * d + c.max_len * d + 2 * d;
  const std::size_t attention = 4 * (d * d + d);
  const std::size_t feed_forward = d * c.ff_dim + c.ff_dim + c.ff_dim * d + d;
  const std::size_t norms = 4 * d;
  const std::size_t head = d * c.mlp_hidden + c.mlp_hidden + c.mlp_hidden * c.classes + c.classes;
  return embeddings + c.layers * (attention + feed_forward + norms) + head;
}

std::size_t count_params(const TargetConfig& c) {
  std::size_t n = c.vocab_size * c.emb_dim;
  for (std::size_t k : c.filter_sizes) n += k * c.emb_dim * c.channels + c.channels;
  return n + c.pooled_dim() * c.classes + c.classes;
}

std::size_t projection_params(const InspirerConfig& c) {
  return c.layers * (c.hidden * c.projection_dim + c.projection_dim);
}

std::size_t projection_params(const TargetConfig& c) {
  return c.filter_sizes.size() * (c.channels * c.projection_dim + c.projection_dim);
}

FlopEstimate estimate_flops(const InspirerConfig& c, std::size_t n) {
  if (n == 0) throw PreconditionError("estimate_flops: sequence length must be >= 1");
  const std::uint64_t d = c.hidden, L = c.layers, ff = c.ff_dim, nn = n;
  FlopEstimate e;
  e.breakdown["attention_projections"] = L * 2 * (4 * nn * d * d);
  e.breakdown["attention_scores_and_mixing"] = L * 2 * (2 * nn * nn * d);
  e.breakdown["feed_forward"] = L * 2 * (2 * nn * d * ff);
  e.breakdown["classifier"] = 2 * (d * c.mlp_hidden + c.mlp_hidden * c.classes);
  for (const auto& [name, v] : e.breakdown) e.total += v;
  return e;
}

FlopEstimate estimate_flops(const TargetConfig& c, std::size_t n) {
  if (n == 0) throw PreconditionError("estimate_flops: sequence length must be >= 1");
  if (n < c.widest_filter()) {
    throw PreconditionError("estimate_flops: sequence shorter than the widest filter");
  }
  FlopEstimate e;
  for (std::size_t k : c.filter_sizes) {
    e.breakdown["conv" + std::to_string(k)] =
        2ULL * k * c.emb_dim * c.channels * (n - k + 1);
  }
  e.breakdown["classifier"] = 2ULL * c.pooled_dim() * c.classes;
  for (const auto& [name, v] : e.breakdown) e.total += v;
  return e;
}

LatencyStats benchmark(const std::function<void(const TokenSeq&)>& run,
                       const std::vector<TokenSeq>& probes, std::size_t trials,
                       std::size_t warmup) {
  if (trials < 10) throw ConfigError("benchmark: need at least 10 trials");
  if (probes.empty()) throw PreconditionError("benchmark: empty probe set");
  for (std::size_t w = 0; w < warmup; ++w) {
    for (const auto& p : probes) run(p);
  }
  std::vector<double> per_example;
  for (std::size_t t = 0; t < trials; ++t) {
    const auto start = std::chrono::steady_clock::now();
    for (const auto& p : probes) run(p);
    const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
    per_example.push_back(elapsed.count() / static_cast<double>(probes.size()));
  }
  LatencyStats s;
  s.trials = trials;
  for (double v : per_example) s.mean_seconds += v;
  s.mean_seconds /= static_cast<double>(trials);
  double var = 0;
  for (double v : per_example) var += (v - s.mean_seconds) * (v - s.mean_seconds);
  s.stddev_seconds = std::sqrt(var / static_cast<double>(trials - 1));
  return s;
}

LatencyStats benchmark_inference(const InspirerModel& model, const std::vector<TokenSeq>& probes,
                                 std::size_t trials) {
  return benchmark(
      [&](const TokenSeq& x) {
        NoGradGuard no_grad;
        model.forward(x, Mode::kEval);
      },
      probes, trials);
}

LatencyStats benchmark_inference(const TargetModel& model, const std::vector<TokenSeq>& probes,
                                 std::size_t trials) {
  return benchmark(
      [&](const TokenSeq& x) {
        NoGradGuard no_grad;
        model.forward(x, Mode::kEval);
      },
      probes, trials);
}

double speedup(const LatencyStats& baseline, const LatencyStats& candidate) {
  if (!(candidate.mean_seconds > 0.0)) throw NumericError("speedup: candidate latency is zero");
  return baseline.mean_seconds / candidate.mean_seconds;
}

std::vector<TokenSeq> random_probes(std::size_t count, std::size_t seq_len,
                                    std::size_t vocab_size, std::uint64_t seed) {
  if (seq_len == 0) throw PreconditionError("random_probes: seq_len must be >= 1");
  if (vocab_size <= static_cast<std::size_t>(kFirstWordId)) {
    throw ConfigError("random_probes: vocabulary has no word ids");
  }
  Rng rng(seed);
  std::vector<TokenSeq> out(count);
  for (auto& p : out) {
    p.push_back(kClsId);
    while (p.size() < seq_len) {
      p.push_back(static_cast<TokenId>(kFirstWordId +
                                       uniform_index(rng, vocab_size - kFirstWordId)));
    }
  }
  return out;
}

namespace {

template <typename Model>
std::uint64_t measured_elementwise(const Model& model, const TokenSeq& probe) {
  NoGradGuard no_grad;
  FlopCounter counter;
  model.forward(probe, Mode::kEval);
  return counter.counts().elementwise;
}

}  // namespace

CostReport cost_report(const InspirerModel& model, std::size_t seq_len, std::size_t trials,
                       std::uint64_t seed) {
  CostReport r;
  r.model = "inspirer";
  r.params = count_params(model.config());
  r.projection_params = projection_params(model.config());
  r.seq_len = seq_len;
  r.flops = estimate_flops(model.config(), seq_len);
  const auto probes = random_probes(8, seq_len, model.config().vocab_size, seed);
  r.elementwise_ops = measured_elementwise(model, probes[0]);
  r.latency = benchmark_inference(model, probes, trials);
  return r;
}

CostReport cost_report(const TargetModel& model, std::size_t seq_len, std::size_t trials,
                       std::uint64_t seed) {
  CostReport r;
  r.model = "target";
  r.params = count_params(model.config());
  r.projection_params = projection_params(model.config());
  r.seq_len = seq_len;
  r.flops = estimate_flops(model.config(), seq_len);
  const auto probes = random_probes(8, seq_len, model.config().vocab_size, seed);
  r.elementwise_ops = measured_elementwise(model, probes[0]);
  r.latency = benchmark_inference(model, probes, trials);
  return r;
}

nlohmann::ordered_json CostReport::to_json() const {
  nlohmann::ordered_json j;
  j["counting_rule"] = kFlopRule;
  j["model"] = model;
  j["params"] = params;
  j["projection_params"] = projection_params;
  j["seq_len"] = seq_len;
  j["flops"] = flops.total;
  nlohmann::ordered_json b;
  for (const auto& [name, v] : flops.breakdown) b[name] = v;
  j["flops_breakdown"] = b;
  j["elementwise_ops"] = elementwise_ops;
  j["latency_mean_s"] = latency.mean_seconds;
  j["latency_stddev_s"] = latency.stddev_seconds;
  j["latency_trials"] = latency.trials;
  if (speedup) {
    j["speedup"] = *speedup;
    j["baseline"] = baseline;
  }
  return j;
}

CostReport CostReport::from_json(const nlohmann::json& j) {
  CostReport r;
  try {
    r.model = j.at("model").get<std::string>();
    r.params = j.at("params").get<std::size_t>();
    r.seq_len = j.at("seq_len").get<std::size_t>();
    r.flops.total = j.at("flops").get<std::uint64_t>();
    r.latency.mean_seconds = j.at("latency_mean_s").get<double>();
    r.latency.stddev_seconds = j.value("latency_stddev_s", 0.0);
    r.latency.trials = j.value("latency_trials", std::size_t{0});
    if (j.contains("projection_params")) r.projection_params = j.at("projection_params").get<std::size_t>();
    if (j.contains("elementwise_ops")) r.elementwise_ops = j.at("elementwise_ops").get<std::uint64_t>();
    if (j.contains("flops_breakdown")) {
      for (const auto& [name, v] : j.at("flops_breakdown").items()) {
        r.flops.breakdown[name] = v.get<std::uint64_t>();
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("cost report: ") + e.what());
  }
  return r;
}

InspirerConfig full_scale_inspirer() {
  InspirerConfig c;
  c.layers = 12;
  c.hidden = 768;
  c.heads = 12;
  c.ff_dim = 3072;
  c.vocab_size = 30522;
  c.max_len = 256;
  c.classes = 10;
  c.mlp_hidden = 768;
  c.projection_dim = 200;
  return c;
}

TargetConfig full_scale_target() {
  TargetConfig c;
  c.filter_sizes = {2, 3, 5, 7, 9, 11};
  c.channels = 200;
  c.emb_dim = 300;
  c.vocab_size = 30522;
  c.classes = 10;
  c.projection_dim = 200;
  return c;
}

}  // namespace textdistill
