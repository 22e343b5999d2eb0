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


// Command-line entry point: data generation, both training stages,
// evaluation, ablations, alignment sweeps and cost reports.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "textdistill/checkpoint.hpp"
#include "textdistill/config.hpp"
#include "textdistill/efficiency.hpp"
#include "textdistill/errors.hpp"
#include "textdistill/pipeline.hpp"

namespace td = textdistill;
namespace fs = std::filesystem;

namespace {

struct Prepared {
  td::RunConfig config;
  td::DatasetBundle bundle;
};

// Seed precedence: --seed, then TEXTDISTILL_SEED, then the config file.
Prepared prepare(const fs::path& config_path, const std::optional<std::uint64_t>& seed) {
  Prepared p;
  p.config = td::load_run_config(config_path);
  if (const auto env = td::seed_from_environment()) p.config.seed = *env;
  if (seed) p.config.seed = *seed;
  p.bundle = td::load_dataset(p.config.data);
  td::bind_to_data(p.config, p.bundle);
  return p;
}

void print_metrics(const std::string& what, const td::RunMetrics& m) {
  std::printf("%s best_dev %.4f test %.4f steps %zu\n", what.c_str(), m.best_dev_accuracy,
              m.test_accuracy, m.steps.size());
}

void print_rows(const std::vector<td::ComparisonRow>& rows) {
  for (const auto& r : rows) {
    std::printf("%-32s best_dev %.4f test %.4f\n", r.name.c_str(), r.best_dev_accuracy,
                r.test_accuracy);
  }
}

td::InspirerModel teacher_for(const Prepared& p, const std::string& ckpt, const fs::path& out) {
  if (!ckpt.empty()) return td::InspirerModel::load(ckpt);
  td::InspirerRun run = td::train_inspirer(p.config, p.bundle, out / "inspirer");
  print_metrics("inspirer", run.metrics);
  return std::move(run.model);
}

std::vector<td::AlignmentSpec> read_specs(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw td::ConfigError("cannot open " + path.string());
  std::vector<td::AlignmentSpec> specs;
  std::string line;
  while (std::getline(in, line)) {
    const auto first = line.find_first_not_of(" \t\r");
    if (first == std::string::npos || line[first] == '#') continue;
    const auto last = line.find_last_not_of(" \t\r");
    specs.push_back(td::AlignmentSpec::parse(line.substr(first, last - first + 1)));
  }
  if (specs.empty()) throw td::ConfigError(path.string() + ": no alignment specs");
  return specs;
}

int evaluate_checkpoint(const fs::path& ckpt, const fs::path& data, std::string vocab_path,
                        std::size_t max_len) {
  const auto entries = td::read_checkpoint(ckpt);
  if (vocab_path.empty()) vocab_path = (ckpt.parent_path() / "vocab.txt").string();
  const td::Vocab vocab = td::Vocab::load(vocab_path);
  if (max_len == 0) {
    max_len = 64;
    const fs::path manifest = ckpt.parent_path() / "manifest.json";
    if (fs::exists(manifest)) {
      max_len = td::read_json_file(manifest).at("config").at("data").at("max_len").get<std::size_t>();
    }
  }
  const auto records = td::load_jsonl(data);
  double acc = 0;
  if (td::checkpoint_kind(entries) == "inspirer") {
    const auto model = td::InspirerModel::from_checkpoint(entries);
    acc = td::evaluate(model, td::encode_labeled(records, vocab, max_len, model.config().classes));
  } else {
    const auto model = td::TargetModel::from_checkpoint(entries);
    acc = td::evaluate(model, td::encode_labeled(records, vocab, max_len, model.config().classes));
  }
  std::printf("accuracy %.4f\n", acc);
  return 0;
}

int cost(const Prepared& p, const std::string& baseline_path, std::size_t seq_len,
         std::size_t trials, const std::string& out) {
  if (seq_len == 0) seq_len = p.config.data.max_len;
  const td::InspirerModel inspirer(p.config.inspirer, p.config.seed);
  const td::TargetModel target(p.config.target, p.config.seed);
  td::CostReport ins = td::cost_report(inspirer, seq_len, trials, p.config.seed);
  td::CostReport tgt = td::cost_report(target, seq_len, trials, p.config.seed);
  if (!baseline_path.empty()) {
    const td::CostReport base = td::CostReport::from_json(td::read_json_file(baseline_path));
    tgt.speedup = td::speedup(base.latency, tgt.latency);
    tgt.baseline = baseline_path;
  } else {
    tgt.speedup = td::speedup(ins.latency, tgt.latency);
    tgt.baseline = "inspirer";
  }
  nlohmann::ordered_json j;
  j["inspirer"] = ins.to_json();
  j["target"] = tgt.to_json();
  if (out.empty()) {
    std::cout << j.dump(2) << '\n';
  } else {
    std::ofstream f(out);
    if (!f) throw td::DataError("cannot write " + out);
    f << j.dump(2) << '\n';
    std::printf("target %llu FLOPs, inspirer %llu FLOPs, speedup %.2fx\n",
                static_cast<unsigned long long>(tgt.flops.total),
                static_cast<unsigned long long>(ins.flops.total), *tgt.speedup);
  }
  return 0;
}

std::string one_line(std::string s) {
  for (char& c : s) {
    if (c == '\n' || c == '\r') c = ' ';
  }
  return s;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Two-stage semi-supervised text classifier distillation"};
  app.require_subcommand(1);

  std::string config, out, spec, inspirer_ckpt, ckpt, data, vocab, specs, baseline;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> removals;
  std::size_t max_len = 0, seq_len = 0, trials = 20;

  auto add_config = [&](CLI::App* cmd) {
    cmd->add_option("--config", config, "run config (JSON)")->required()->check(CLI::ExistingFile);
    cmd->add_option("--seed", seed, "overrides the config and TEXTDISTILL_SEED");
  };
  auto add_out = [&](CLI::App* cmd) {
    cmd->add_option("--out", out, "run directory")->required();
  };

  auto* gen = app.add_subcommand("gen-data", "write a synthetic corpus as JSONL splits");
  gen->add_option("--spec", spec, "synthetic spec (JSON)")->required()->check(CLI::ExistingFile);
  add_out(gen);

  auto* stage1 = app.add_subcommand("train-inspirer", "stage 1: train the inspirer");
  add_config(stage1);
  add_out(stage1);

  auto* stage2 = app.add_subcommand("distill", "stage 2: distill the target from an inspirer");
  add_config(stage2);
  stage2->add_option("--inspirer", inspirer_ckpt, "inspirer checkpoint")->required()->check(CLI::ExistingFile);
  add_out(stage2);

  auto* sup = app.add_subcommand("train-supervised", "cross-entropy-only target baseline");
  add_config(sup);
  add_out(sup);

  auto* eval = app.add_subcommand("evaluate", "accuracy of a checkpoint on a labeled JSONL file");
  eval->add_option("--ckpt", ckpt, "checkpoint")->required()->check(CLI::ExistingFile);
  eval->add_option("--data", data, "labeled JSONL file")->required()->check(CLI::ExistingFile);
  eval->add_option("--vocab", vocab, "vocabulary (default: vocab.txt next to the checkpoint)");
  eval->add_option("--max-len", max_len, "encoding length (default: from the run manifest)");

  auto* ablate = app.add_subcommand("ablate", "remove distillation components one at a time");
  add_config(ablate);
  ablate->add_option("--remove", removals, "output_distill,feature_distill,consistency")
      ->required()
      ->delimiter(',');
  ablate->add_option("--inspirer", inspirer_ckpt, "reuse an inspirer checkpoint")->check(CLI::ExistingFile);
  add_out(ablate);

  auto* sweep = app.add_subcommand("sweep-alignments", "one stage-2 run per alignment spec");
  add_config(sweep);
  sweep->add_option("--specs", specs, "file with one {layers}-{sizes} spec per line")
      ->required()
      ->check(CLI::ExistingFile);
  sweep->add_option("--inspirer", inspirer_ckpt, "reuse an inspirer checkpoint")->check(CLI::ExistingFile);
  add_out(sweep);

  auto* cost_cmd = app.add_subcommand("cost", "parameter, FLOP and latency report");
  add_config(cost_cmd);
  cost_cmd->add_option("--baseline", baseline, "earlier cost report to compute speedup against")
      ->check(CLI::ExistingFile);
  cost_cmd->add_option("--seq-len", seq_len, "probe length (default: data.max_len)");
  cost_cmd->add_option("--trials", trials, "timed passes over the probe set")->check(CLI::Range(10, 100000));
  cost_cmd->add_option("--out", out, "write the report here instead of stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::fprintf(stderr, "textdistill: %s\n", one_line(e.what()).c_str());
    return 2;
  }

  try {
    if (gen->parsed()) {
      const td::SyntheticSpec s = td::load_synthetic_spec(spec);
      const td::TextSplits t = td::generate_synthetic_text(s);
      fs::create_directories(out);
      td::write_jsonl(fs::path(out) / "train.jsonl", t.train);
      td::write_jsonl(fs::path(out) / "unlabeled.jsonl", t.unlabeled);
      td::write_jsonl(fs::path(out) / "dev.jsonl", t.dev);
      td::write_jsonl(fs::path(out) / "test.jsonl", t.test);
      std::ofstream(fs::path(out) / "spec.json") << td::to_json(s).dump(2) << '\n';
      std::printf("wrote %zu train, %zu unlabeled, %zu dev, %zu test records to %s\n",
                  t.train.size(), t.unlabeled.size(), t.dev.size(), t.test.size(), out.c_str());
    } else if (stage1->parsed()) {
      const Prepared p = prepare(config, seed);
      print_metrics("inspirer", td::train_inspirer(p.config, p.bundle, fs::path(out)).metrics);
    } else if (stage2->parsed()) {
      const Prepared p = prepare(config, seed);
      const td::InspirerModel teacher = td::InspirerModel::load(inspirer_ckpt);
      print_metrics("target", td::distill_target(p.config, teacher, p.bundle, fs::path(out)).metrics);
    } else if (sup->parsed()) {
      const Prepared p = prepare(config, seed);
      print_metrics("supervised", td::train_supervised(p.config, p.bundle, fs::path(out)).metrics);
    } else if (eval->parsed()) {
      return evaluate_checkpoint(ckpt, data, vocab, max_len);
    } else if (ablate->parsed()) {
      const Prepared p = prepare(config, seed);
      for (const auto& r : removals) td::without_component(p.config, r);
      const td::InspirerModel teacher = teacher_for(p, inspirer_ckpt, out);
      print_rows(td::run_ablation(p.config, teacher, p.bundle, removals, fs::path(out)));
    } else if (sweep->parsed()) {
      const Prepared p = prepare(config, seed);
      const auto list = read_specs(specs);
      const td::InspirerModel teacher = teacher_for(p, inspirer_ckpt, out);
      print_rows(td::run_alignment_sweep(p.config, teacher, p.bundle, list, fs::path(out)));
    } else if (cost_cmd->parsed()) {
      return cost(prepare(config, seed), baseline, seq_len, trials, out);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "textdistill: error: %s\n", one_line(e.what()).c_str());
    return 1;
  }
  return 0;
}
