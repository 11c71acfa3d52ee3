// Copyright 2026 The CasaNet Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// casanet: audio-visual speaker diarization toolkit.
//
// Subcommands: synth, train, infer, refine, score. Exit codes: 0 on
// success, 1 on a runtime error (bad data, failed convergence), 2 on a
// usage or configuration error (bad flags, unknown config keys, missing
// files).

#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "casanet/casa.hpp"
#include "casanet/corpus.hpp"
#include "casanet/pipeline.hpp"
#include "casanet/refine.hpp"
#include "casanet/rttm.hpp"
#include "casanet/runconfig.hpp"
#include "casanet/scoring.hpp"
#include "casanet/synthdata.hpp"

namespace fs = std::filesystem;
using namespace casanet;

namespace {

RunConfig config_or_default(const std::string& path) {
  return path.empty() ? default_run_config() : load_run_config(path);
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open " + path.string());
  }
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

// References of a corpus subset, for the side files written by synth.
std::vector<Timeline> references(const SynthCorpus& corpus, std::size_t begin,
                                 std::size_t end) {
  std::vector<Timeline> refs;
  for (std::size_t i = begin; i < end; ++i) {
    refs.push_back(corpus.sessions[i].reference);
  }
  return refs;
}

int run_synth(const std::string& config_path, const std::string& out_dir) {
  const RunConfig cfg = config_or_default(config_path);
  const SynthCorpus corpus = generate(cfg.synth);
  save_corpus(out_dir, corpus);

  // Convenience references for the train/dev halves of the split.
  const std::size_t n_train = static_cast<std::size_t>(
      std::llround(cfg.split_ratio * static_cast<double>(corpus.sessions.size())));
  write_rttm_file(fs::path(out_dir) / "ref_train.rttm",
                  references(corpus, 0, n_train));
  write_rttm_file(fs::path(out_dir) / "ref_dev.rttm",
                  references(corpus, n_train, corpus.sessions.size()));

  std::printf("wrote %zu sessions (%.0f s, %zu speakers) to %s\n",
              corpus.sessions.size(), cfg.synth.session_seconds,
              cfg.synth.speakers, out_dir.c_str());
  return 0;
}

int run_train(const std::string& config_path, const std::string& corpus_dir,
              const std::string& out_path, bool no_mixup,
              const std::string& fusion) {
  RunConfig cfg = config_or_default(config_path);
  const StoredCorpus corpus = load_corpus(corpus_dir);
  adapt_model_to_corpus(cfg, corpus.config);
  if (no_mixup) cfg.train.mixup.enabled = false;
  if (fusion == "concat") cfg.train.fusion = FusionMode::concat_baseline;
  if (fusion == "casa") cfg.train.fusion = FusionMode::casa;

  const auto [train, dev] = train_dev_split(corpus, cfg.split_ratio);
  const TrainedSystem system =
      train_pipeline(train, dev, cfg.model, cfg.train);
  save_checkpoint(out_path, system.model);

  // Loss history lands next to the checkpoint.
  const fs::path history_path = out_path + ".history.json";
  std::ofstream history(history_path, std::ios::binary | std::ios::trunc);
  history << "{\n  \"vvad_losses\": [";
  for (std::size_t i = 0; i < system.vvad_losses.size(); ++i) {
    history << (i ? ", " : "") << system.vvad_losses[i];
  }
  history << "],\n  \"casa_losses\": [";
  for (std::size_t i = 0; i < system.casa_losses.size(); ++i) {
    history << (i ? ", " : "") << system.casa_losses[i];
  }
  history << "],\n  \"vvad_dev_accuracy\": " << system.vvad_dev_accuracy
          << "\n}\n";

  std::printf("detector dev accuracy %.4f\n", system.vvad_dev_accuracy);
  if (!system.casa_losses.empty()) {
    std::printf("fusion loss %.4f -> %.4f over %zu epochs\n",
                system.casa_losses.front(), system.casa_losses.back(),
                system.casa_losses.size());
  }
  std::printf("wrote %s and %s\n", out_path.c_str(),
              history_path.string().c_str());
  return 0;
}

StoredCorpus select_split(StoredCorpus corpus, const std::string& split,
                          double ratio) {
  if (split == "all") return corpus;
  auto [train, dev] = train_dev_split(corpus, ratio);
  return split == "train" ? std::move(train) : std::move(dev);
}

int run_infer(const std::string& config_path, const std::string& model_path,
              const std::string& corpus_dir, const std::string& out_path,
              const std::string& split, std::size_t median_window,
              bool median_given, double threshold, bool threshold_given,
              std::size_t jobs) {
  RunConfig cfg = config_or_default(config_path);
  if (median_given) cfg.train.postproc.median_window = median_window;
  if (threshold_given) cfg.train.postproc.threshold = threshold;

  const CasaModel model = load_checkpoint(model_path);
  const StoredCorpus corpus =
      select_split(load_corpus(corpus_dir), split, cfg.split_ratio);
  const std::vector<Timeline> hyp = infer_corpus(
      model, corpus, cfg.train.blocks, cfg.train.postproc, jobs);
  write_rttm_file(out_path, hyp);
  std::printf("wrote %s (%zu sessions)\n", out_path.c_str(), hyp.size());
  return 0;
}

int run_refine(const std::string& config_path, const std::string& model_path,
               const std::string& corpus_dir, const std::string& out_dir,
               std::size_t rounds, bool rounds_given, std::size_t jobs) {
  RunConfig cfg = config_or_default(config_path);
  if (rounds_given) cfg.refine.rounds = rounds;
  cfg.refine.jobs = jobs;

  CasaModel model = load_checkpoint(model_path);
  const StoredCorpus corpus = load_corpus(corpus_dir);
  const auto [train, dev] = train_dev_split(corpus, cfg.split_ratio);

  // Round 0: the frozen detector's own log for every session.
  std::vector<Timeline> train_log;
  for (const StoredSession& s : train.sessions) {
    train_log.push_back(detector_log(model, s, cfg.refine.postproc));
  }
  std::vector<Timeline> dev_log;
  for (const StoredSession& s : dev.sessions) {
    dev_log.push_back(detector_log(model, s, cfg.refine.postproc));
  }

  const RefineResult result = refine_loop(model, train, dev, train_log,
                                          dev_log, cfg.refine, out_dir);
  save_checkpoint(fs::path(out_dir) / "model_refined.casa", model);

  for (const RefineRound& round : result.history) {
    std::printf("round %zu: dev DER %.2f%%\n", round.round,
                100.0 * round.dev.der());
  }
  std::printf("wrote %zu round logs and refine_history.json to %s\n",
              result.history.size(), out_dir.c_str());
  return 0;
}

int run_score(const std::string& ref_path, const std::string& hyp_path,
              double collar) {
  const std::map<std::string, Timeline> refs =
      parse_rttm(read_text_file(ref_path));
  const std::map<std::string, Timeline> hyps =
      parse_rttm(read_text_file(hyp_path));

  std::printf("%-24s %8s %8s %8s %8s\n", "file", "FA%", "MISS%", "SPKERR%",
              "DER%");
  DerReport total;
  for (const auto& [file_id, ref] : refs) {
    Timeline hyp;
    hyp.file_id = file_id;
    const auto it = hyps.find(file_id);
    if (it != hyps.end()) hyp = it->second;
    const DerReport report = der(ref, hyp, collar);
    total = merge_reports(total, report);
    std::printf("%-24s %8.2f %8.2f %8.2f %8.2f\n", file_id.c_str(),
                100.0 * report.fa / report.total,
                100.0 * report.miss / report.total,
                100.0 * report.spk_err / report.total,
                100.0 * report.der());
  }
  std::printf("%-24s %8.2f %8.2f %8.2f %8.2f\n", "TOTAL",
              100.0 * total.fa / total.total,
              100.0 * total.miss / total.total,
              100.0 * total.spk_err / total.total, 100.0 * total.der());

  for (const auto& [file_id, hyp] : hyps) {
    if (refs.find(file_id) == refs.end()) {
      std::fprintf(stderr, "warning: hypothesis file '%s' has no reference\n",
                   file_id.c_str());
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Audio-visual speaker diarization toolkit"};
  app.require_subcommand(1);

  std::string config_path;
  std::string corpus_dir;
  std::string out_path;
  std::string model_path;
  std::string ref_path;
  std::string hyp_path;
  std::string fusion;
  std::string split = "all";
  std::size_t median_window = 11;
  double threshold = 0.5;
  double collar = 0.0;
  std::size_t jobs = 1;
  std::size_t rounds = 2;
  bool no_mixup = false;

  CLI::App* synth =
      app.add_subcommand("synth", "Generate a synthetic conversation corpus");
  synth->add_option("--config", config_path, "Run configuration JSON")
      ->check(CLI::ExistingFile);
  synth->add_option("--out", out_path, "Output corpus directory")->required();

  CLI::App* train =
      app.add_subcommand("train", "Train the diarization model on a corpus");
  train->add_option("--config", config_path, "Run configuration JSON")
      ->check(CLI::ExistingFile);
  train->add_option("--corpus", corpus_dir, "Corpus directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  train->add_option("--out", out_path, "Checkpoint file to write")->required();
  train->add_flag("--no-mixup", no_mixup, "Disable mixup augmentation");
  train->add_option("--fusion", fusion, "Fusion mode")
      ->check(CLI::IsMember({"casa", "concat"}));

  CLI::App* infer =
      app.add_subcommand("infer", "Run diarization and write hypothesis logs");
  infer->add_option("--config", config_path, "Run configuration JSON")
      ->check(CLI::ExistingFile);
  infer->add_option("--model", model_path, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  infer->add_option("--corpus", corpus_dir, "Corpus directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  infer->add_option("--out", out_path, "Hypothesis RTTM to write")->required();
  infer->add_option("--split", split, "Sessions to diarize")
      ->check(CLI::IsMember({"all", "train", "dev"}));
  infer->add_option("--median-window", median_window,
                    "Median filter window (odd)");
  infer->add_option("--threshold", threshold, "Speech decision threshold");
  infer->add_option("--jobs", jobs, "Sessions diarized in parallel");

  CLI::App* refine = app.add_subcommand(
      "refine", "Iteratively refine logs by retraining on them");
  refine->add_option("--config", config_path, "Run configuration JSON")
      ->check(CLI::ExistingFile);
  refine->add_option("--model", model_path, "Trained checkpoint")
      ->required()
      ->check(CLI::ExistingFile);
  refine->add_option("--corpus", corpus_dir, "Corpus directory")
      ->required()
      ->check(CLI::ExistingDirectory);
  refine->add_option("--out", out_path, "Directory for round logs")
      ->required();
  refine->add_option("--rounds", rounds, "Refinement rounds");
  refine->add_option("--jobs", jobs, "Sessions diarized in parallel");

  CLI::App* score = app.add_subcommand(
      "score", "Score hypothesis logs against references");
  score->add_option("--ref", ref_path, "Reference RTTM")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--hyp", hyp_path, "Hypothesis RTTM")
      ->required()
      ->check(CLI::ExistingFile);
  score->add_option("--collar", collar, "Scoring collar in seconds")
      ->check(CLI::NonNegativeNumber);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (synth->parsed()) return run_synth(config_path, out_path);
    if (train->parsed()) {
      return run_train(config_path, corpus_dir, out_path, no_mixup, fusion);
    }
    if (infer->parsed()) {
      return run_infer(config_path, model_path, corpus_dir, out_path, split,
                       median_window, infer->count("--median-window") > 0,
                       threshold, infer->count("--threshold") > 0, jobs);
    }
    if (refine->parsed()) {
      return run_refine(config_path, model_path, corpus_dir, out_path, rounds,
                        refine->count("--rounds") > 0, jobs);
    }
    if (score->parsed()) return run_score(ref_path, hyp_path, collar);
  } catch (const std::invalid_argument& e) {
    std::cerr << "casanet: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "casanet: error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
