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

#include "casanet/refine.hpp"

#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "json.hpp"

#include "casanet/postproc.hpp"
#include "casanet/rttm.hpp"

namespace casanet {
namespace {

using Json = nlohmann::ordered_json;

// Runs fn(0..count) across `jobs` threads; rethrows the first failure.
void parallel_for(std::size_t count, std::size_t jobs,
                  const std::function<void(std::size_t)>& fn) {
  if (jobs <= 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  const std::size_t workers = std::min(jobs, count);
  std::vector<std::thread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      for (;;) {
        const std::size_t i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

void write_round_rttm(const std::filesystem::path& out_dir, std::size_t round,
                      const std::vector<Timeline>& train_log,
                      const std::vector<Timeline>& dev_log) {
  std::vector<Timeline> all = train_log;
  all.insert(all.end(), dev_log.begin(), dev_log.end());
  write_rttm_file(out_dir / ("round_" + std::to_string(round) + ".rttm"),
                  all);
}

DerReport dev_report(const StoredCorpus& dev,
                     const std::vector<Timeline>& dev_log) {
  DerReport merged;
  for (std::size_t i = 0; i < dev.sessions.size(); ++i) {
    merged = merge_reports(merged,
                           der(dev.sessions[i].reference, dev_log[i]));
  }
  return merged;
}

void write_history(const std::filesystem::path& out_dir,
                   const std::vector<RefineRound>& history) {
  Json rounds = Json::array();
  for (const RefineRound& r : history) {
    Json entry;
    entry["round"] = r.round;
    entry["fa_seconds"] = r.dev.fa;
    entry["miss_seconds"] = r.dev.miss;
    entry["speaker_error_seconds"] = r.dev.spk_err;
    entry["scored_seconds"] = r.dev.total;
    entry["der"] = r.dev.der();
    entry["losses"] = r.losses;
    rounds.push_back(std::move(entry));
  }
  Json doc;
  doc["rounds"] = std::move(rounds);
  std::ofstream out(out_dir / "refine_history.json",
                    std::ios::binary | std::ios::trunc);
  if (!out) {
    throw std::runtime_error("refine: cannot write " +
                             (out_dir / "refine_history.json").string());
  }
  out << doc.dump(2) << "\n";
}

}  // namespace

ExtractedEmbeddings extract_speaker_embeddings(const StoredSession& session,
                                               const Timeline& log) {
  const std::size_t frames = session.frames();
  const std::size_t speakers = session.speaker_count();
  const std::size_t d_i = session.identity.dim(1);
  const Tensor labels =
      timeline_to_labels(log, session.frame_rate, frames, session.speakers);

  Tensor sums({speakers, d_i});
  std::vector<std::size_t> counts(speakers, 0);
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t active = 0;
    std::size_t who = 0;
    for (std::size_t n = 0; n < speakers; ++n) {
      if (labels.at(t, n) != 0.0) {
        ++active;
        who = n;
      }
    }
    if (active != 1) continue;
    for (std::size_t d = 0; d < d_i; ++d) {
      sums.at(who, d) += session.identity.at(t, d);
    }
    ++counts[who];
  }

  // Fallback for channels the log never isolates: the whole stream's
  // mean direction (better than nothing, and clearly flagged).
  Tensor global({1, d_i});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < d_i; ++d) {
      global.at(0, d) += session.identity.at(t, d);
    }
  }
  double global_norm = 0.0;
  for (std::size_t d = 0; d < d_i; ++d) {
    global.at(0, d) /= static_cast<double>(frames == 0 ? 1 : frames);
    global_norm += global.at(0, d) * global.at(0, d);
  }
  global_norm = std::sqrt(global_norm);
  if (global_norm < 1e-12) {
    const double uniform = 1.0 / std::sqrt(static_cast<double>(d_i));
    for (std::size_t d = 0; d < d_i; ++d) global.at(0, d) = uniform;
  } else {
    for (std::size_t d = 0; d < d_i; ++d) global.at(0, d) /= global_norm;
  }

  ExtractedEmbeddings out;
  out.fallback.assign(speakers, false);
  Tensor vectors({speakers, d_i});
  for (std::size_t n = 0; n < speakers; ++n) {
    double norm = 0.0;
    for (std::size_t d = 0; d < d_i; ++d) {
      const double mean =
          counts[n] == 0 ? 0.0
                         : sums.at(n, d) / static_cast<double>(counts[n]);
      vectors.at(n, d) = mean;
      norm += mean * mean;
    }
    norm = std::sqrt(norm);
    if (counts[n] == 0 || norm < 1e-12) {
      out.fallback[n] = true;
      for (std::size_t d = 0; d < d_i; ++d) {
        vectors.at(n, d) = global.at(0, d);
      }
    } else {
      for (std::size_t d = 0; d < d_i; ++d) vectors.at(n, d) /= norm;
    }
  }
  out.set.vectors = std::move(vectors);
  out.set.source = EmbeddingSource::oracle_extractor;
  return out;
}

RefineResult refine_loop(CasaModel& model, const StoredCorpus& train,
                         const StoredCorpus& dev,
                         const std::vector<Timeline>& initial_train_log,
                         const std::vector<Timeline>& initial_dev_log,
                         const RefineSettings& settings,
                         const std::filesystem::path& out_dir) {
  if (initial_train_log.size() != train.sessions.size() ||
      initial_dev_log.size() != dev.sessions.size()) {
    throw std::invalid_argument(
        "refine: one initial log per session required");
  }
  std::filesystem::create_directories(out_dir);

  RefineResult result;
  result.train_log = initial_train_log;
  result.dev_log = initial_dev_log;

  write_round_rttm(out_dir, 0, result.train_log, result.dev_log);
  result.history.push_back(
      RefineRound{0, dev_report(dev, result.dev_log), {}});

  Rng root(settings.seed);
  const std::size_t frames = static_cast<std::size_t>(
      std::llround(settings.blocks.block_seconds * train.config.frame_rate));

  for (std::size_t round = 1; round <= settings.rounds; ++round) {
    Rng round_rng = root.child(round);
    Rng pad_rng = round_rng.child(0);
    Rng train_rng = round_rng.child(1);

    // Embeddings and training targets both come from the current log:
    // each round trains on its own previous output, not the reference.
    std::vector<SpeakerEmbeddingSet> embeddings;
    embeddings.reserve(train.sessions.size());
    std::vector<Tensor> pseudo_labels;
    pseudo_labels.reserve(train.sessions.size());
    for (std::size_t i = 0; i < train.sessions.size(); ++i) {
      const StoredSession& s = train.sessions[i];
      embeddings.push_back(
          extract_speaker_embeddings(s, result.train_log[i]).set);
      pseudo_labels.push_back(timeline_to_labels(
          result.train_log[i], s.frame_rate, s.frames(), s.speakers));
    }

    std::vector<CasaSample> samples;
    for (std::size_t i = 0; i < train.sessions.size(); ++i) {
      const StoredSession& s = train.sessions[i];
      const DonorPools pools =
          s.speaker_count() < model.config.n_max
              ? donor_pools(train, i, embeddings, frames)
              : DonorPools{};
      std::vector<CasaSample> blocks = casa_blocks(
          s, pseudo_labels[i], embeddings[i], model.config.n_max,
          settings.blocks, pools.visual, pools.embeddings, pad_rng);
      for (CasaSample& b : blocks) samples.push_back(std::move(b));
    }
    std::vector<double> losses =
        train_casa(model, samples, settings.epochs_per_round,
                   settings.learning_rate, settings.mixup, train_rng);

    std::vector<Timeline> new_train(train.sessions.size());
    parallel_for(train.sessions.size(), settings.jobs, [&](std::size_t i) {
      new_train[i] = infer_session(model, train.sessions[i], embeddings[i],
                                   settings.blocks, settings.postproc);
    });
    std::vector<Timeline> new_dev(dev.sessions.size());
    parallel_for(dev.sessions.size(), settings.jobs, [&](std::size_t i) {
      const SpeakerEmbeddingSet dev_embeddings =
          extract_speaker_embeddings(dev.sessions[i], result.dev_log[i]).set;
      new_dev[i] = infer_session(model, dev.sessions[i], dev_embeddings,
                                 settings.blocks, settings.postproc);
    });
    result.train_log = std::move(new_train);
    result.dev_log = std::move(new_dev);

    write_round_rttm(out_dir, round, result.train_log, result.dev_log);
    result.history.push_back(RefineRound{round, dev_report(dev, result.dev_log),
                                         std::move(losses)});
  }

  write_history(out_dir, result.history);
  return result;
}

}  // namespace casanet
