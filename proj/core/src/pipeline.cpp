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

#include "casanet/pipeline.hpp"

#include <atomic>
#include <cmath>
#include <cstring>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <string>
#include <thread>
#include <utility>

#include "casanet/features.hpp"
#include "casanet/loss.hpp"
#include "casanet/postproc.hpp"
#include "casanet/refine.hpp"

namespace casanet {
namespace {

std::size_t offset_frame(double offset_seconds, double frame_rate) {
  return static_cast<std::size_t>(std::llround(offset_seconds * frame_rate));
}

std::size_t block_frames(const BlockSettings& settings, double frame_rate) {
  return static_cast<std::size_t>(
      std::llround(settings.block_seconds * frame_rate));
}

BlockPlan session_plan(const StoredSession& session,
                       const BlockSettings& settings) {
  return plan_blocks(session.seconds(), settings.block_seconds,
                     settings.stride_seconds);
}

void check_corpus_config(const StoredCorpus& corpus, const CasaConfig& config,
                         const char* where) {
  const std::string prefix = std::string(where) + ": ";
  if (corpus.sessions.empty()) {
    throw std::invalid_argument(prefix + "corpus is empty");
  }
  if (corpus.config.f_lip != config.f_lip) {
    throw std::invalid_argument(
        prefix + "corpus lip width " + std::to_string(corpus.config.f_lip) +
        " does not match model f_lip " + std::to_string(config.f_lip));
  }
  if (corpus.config.d_i != config.d_i) {
    throw std::invalid_argument(
        prefix + "corpus identity width " + std::to_string(corpus.config.d_i) +
        " does not match model d_i " + std::to_string(config.d_i));
  }
  if (config.audio_features != kSynthAudioBins) {
    throw std::invalid_argument(
        prefix + "model expects " + std::to_string(config.audio_features) +
        " audio features, corpus blocks carry " +
        std::to_string(kSynthAudioBins));
  }
  for (const StoredSession& s : corpus.sessions) {
    if (s.speaker_count() > config.n_max) {
      throw std::invalid_argument(
          prefix + s.file_id + " has " + std::to_string(s.speaker_count()) +
          " speakers, model n_max is " + std::to_string(config.n_max));
    }
  }
}

}  // namespace

Tensor slice_frames(const Tensor& x, std::size_t begin, std::size_t count) {
  if (x.rank() != 2 && x.rank() != 3) {
    throw std::invalid_argument("slice_frames: tensor must be rank 2 or 3");
  }
  if (begin + count > x.dim(0)) {
    throw std::invalid_argument(
        "slice_frames: rows [" + std::to_string(begin) + ", " +
        std::to_string(begin + count) + ") exceed " + std::to_string(x.dim(0)));
  }
  std::size_t row = 1;
  std::vector<std::size_t> shape = x.shape();
  for (std::size_t axis = 1; axis < shape.size(); ++axis) row *= shape[axis];
  shape[0] = count;
  Tensor out(shape);
  std::memcpy(out.data(), x.data() + begin * row,
              count * row * sizeof(double));
  return out;
}

Tensor audio_block(const StoredSession& session, std::size_t frame_begin,
                   std::size_t frame_count) {
  const Tensor rows =
      slice_frames(session.audio, frame_begin * kSynthAudioRate,
                   frame_count * kSynthAudioRate);
  return pool_rows(rows, kSynthAudioRate);
}

std::vector<VvadSample> vvad_blocks(const StoredCorpus& corpus,
                                    const BlockSettings& settings) {
  std::vector<VvadSample> samples;
  for (const StoredSession& s : corpus.sessions) {
    const BlockPlan plan = session_plan(s, settings);
    const std::size_t frames = block_frames(settings, s.frame_rate);
    for (double offset : plan.offsets) {
      const std::size_t begin = offset_frame(offset, s.frame_rate);
      samples.push_back(VvadSample{slice_frames(s.visual, begin, frames),
                                   slice_frames(s.labels, begin, frames)});
    }
  }
  return samples;
}

Tensor detector_probabilities(const CasaModel& model,
                              const VisualStream& stream) {
  const Tensor rows = flatten_block(stream.features);
  const Tensor encoded = model.visual.forward_rows(rows, nullptr);
  const Tensor logits = model.vvad_head.forward(encoded);
  Tensor probs({stream.frames(), stream.speakers()});
  for (std::size_t i = 0; i < probs.size(); ++i) {
    probs[i] = sigmoid(logits[i]);
  }
  return probs;
}

Timeline detector_log(const CasaModel& model, const StoredSession& session,
                      const PostprocSettings& postproc) {
  const Tensor probs =
      detector_probabilities(model, VisualStream{session.visual});
  const Tensor smoothed = median_filter_columns(probs, postproc.median_window);
  const Tensor labels = binarize(smoothed, postproc.threshold);
  return labels_to_timeline(labels, session.frame_rate, session.speakers,
                            session.file_id);
}

std::vector<CasaSample> casa_blocks(const StoredSession& session,
                                    const Tensor& labels,
                                    const SpeakerEmbeddingSet& speakers,
                                    std::size_t n_max,
                                    const BlockSettings& settings,
                                    const std::vector<Tensor>& donor_visual,
                                    const Tensor& donor_embeddings,
                                    Rng& rng) {
  if (labels.rank() != 2 || labels.dim(0) != session.frames() ||
      labels.dim(1) != session.speaker_count()) {
    throw std::invalid_argument("casa_blocks: labels must be [" +
                                std::to_string(session.frames()) + " x " +
                                std::to_string(session.speaker_count()) +
                                "], got " + labels.shape_str());
  }
  const BlockPlan plan = session_plan(session, settings);
  const std::size_t frames = block_frames(settings, session.frame_rate);
  std::vector<CasaSample> samples;
  samples.reserve(plan.offsets.size());
  for (double offset : plan.offsets) {
    const std::size_t begin = offset_frame(offset, session.frame_rate);
    TrainingSample sample{slice_frames(session.visual, begin, frames),
                          speakers.vectors,
                          slice_frames(labels, begin, frames),
                          Tensor::full({1, session.speaker_count()}, 1.0)};
    sample = negative_sample_pad(sample, n_max, donor_visual,
                                 donor_embeddings, rng);
    samples.push_back(
        CasaSample{std::move(sample), audio_block(session, begin, frames)});
  }
  return samples;
}

DonorPools donor_pools(const StoredCorpus& corpus, std::size_t index,
                       const std::vector<SpeakerEmbeddingSet>& embeddings,
                       std::size_t block_frames) {
  if (embeddings.size() != corpus.sessions.size()) {
    throw std::invalid_argument(
        "donor_pools: one embedding set per session required");
  }
  DonorPools pools;
  std::vector<double> rows;
  std::size_t d_i = 0;
  std::size_t donors = 0;
  for (std::size_t j = 0; j < corpus.sessions.size(); ++j) {
    if (j == index) continue;
    const StoredSession& s = corpus.sessions[j];
    const std::size_t f_lip = s.visual.dim(2);

    // Stitch each donor speaker's silent frames, in time order, into
    // consecutive block-length lip-feature matrices.
    for (std::size_t n = 0; n < s.speaker_count(); ++n) {
      Tensor stitched({block_frames, f_lip});
      std::size_t filled = 0;
      for (std::size_t t = 0; t < s.frames(); ++t) {
        if (s.labels.at(t, n) != 0.0) continue;
        std::memcpy(stitched.data() + filled * f_lip,
                    s.visual.data() + (t * s.speaker_count() + n) * f_lip,
                    f_lip * sizeof(double));
        if (++filled == block_frames) {
          pools.visual.push_back(stitched);
          filled = 0;
        }
      }
    }

    const Tensor& vecs = embeddings[j].vectors;
    d_i = vecs.dim(1);
    donors += vecs.dim(0);
    rows.insert(rows.end(), vecs.values().begin(), vecs.values().end());
  }
  if (donors > 0) {
    pools.embeddings = Tensor({donors, d_i}, std::move(rows));
  }
  return pools;
}

TrainedSystem train_pipeline(const StoredCorpus& train,
                             const StoredCorpus& dev, const CasaConfig& config,
                             const TrainSettings& settings) {
  config.validate();
  check_corpus_config(train, config, "train_pipeline");

  Rng root(settings.seed);
  Rng init_rng = root.child(0);
  Rng vvad_rng = root.child(1);
  Rng casa_rng = root.child(2);
  Rng pad_rng = root.child(3);

  // Stage one: the visual detector, trained on every block.
  const std::vector<VvadSample> detector_train =
      vvad_blocks(train, settings.blocks);
  VvadModel vvad(config.f_lip, config.visual_hidden, config.d_v, init_rng);
  std::vector<double> vvad_losses =
      train_vvad(vvad, detector_train, settings.vvad_epochs,
                 settings.vvad_learning_rate, vvad_rng);
  const std::vector<VvadSample> detector_eval =
      dev.sessions.empty() ? detector_train
                           : vvad_blocks(dev, settings.blocks);
  const double vvad_dev_accuracy = vvad_accuracy(vvad, detector_eval);

  // Stage two: freeze the detector inside the fused model.
  CasaModel model(config, settings.fusion, init_rng);
  adopt_vvad(model, vvad);

  std::vector<Tensor> audio_blocks;
  const std::size_t frames = block_frames(settings.blocks,
                                          train.config.frame_rate);
  for (const StoredSession& s : train.sessions) {
    const BlockPlan plan = session_plan(s, settings.blocks);
    for (double offset : plan.offsets) {
      audio_blocks.push_back(
          audio_block(s, offset_frame(offset, s.frame_rate), frames));
    }
  }
  model.audio.fit_normalizer(audio_blocks);

  // Embeddings come from the detector's own log, not the reference.
  std::vector<SpeakerEmbeddingSet> embeddings;
  embeddings.reserve(train.sessions.size());
  for (const StoredSession& s : train.sessions) {
    const Timeline log = detector_log(model, s, settings.postproc);
    embeddings.push_back(extract_speaker_embeddings(s, log).set);
  }

  std::vector<CasaSample> fusion_train;
  for (std::size_t i = 0; i < train.sessions.size(); ++i) {
    const StoredSession& s = train.sessions[i];
    const DonorPools pools =
        s.speaker_count() < config.n_max
            ? donor_pools(train, i, embeddings, frames)
            : DonorPools{};
    std::vector<CasaSample> blocks =
        casa_blocks(s, s.labels, embeddings[i], config.n_max, settings.blocks,
                    pools.visual, pools.embeddings, pad_rng);
    for (CasaSample& b : blocks) fusion_train.push_back(std::move(b));
  }
  std::vector<double> casa_losses =
      train_casa(model, fusion_train, settings.casa_epochs,
                 settings.casa_learning_rate, settings.mixup, casa_rng);

  return TrainedSystem{std::move(model), std::move(vvad_losses),
                       std::move(casa_losses), vvad_dev_accuracy};
}

Timeline infer_session(const CasaModel& model, const StoredSession& session,
                       const SpeakerEmbeddingSet& speakers,
                       const BlockSettings& blocks,
                       const PostprocSettings& postproc) {
  const BlockPlan plan = session_plan(session, blocks);
  const std::size_t frames = block_frames(blocks, session.frame_rate);
  std::vector<BlockPrediction> predictions;
  predictions.reserve(plan.offsets.size());
  for (double offset : plan.offsets) {
    const std::size_t begin = offset_frame(offset, session.frame_rate);
    const CasaInputs inputs{
        VisualStream{slice_frames(session.visual, begin, frames)},
        audio_block(session, begin, frames), speakers};
    predictions.push_back(
        BlockPrediction{casa_forward(model, inputs),
                        static_cast<double>(begin) / session.frame_rate,
                        session.frame_rate});
  }
  const SessionPrediction merged =
      overlap_average(predictions, session.seconds());
  const Tensor smoothed =
      median_filter_columns(merged.merged, postproc.median_window);
  const Tensor labels = binarize(smoothed, postproc.threshold);
  return labels_to_timeline(labels, session.frame_rate, session.speakers,
                            session.file_id);
}

std::vector<Timeline> infer_corpus(const CasaModel& model,
                                   const StoredCorpus& corpus,
                                   const BlockSettings& blocks,
                                   const PostprocSettings& postproc,
                                   std::size_t jobs) {
  if (jobs == 0) {
    throw std::invalid_argument("infer_corpus: jobs must be positive");
  }
  const std::size_t count = corpus.sessions.size();
  std::vector<Timeline> results(count);
  const auto diarize_one = [&](std::size_t i) {
    const StoredSession& s = corpus.sessions[i];
    const Timeline log = detector_log(model, s, postproc);
    const ExtractedEmbeddings extracted = extract_speaker_embeddings(s, log);
    results[i] = infer_session(model, s, extracted.set, blocks, postproc);
  };

  if (jobs == 1 || count <= 1) {
    for (std::size_t i = 0; i < count; ++i) diarize_one(i);
    return results;
  }

  // Sessions are independent; each slot is written by exactly one
  // worker, so the merged result is identical for any job count.
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
          diarize_one(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!first_error) first_error = std::current_exception();
        }
      }
    });
  }
  for (std::thread& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
  return results;
}

}  // namespace casanet
