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

// End-to-end training and inference over stored corpora. Sessions are
// cut into overlapping fixed-length blocks on the visual frame grid;
// audio rows are mean-pooled down to that grid. Training runs in two
// stages: the visual detector first, then the fused network with the
// detector frozen inside it. Inference is self-contained: the detector
// seeds a per-session log, speaker embeddings are extracted from that
// log, and the fused network's block outputs are merged, filtered,
// thresholded and written back as a timeline.

#ifndef CASANET_PIPELINE_HPP_
#define CASANET_PIPELINE_HPP_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "casanet/augment.hpp"
#include "casanet/casa.hpp"
#include "casanet/corpus.hpp"
#include "casanet/encoders.hpp"
#include "casanet/tensor.hpp"
#include "casanet/timeline.hpp"

namespace casanet {

// How sessions are cut into analysis blocks.
struct BlockSettings {
  double block_seconds = 8.0;
  double stride_seconds = 4.0;
};

// Post-processing applied to merged per-session probabilities.
struct PostprocSettings {
  std::size_t median_window = 11;  // odd; 1 disables smoothing
  double threshold = 0.5;          // strictly inside (0, 1)
};

// Hyper-parameters of the two training stages.
struct TrainSettings {
  std::size_t vvad_epochs = 30;
  double vvad_learning_rate = 1e-4;
  std::size_t casa_epochs = 8;
  double casa_learning_rate = 1e-3;
  MixupParams mixup{0.5, true};
  FusionMode fusion = FusionMode::casa;
  BlockSettings blocks;
  PostprocSettings postproc;  // shapes the detector log fed to training
  std::uint64_t seed = 0;
};

// Rows [begin, begin + count) along the leading axis of a rank-2 or
// rank-3 tensor.
Tensor slice_frames(const Tensor& x, std::size_t begin, std::size_t count);

// Pooled audio rows aligned to the visual frame range
// [frame_begin, frame_begin + frame_count).
Tensor audio_block(const StoredSession& session, std::size_t frame_begin,
                   std::size_t frame_count);

// Detector training blocks cut from every session of the corpus.
std::vector<VvadSample> vvad_blocks(const StoredCorpus& corpus,
                                    const BlockSettings& settings);

// Speech probabilities of the frozen detector inside the fused model,
// shape [T x N], over a whole session.
Tensor detector_probabilities(const CasaModel& model,
                              const VisualStream& stream);

// Post-processed detector output for one session, as a timeline.
Timeline detector_log(const CasaModel& model, const StoredSession& session,
                      const PostprocSettings& postproc);

// Fused-network training blocks for one session. Targets and the valid
// mask come from `labels` ([T x N], the stored reference or a
// pseudo-label rasterization); `speakers` is the session's embedding
// set. Channels are padded up to n_max with donor material; the pools
// may be empty when no padding is needed.
std::vector<CasaSample> casa_blocks(const StoredSession& session,
                                    const Tensor& labels,
                                    const SpeakerEmbeddingSet& speakers,
                                    std::size_t n_max,
                                    const BlockSettings& settings,
                                    const std::vector<Tensor>& donor_visual,
                                    const Tensor& donor_embeddings, Rng& rng);

// Donor material for padding session `index`: lip-feature blocks cut
// from other sessions' silent stretches, and the other sessions'
// speaker embeddings as rows. block_frames is the padded block length.
struct DonorPools {
  std::vector<Tensor> visual;  // each [block_frames x F_lip]
  Tensor embeddings;           // [K x D_I]
};
DonorPools donor_pools(const StoredCorpus& corpus, std::size_t index,
                       const std::vector<SpeakerEmbeddingSet>& embeddings,
                       std::size_t block_frames);

// Everything `train_pipeline` produces.
struct TrainedSystem {
  CasaModel model;
  std::vector<double> vvad_losses;   // one entry per detector epoch
  std::vector<double> casa_losses;   // one entry per fusion epoch
  double vvad_dev_accuracy = 0.0;    // on dev blocks; train blocks if no dev
};

// Two-stage training on a stored corpus. Stage one trains the visual
// detector on every block; stage two freezes it inside the fused model,
// fits the audio normalizer, seeds a detector log per session, extracts
// speaker embeddings from that log, and trains the fused network on the
// stored labels. Deterministic for a fixed corpus and settings.
TrainedSystem train_pipeline(const StoredCorpus& train,
                             const StoredCorpus& dev, const CasaConfig& config,
                             const TrainSettings& settings);

// Diarizes one session given its speaker embeddings: block-wise forward
// passes merged by overlap averaging, median smoothing, thresholding,
// and run-length encoding into a timeline.
Timeline infer_session(const CasaModel& model, const StoredSession& session,
                       const SpeakerEmbeddingSet& speakers,
                       const BlockSettings& blocks,
                       const PostprocSettings& postproc);

// Self-contained corpus inference: detector log, embeddings extracted
// from it, then infer_session, for every session. `jobs` sessions run
// in parallel; the result order always matches the corpus order and the
// timelines are identical for any job count.
std::vector<Timeline> infer_corpus(const CasaModel& model,
                                   const StoredCorpus& corpus,
                                   const BlockSettings& blocks,
                                   const PostprocSettings& postproc,
                                   std::size_t jobs = 1);

}  // namespace casanet

#endif  // CASANET_PIPELINE_HPP_
