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

// Pseudo-label refinement. Starting from an initial per-session log
// (normally the detector's output), each round extracts speaker
// embeddings from the current log, retrains the fused network on
// labels rasterized from that same log, re-diarizes every session, and
// adopts the result as the next log. Dev-set error is scored after
// every round; per-round logs and an error history are written to the
// run directory.

#ifndef CASANET_REFINE_HPP_
#define CASANET_REFINE_HPP_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <vector>

#include "casanet/augment.hpp"
#include "casanet/casa.hpp"
#include "casanet/corpus.hpp"
#include "casanet/pipeline.hpp"
#include "casanet/scoring.hpp"
#include "casanet/timeline.hpp"

namespace casanet {

// Speaker embeddings pulled out of a session under a given log: for
// each channel, the mean identity-stream vector over the frames where
// the log marks that speaker as the only active one, scaled to unit
// norm. A channel with no such frames falls back to the unit-norm mean
// of the whole identity stream and is flagged.
struct ExtractedEmbeddings {
  SpeakerEmbeddingSet set;     // [N x D_I], rows follow session.speakers
  std::vector<bool> fallback;  // true where no single-speaker frame existed
};

// The log may only name speakers that exist in the session.
ExtractedEmbeddings extract_speaker_embeddings(const StoredSession& session,
                                               const Timeline& log);

// One refinement run's knobs.
struct RefineSettings {
  std::size_t rounds = 2;
  std::size_t epochs_per_round = 4;
  double learning_rate = 1e-3;
  MixupParams mixup{0.5, true};
  BlockSettings blocks;
  PostprocSettings postproc;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
};

// Dev-set error after one round. Round 0 scores the initial log itself.
struct RefineRound {
  std::size_t round = 0;
  DerReport dev;
  std::vector<double> losses;  // training losses of this round; empty at 0
};

struct RefineResult {
  std::vector<RefineRound> history;      // rounds 0..R in order
  std::vector<Timeline> train_log;       // final log, train sessions
  std::vector<Timeline> dev_log;         // final log, dev sessions
};

// Runs `rounds` refinement rounds, updating `model` in place (the
// network warm-starts from its previous weights every round; the
// detector inside stays frozen). initial_train_log / initial_dev_log
// are index-aligned with the corpus sessions. Writes round_<k>.rttm for
// every round (round 0 is the initial log) and refine_history.json into
// out_dir. With rounds == 0 the model and log are returned untouched.
RefineResult refine_loop(CasaModel& model, const StoredCorpus& train,
                         const StoredCorpus& dev,
                         const std::vector<Timeline>& initial_train_log,
                         const std::vector<Timeline>& initial_dev_log,
                         const RefineSettings& settings,
                         const std::filesystem::path& out_dir);

}  // namespace casanet

#endif  // CASANET_REFINE_HPP_
