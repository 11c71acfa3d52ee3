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

#ifndef CASANET_SYNTHDATA_HPP_
#define CASANET_SYNTHDATA_HPP_

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"
#include "casanet/timeline.hpp"

namespace casanet {

// Filterbank-like width of the synthetic audio stream.
inline constexpr std::size_t kSynthAudioBins = 40;
// Audio frames per visual frame (100 Hz vs 25 Hz).
inline constexpr std::size_t kSynthAudioRate = 4;

// Seeded conversation-corpus generator settings. Each speaker follows an
// independent two-state Markov chain on the visual frame grid; features
// are class prototypes plus Gaussian noise at the configured SNR.
struct SynthConfig {
  std::size_t sessions = 10;
  double session_seconds = 60.0;
  std::size_t speakers = 3;
  double frame_rate = 25.0;
  double p_stay_speaking = 0.95;  // speak -> speak persistence
  double p_stay_silent = 0.97;    // silent -> silent persistence
  double visual_snr_db = 6.0;
  double audio_snr_db = 6.0;
  std::size_t f_lip = 32;  // lip feature width
  std::size_t d_i = 32;    // speaker identity width
  std::uint64_t seed = 0;

  void validate() const;  // throws std::invalid_argument
};

// One generated conversation. Everything is a deterministic function of
// (config, session index).
struct SynthSession {
  std::string file_id;
  std::vector<std::string> speakers;  // channel names, label column order
  Tensor labels;     // [T x N], 1 while the speaker talks
  Tensor visual;     // [T x N x F_lip]
  Tensor audio;      // [T*kSynthAudioRate x kSynthAudioBins]
  Tensor identity;   // [T x D_I], active-centroid mixture at the audio SNR
  Tensor centroids;  // [N x D_I] true speaker centroids, orthonormal rows
  Tensor spectral;   // [N x kSynthAudioBins] per-speaker audio prototypes
  Timeline reference;
};

struct SynthCorpus {
  SynthConfig config;
  Tensor speaking_prototype;  // [1 x F_lip], shared across sessions
  Tensor idle_prototype;      // [1 x F_lip]
  std::vector<SynthSession> sessions;
};

// Generates the full corpus from the config's seed. Same config twice
// gives bit-identical corpora; sessions draw from independent seed
// streams, so per-session generation order cannot leak between sessions.
SynthCorpus generate(const SynthConfig& cfg);

// Deterministic split by session index: the first round(ratio * count)
// sessions become the training half, the rest the dev half.
std::pair<SynthCorpus, SynthCorpus> train_dev_split(const SynthCorpus& corpus,
                                                    double ratio);

// Rasterizes the timeline onto the frame grid, flips round(fraction *
// cells) distinct (frame, speaker) cells chosen uniformly at random, and
// converts back to segments. Fraction 0 is the identity on grid-aligned
// timelines; fraction 1 the exact complement.
Timeline corrupt_log(const Timeline& timeline, double flip_fraction, Rng& rng,
                     double frame_rate = 25.0);

}  // namespace casanet

#endif  // CASANET_SYNTHDATA_HPP_
