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

// On-disk corpus layout. A corpus directory holds corpus.json (the
// manifest: generator settings plus the session list with channel
// order), ref.rttm (every reference timeline), and per session three
// embedding blocks:
//   <file_id>.visual.faeb    [T   x N x F_lip] at the visual frame rate
//   <file_id>.audio.faeb     [T_a x 1 x bins]  at 4x the visual rate
//   <file_id>.identity.faeb  [T   x 1 x D_I]   at the visual frame rate
// Payloads are stored at f32 precision, so a loaded corpus is the f32
// rounding of the generated one. Frame labels are not stored; the loader
// rasterizes them back from the reference timeline.

#ifndef CASANET_CORPUS_HPP_
#define CASANET_CORPUS_HPP_

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "casanet/synthdata.hpp"
#include "casanet/tensor.hpp"
#include "casanet/timeline.hpp"

namespace casanet {

// One conversation loaded back from a corpus directory.
struct StoredSession {
  std::string file_id;
  std::vector<std::string> speakers;  // channel order of the blocks
  Tensor visual;                      // [T x N x F_lip]
  Tensor audio;                       // [T*4 x bins]
  Tensor identity;                    // [T x D_I]
  Tensor labels;                      // [T x N], rasterized reference
  Timeline reference;
  double frame_rate = 0.0;            // visual frames per second

  std::size_t frames() const { return visual.shape()[0]; }
  std::size_t speaker_count() const { return visual.shape()[1]; }
  double seconds() const { return static_cast<double>(frames()) / frame_rate; }
};

struct StoredCorpus {
  SynthConfig config;
  std::vector<StoredSession> sessions;
};

// Writes the directory layout above. Creates `dir` if needed and
// overwrites existing files; the bytes written are a pure function of
// the corpus.
void save_corpus(const std::filesystem::path& dir, const SynthCorpus& corpus);

// Reads a corpus directory back. Throws std::runtime_error naming the
// offending file on a missing or malformed manifest, a missing block,
// or a block whose shape or frame rate contradicts the manifest.
StoredCorpus load_corpus(const std::filesystem::path& dir);

// First llround(ratio * sessions) sessions for training, the rest for
// evaluation. Ratio must lie in [0, 1].
std::pair<StoredCorpus, StoredCorpus> train_dev_split(
    const StoredCorpus& corpus, double ratio);

}  // namespace casanet

#endif  // CASANET_CORPUS_HPP_
