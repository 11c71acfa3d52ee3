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

#ifndef CASANET_ENCODERS_HPP_
#define CASANET_ENCODERS_HPP_

#include <cstddef>
#include <string>
#include <vector>

#include "casanet/layers.hpp"
#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"

namespace casanet {

// One block of per-speaker lip-movement feature vectors.
// features is rank-3, indexed (frame, speaker, lip feature).
struct VisualStream {
  Tensor features;  // [T x N x F_lip]

  std::size_t frames() const { return features.shape()[0]; }
  std::size_t speakers() const { return features.shape()[1]; }
  std::size_t feature_dim() const { return features.shape()[2]; }
};

// What an EmbeddingBlock holds along its feature axis.
enum class BlockKind {
  visual,              // encoded lip features, width D_V
  audio_replicated,    // audio embedding copied per speaker, width D_A
  speaker_replicated,  // speaker embedding copied per frame, width D_I
  fused,               // concatenated or attended stream
};

// A per-block embedding tensor indexed (frame, speaker, feature), plus the
// block's start offset within its session.
struct EmbeddingBlock {
  Tensor data;  // [T x N x D]
  double offset = 0.0;
  BlockKind kind = BlockKind::fused;

  std::size_t frames() const { return data.shape()[0]; }
  std::size_t speakers() const { return data.shape()[1]; }
  std::size_t feature_dim() const { return data.shape()[2]; }
};

enum class EmbeddingSource { oracle_extractor, file };

// One identity embedding per speaker; rows are unit-norm.
struct SpeakerEmbeddingSet {
  Tensor vectors;  // [N x D_I]
  EmbeddingSource source = EmbeddingSource::oracle_extractor;

  std::size_t speakers() const { return vectors.dim(0); }
  std::size_t dim() const { return vectors.dim(1); }
};

// Returns a copy with every row scaled to unit L2 norm.
// Throws std::invalid_argument on an all-zero row.
Tensor normalize_rows(const Tensor& x);

// Copies the [T x D] matrix for one speaker out of a [T x N x D] block,
// and writes one back.
Tensor speaker_slice(const Tensor& block, std::size_t speaker);
void set_speaker_slice(Tensor& block, std::size_t speaker,
                       const Tensor& rows);

// [T x N x D] -> [T*N x D] with row index t * N + n, and its inverse.
Tensor flatten_block(const Tensor& block);
Tensor unflatten_block(const Tensor& rows, std::size_t frames,
                       std::size_t speakers);

// Frame-and-speaker-shared two-layer feed-forward lip encoder,
// F_lip -> hidden -> D_V with an inner ReLU.
struct VisualEncoder {
  FeedForward net;

  VisualEncoder(std::size_t f_lip, std::size_t hidden, std::size_t d_v,
                Rng& rng);

  std::size_t in_dim() const { return net.l1.in_dim(); }
  std::size_t out_dim() const { return net.l2.out_dim(); }

  // Rows hold one (frame, speaker) feature vector each.
  Tensor forward_rows(const Tensor& rows, FeedForward::Cache* cache) const;
  void collect_parameters(std::vector<Parameter*>& out);
};

// Flattens the stream to rows, encodes, and reshapes back to a block.
EmbeddingBlock visual_encode(const VisualStream& stream,
                             const VisualEncoder& encoder);

// Temporal audio encoder over pooled filterbank rows: per-feature
// standardization with fixed statistics, two kernel-3 convolutions with
// ReLU, then a linear projection to D_A.
struct AudioEncoder {
  Tensor feature_mean;  // [1 x in_dim]
  Tensor feature_std;   // [1 x in_dim], strictly positive
  Conv1d conv1;
  Conv1d conv2;
  Linear proj;

  AudioEncoder(std::size_t in_dim, std::size_t hidden, std::size_t d_a,
               Rng& rng);

  std::size_t in_dim() const { return conv1.in_dim(); }
  std::size_t out_dim() const { return proj.out_dim(); }

  // Sets feature_mean/feature_std to the per-feature statistics of the
  // given feature matrices (std floored at 1e-6).
  void fit_normalizer(const std::vector<Tensor>& feature_blocks);

  struct Cache {
    Tensor standardized;
    Conv1d::Cache conv1_cache;
    Tensor pre1;
    Conv1d::Cache conv2_cache;
    Tensor pre2;
  };

  Tensor forward(const Tensor& features, Cache* cache = nullptr) const;
  // Accumulates parameter gradients; the standardization statistics are
  // treated as constants.
  Tensor backward(const Cache& cache, const Tensor& grad_out);
  void collect_parameters(std::vector<Parameter*>& out);
};

// Copies a [T x D_A] embedding across N speaker channels.
EmbeddingBlock replicate_audio(const Tensor& embedding, std::size_t speakers);

// Copies per-speaker identity vectors across T frames.
EmbeddingBlock replicate_speaker(const SpeakerEmbeddingSet& set,
                                 std::size_t frames);

// Feature-axis concatenation in fixed order (audio, visual, speaker).
Tensor baseline_concat_fuse(const EmbeddingBlock& audio,
                            const EmbeddingBlock& visual,
                            const EmbeddingBlock& speaker);

// Visual-only voice activity detector: the visual encoder plus a
// per-frame logistic head.
struct VvadModel {
  VisualEncoder encoder;
  Linear head;  // D_V -> 1

  VvadModel(std::size_t f_lip, std::size_t hidden, std::size_t d_v, Rng& rng);
  std::vector<Parameter*> parameters();
};

// One training block for the visual detector.
struct VvadSample {
  Tensor visual;  // [T x N x F_lip]
  Tensor labels;  // [T x N], entries in {0,1}
};

// Per-(frame, speaker) speech probabilities, shape [T x N].
Tensor vvad_predict(const VvadModel& model, const VisualStream& stream);

// Trains encoder and head jointly with Adam on binary cross-entropy.
// Returns the mean per-sample loss of each epoch. The caller freezes the
// encoder afterwards by excluding its parameters from later updates.
std::vector<double> train_vvad(VvadModel& model,
                               const std::vector<VvadSample>& corpus,
                               std::size_t epochs, double learning_rate,
                               Rng& rng);

// Fraction of (frame, speaker) cells where thresholding the prediction at
// 0.5 matches the label.
double vvad_accuracy(const VvadModel& model,
                     const std::vector<VvadSample>& corpus);

}  // namespace casanet

#endif  // CASANET_ENCODERS_HPP_
