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

#ifndef CASANET_CASA_HPP_
#define CASANET_CASA_HPP_

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "casanet/augment.hpp"
#include "casanet/encoders.hpp"
#include "casanet/layers.hpp"
#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"

namespace casanet {

// Model dimensions. d_model must be divisible by heads; every dimension
// must be positive.
struct CasaConfig {
  std::size_t d_a = 64;             // audio embedding width
  std::size_t d_v = 64;             // visual embedding width
  std::size_t d_i = 32;             // speaker identity width
  std::size_t d_model = 64;         // attention working width
  std::size_t heads = 4;
  std::size_t frames = 200;         // visual frames per block
  std::size_t n_max = 4;            // speaker channels after padding
  std::size_t f_lip = 32;           // lip feature width
  std::size_t audio_features = 40;  // pooled filterbank width
  std::size_t visual_hidden = 64;
  std::size_t audio_hidden = 64;
  std::size_t decoder_hidden = 64;

  std::size_t fused_dim() const { return d_v + d_a + d_i; }
  void validate() const;  // throws std::invalid_argument
};

// How the three streams are combined before decoding.
enum class FusionMode {
  casa,              // cross-attention both ways + self-attention
  concat_baseline,   // plain feature concatenation (ablation)
};

// The full audio-visual diarization network. The visual encoder and its
// detector head are trained first and stay frozen afterwards: they are
// stored here so one checkpoint carries the whole system, but
// trainable_parameters() excludes them.
struct CasaModel {
  CasaConfig config;
  FusionMode mode = FusionMode::casa;
  VisualEncoder visual;
  Linear vvad_head;         // D_V -> 1, seeds the first diarization log
  AudioEncoder audio;
  MultiHeadAttention ca_av;  // queries: visual; keys/values: audio+identity
  MultiHeadAttention ca_va;  // queries: audio+identity; keys/values: visual
  MultiHeadAttention sa;     // self-attention over the concatenated stream
  FeedForward decoder;       // fused width -> hidden -> 2 logits

  CasaModel(const CasaConfig& cfg, FusionMode fusion_mode, Rng& rng);

  // All parameters in declaration order (checkpoint order).
  std::vector<Parameter*> parameters();
  // Parameters updated by train_casa: everything except the frozen
  // visual encoder and detector head.
  std::vector<Parameter*> trainable_parameters();
};

// Copies trained detector weights (visual encoder + head) into the model.
// Shapes must match the model's configuration.
void adopt_vvad(CasaModel& model, const VvadModel& vvad);

// Feature-axis concatenation of the replicated audio embedding and the
// replicated speaker identities: the audio-side attention stream.
EmbeddingBlock build_audio_stream(const EmbeddingBlock& audio,
                                  const EmbeddingBlock& speaker);

// Attention over the time axis, independently per speaker channel.
// Which direction this computes is decided by the parameter block passed
// in: the query stream feeds W_Q, the key/value stream W_K and W_V.
EmbeddingBlock cross_attend(const EmbeddingBlock& query,
                            const EmbeddingBlock& kv,
                            const MultiHeadAttention& mha);

// Concatenates the two cross-attended streams, runs per-speaker
// self-attention over time, and adds the residual input.
EmbeddingBlock self_attend(const EmbeddingBlock& f_av,
                           const EmbeddingBlock& f_va,
                           const MultiHeadAttention& mha);

// Per-(frame, speaker) two-class decoder; returns the probability of the
// speech class, shape [T x N].
Tensor decode(const EmbeddingBlock& fused, const FeedForward& decoder);

// One block of inputs for the fused network.
struct CasaInputs {
  VisualStream visual;           // [T x N x F_lip]
  Tensor audio_features;         // [T x audio_features]
  SpeakerEmbeddingSet speakers;  // [N x D_I]
};

// Intermediate activations of one forward pass, kept for the backward
// pass. per_speaker[n] holds the attention and decoder caches of channel
// n; the fields after `cat` are unused in concat_baseline mode.
struct CasaSpeakerCache {
  Tensor f_v;
  Tensor f_a;
  MultiHeadAttention::Cache ca_av;
  MultiHeadAttention::Cache ca_va;
  MultiHeadAttention::Cache sa;
  Tensor cat;
  Tensor fused_rows;
  FeedForward::Cache dec;
};

struct CasaForwardCache {
  std::size_t frames = 0;
  std::size_t speakers = 0;
  Tensor visual_rows;  // [T*N x F_lip]
  FeedForward::Cache visual_cache;
  AudioEncoder::Cache audio_cache;
  std::vector<CasaSpeakerCache> per_speaker;
};

// Full forward pass returning the speech-class logit per (frame,
// speaker): the difference of the two decoder logits, so that
// sigmoid(logit) equals the two-class softmax speech probability.
Tensor casa_forward_logits(const CasaModel& model, const CasaInputs& inputs,
                           CasaForwardCache* cache = nullptr);

// Forward pass returning probabilities S in (0,1), shape [T x N].
Tensor casa_forward(const CasaModel& model, const CasaInputs& inputs);

// Accumulates parameter gradients for d loss / d logits. Gradients flow
// through every block including the frozen visual encoder (whose
// parameters simply never get an optimizer step).
void casa_backward(CasaModel& model, const CasaForwardCache& cache,
                   const Tensor& grad_logits);

// One training block: the mixable features plus the audio that always
// stays un-mixed.
struct CasaSample {
  TrainingSample features;
  Tensor audio;  // [T x audio_features]
};

// Adam over masked BCE between predicted speech probabilities and the
// labels. Samples are visited in a seeded shuffled order each epoch;
// when mixup is enabled, partners come from a fresh seeded permutation
// per epoch and pairs whose shapes differ are left unmixed. Returns the
// mean per-sample loss of each epoch; zero epochs is a no-op.
std::vector<double> train_casa(CasaModel& model,
                               const std::vector<CasaSample>& corpus,
                               std::size_t epochs, double learning_rate,
                               const MixupParams& mix, Rng& rng);

// Binary model checkpoint: magic "CASA", format version, the config and
// fusion mode, the audio standardization statistics, then every
// parameter tensor in declaration order as little-endian 64-bit floats.
void save_checkpoint(const std::filesystem::path& path,
                     const CasaModel& model);
CasaModel load_checkpoint(const std::filesystem::path& path);

}  // namespace casanet

#endif  // CASANET_CASA_HPP_
