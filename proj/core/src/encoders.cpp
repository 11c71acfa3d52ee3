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

#include "casanet/encoders.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "casanet/loss.hpp"

namespace casanet {

Tensor normalize_rows(const Tensor& x) {
  Tensor out = x;
  for (std::size_t i = 0; i < out.dim(0); ++i) {
    double sq = 0.0;
    for (std::size_t j = 0; j < out.dim(1); ++j) {
      sq += out.at(i, j) * out.at(i, j);
    }
    if (sq == 0.0) {
      throw std::invalid_argument("normalize_rows: row " + std::to_string(i) +
                                  " has zero norm");
    }
    const double inv = 1.0 / std::sqrt(sq);
    for (std::size_t j = 0; j < out.dim(1); ++j) {
      out.at(i, j) *= inv;
    }
  }
  return out;
}

Tensor speaker_slice(const Tensor& block, std::size_t speaker) {
  if (block.shape().size() != 3) {
    throw std::invalid_argument("speaker_slice: block must be rank-3");
  }
  const std::size_t frames = block.shape()[0];
  const std::size_t speakers = block.shape()[1];
  const std::size_t dim = block.shape()[2];
  if (speaker >= speakers) {
    throw std::invalid_argument("speaker_slice: speaker index out of range");
  }
  Tensor out({frames, dim});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      out.at(t, d) = block.at(t, speaker, d);
    }
  }
  return out;
}

void set_speaker_slice(Tensor& block, std::size_t speaker,
                       const Tensor& rows) {
  const std::size_t frames = block.shape()[0];
  const std::size_t dim = block.shape()[2];
  if (rows.dim(0) != frames || rows.dim(1) != dim) {
    throw std::invalid_argument("set_speaker_slice: shape mismatch");
  }
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t d = 0; d < dim; ++d) {
      block.at(t, speaker, d) = rows.at(t, d);
    }
  }
}

VisualEncoder::VisualEncoder(std::size_t f_lip, std::size_t hidden,
                             std::size_t d_v, Rng& rng)
    : net("visual", f_lip, hidden, d_v, rng) {}

Tensor VisualEncoder::forward_rows(const Tensor& rows,
                                   FeedForward::Cache* cache) const {
  return net.forward(rows, cache);
}

void VisualEncoder::collect_parameters(std::vector<Parameter*>& out) {
  net.collect_parameters(out);
}

Tensor flatten_block(const Tensor& block) {
  if (block.shape().size() != 3) {
    throw std::invalid_argument("flatten_block: block must be rank-3");
  }
  const std::size_t frames = block.shape()[0];
  const std::size_t speakers = block.shape()[1];
  const std::size_t dim = block.shape()[2];
  Tensor rows({frames * speakers, dim});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < dim; ++d) {
        rows.at(t * speakers + n, d) = block.at(t, n, d);
      }
    }
  }
  return rows;
}

Tensor unflatten_block(const Tensor& rows, std::size_t frames,
                       std::size_t speakers) {
  if (rows.dim(0) != frames * speakers) {
    throw std::invalid_argument("unflatten_block: row count mismatch");
  }
  const std::size_t dim = rows.dim(1);
  Tensor block({frames, speakers, dim});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < dim; ++d) {
        block.at(t, n, d) = rows.at(t * speakers + n, d);
      }
    }
  }
  return block;
}

EmbeddingBlock visual_encode(const VisualStream& stream,
                             const VisualEncoder& encoder) {
  if (stream.feature_dim() != encoder.in_dim()) {
    throw std::invalid_argument(
        "visual_encode: stream has " + std::to_string(stream.feature_dim()) +
        " lip features, encoder expects " + std::to_string(encoder.in_dim()));
  }
  const Tensor rows = flatten_block(stream.features);
  const Tensor encoded = encoder.forward_rows(rows, nullptr);
  EmbeddingBlock block;
  block.data = unflatten_block(encoded, stream.frames(), stream.speakers());
  block.kind = BlockKind::visual;
  return block;
}

AudioEncoder::AudioEncoder(std::size_t in_dim, std::size_t hidden,
                           std::size_t d_a, Rng& rng)
    : feature_mean(Tensor({1, in_dim})),
      feature_std(Tensor::full({1, in_dim}, 1.0)),
      conv1("audio.conv1", in_dim, hidden, rng),
      conv2("audio.conv2", hidden, hidden, rng),
      proj("audio.proj", hidden, d_a, rng) {}

void AudioEncoder::fit_normalizer(const std::vector<Tensor>& feature_blocks) {
  const std::size_t dim = in_dim();
  std::vector<double> sum(dim, 0.0);
  std::vector<double> sum_sq(dim, 0.0);
  std::size_t count = 0;
  for (const Tensor& block : feature_blocks) {
    if (block.dim(1) != dim) {
      throw std::invalid_argument(
          "fit_normalizer: block feature dimension mismatch");
    }
    for (std::size_t t = 0; t < block.dim(0); ++t) {
      for (std::size_t d = 0; d < dim; ++d) {
        sum[d] += block.at(t, d);
        sum_sq[d] += block.at(t, d) * block.at(t, d);
      }
    }
    count += block.dim(0);
  }
  if (count == 0) {
    throw std::invalid_argument("fit_normalizer: no feature rows given");
  }
  for (std::size_t d = 0; d < dim; ++d) {
    const double mean = sum[d] / static_cast<double>(count);
    const double var =
        std::max(0.0, sum_sq[d] / static_cast<double>(count) - mean * mean);
    feature_mean.at(0, d) = mean;
    feature_std.at(0, d) = std::max(std::sqrt(var), 1e-6);
  }
}

Tensor AudioEncoder::forward(const Tensor& features, Cache* cache) const {
  if (features.dim(1) != in_dim()) {
    throw std::invalid_argument(
        "audio_encode: input has " + std::to_string(features.dim(1)) +
        " features per frame, encoder expects " + std::to_string(in_dim()));
  }
  if (features.dim(0) < 3) {
    throw std::invalid_argument("audio_encode: block has " +
                                std::to_string(features.dim(0)) +
                                " frames, convolution needs at least 3");
  }
  Tensor standardized = features;
  for (std::size_t t = 0; t < standardized.dim(0); ++t) {
    for (std::size_t d = 0; d < standardized.dim(1); ++d) {
      standardized.at(t, d) =
          (standardized.at(t, d) - feature_mean.at(0, d)) /
          feature_std.at(0, d);
    }
  }
  Cache local;
  Cache* c = cache != nullptr ? cache : &local;
  c->standardized = std::move(standardized);
  c->pre1 = conv1.forward(c->standardized, &c->conv1_cache);
  c->pre2 = conv2.forward(relu(c->pre1), &c->conv2_cache);
  return proj.forward(relu(c->pre2));
}

Tensor AudioEncoder::backward(const Cache& cache, const Tensor& grad_out) {
  const Tensor act2 = relu(cache.pre2);
  const Tensor grad_act2 = proj.backward(act2, grad_out);
  const Tensor grad_pre2 = relu_backward(cache.pre2, grad_act2);
  const Tensor grad_act1 = conv2.backward(cache.conv2_cache, grad_pre2);
  const Tensor grad_pre1 = relu_backward(cache.pre1, grad_act1);
  Tensor grad_standardized = conv1.backward(cache.conv1_cache, grad_pre1);
  for (std::size_t t = 0; t < grad_standardized.dim(0); ++t) {
    for (std::size_t d = 0; d < grad_standardized.dim(1); ++d) {
      grad_standardized.at(t, d) /= feature_std.at(0, d);
    }
  }
  return grad_standardized;
}

void AudioEncoder::collect_parameters(std::vector<Parameter*>& out) {
  conv1.collect_parameters(out);
  conv2.collect_parameters(out);
  proj.collect_parameters(out);
}

EmbeddingBlock replicate_audio(const Tensor& embedding,
                               std::size_t speakers) {
  if (embedding.shape().size() != 2) {
    throw std::invalid_argument("replicate_audio: embedding must be rank-2");
  }
  if (speakers == 0) {
    throw std::invalid_argument("replicate_audio: speaker count is zero");
  }
  const std::size_t frames = embedding.dim(0);
  const std::size_t dim = embedding.dim(1);
  EmbeddingBlock block;
  block.data = Tensor({frames, speakers, dim});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < dim; ++d) {
        block.data.at(t, n, d) = embedding.at(t, d);
      }
    }
  }
  block.kind = BlockKind::audio_replicated;
  return block;
}

EmbeddingBlock replicate_speaker(const SpeakerEmbeddingSet& set,
                                 std::size_t frames) {
  if (frames == 0) {
    throw std::invalid_argument("replicate_speaker: frame count is zero");
  }
  const std::size_t speakers = set.speakers();
  const std::size_t dim = set.dim();
  EmbeddingBlock block;
  block.data = Tensor({frames, speakers, dim});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < dim; ++d) {
        block.data.at(t, n, d) = set.vectors.at(n, d);
      }
    }
  }
  block.kind = BlockKind::speaker_replicated;
  return block;
}

Tensor baseline_concat_fuse(const EmbeddingBlock& audio,
                            const EmbeddingBlock& visual,
                            const EmbeddingBlock& speaker) {
  const std::size_t frames = audio.frames();
  const std::size_t speakers = audio.speakers();
  if (visual.frames() != frames || speaker.frames() != frames) {
    throw std::invalid_argument("baseline_concat_fuse: frame counts differ");
  }
  if (visual.speakers() != speakers || speaker.speakers() != speakers) {
    throw std::invalid_argument(
        "baseline_concat_fuse: speaker counts differ");
  }
  const std::size_t d_a = audio.feature_dim();
  const std::size_t d_v = visual.feature_dim();
  const std::size_t d_i = speaker.feature_dim();
  Tensor fused({frames, speakers, d_a + d_v + d_i});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < d_a; ++d) {
        fused.at(t, n, d) = audio.data.at(t, n, d);
      }
      for (std::size_t d = 0; d < d_v; ++d) {
        fused.at(t, n, d_a + d) = visual.data.at(t, n, d);
      }
      for (std::size_t d = 0; d < d_i; ++d) {
        fused.at(t, n, d_a + d_v + d) = speaker.data.at(t, n, d);
      }
    }
  }
  return fused;
}

VvadModel::VvadModel(std::size_t f_lip, std::size_t hidden, std::size_t d_v,
                     Rng& rng)
    : encoder(f_lip, hidden, d_v, rng), head("vvad_head", d_v, 1, rng) {}

std::vector<Parameter*> VvadModel::parameters() {
  std::vector<Parameter*> out;
  encoder.collect_parameters(out);
  head.collect_parameters(out);
  return out;
}

Tensor vvad_predict(const VvadModel& model, const VisualStream& stream) {
  const Tensor rows = flatten_block(stream.features);
  const Tensor encoded = model.encoder.forward_rows(rows, nullptr);
  const Tensor logits = model.head.forward(encoded);
  Tensor probs({stream.frames(), stream.speakers()});
  for (std::size_t t = 0; t < stream.frames(); ++t) {
    for (std::size_t n = 0; n < stream.speakers(); ++n) {
      probs.at(t, n) = sigmoid(logits.at(t * stream.speakers() + n, 0));
    }
  }
  return probs;
}

std::vector<double> train_vvad(VvadModel& model,
                               const std::vector<VvadSample>& corpus,
                               std::size_t epochs, double learning_rate,
                               Rng& rng) {
  if (corpus.empty()) {
    throw std::invalid_argument("train_vvad: empty corpus");
  }
  const std::vector<Parameter*> params = model.parameters();
  std::vector<double> history;
  history.reserve(epochs);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    double epoch_loss = 0.0;
    for (const std::size_t index : order) {
      const VvadSample& sample = corpus[index];
      const std::size_t frames = sample.visual.shape()[0];
      const std::size_t speakers = sample.visual.shape()[1];
      zero_grad_all(params);

      const Tensor rows = flatten_block(sample.visual);
      FeedForward::Cache enc_cache;
      const Tensor encoded = model.encoder.forward_rows(rows, &enc_cache);
      const Tensor logits = model.head.forward(encoded);

      Tensor targets({frames * speakers, 1});
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t n = 0; n < speakers; ++n) {
          targets.at(t * speakers + n, 0) = sample.labels.at(t, n);
        }
      }
      const Tensor mask = Tensor::full({frames * speakers, 1}, 1.0);
      const BceResult loss = bce_with_logits(logits, targets, mask);
      epoch_loss += loss.value;

      const Tensor grad_encoded =
          model.head.backward(encoded, loss.grad_logits);
      model.encoder.net.backward(enc_cache, grad_encoded);
      adam_step_all(params, learning_rate);
    }
    history.push_back(epoch_loss / static_cast<double>(corpus.size()));
  }
  return history;
}

double vvad_accuracy(const VvadModel& model,
                     const std::vector<VvadSample>& corpus) {
  if (corpus.empty()) {
    throw std::invalid_argument("vvad_accuracy: empty corpus");
  }
  std::size_t correct = 0;
  std::size_t total = 0;
  for (const VvadSample& sample : corpus) {
    VisualStream stream{sample.visual};
    const Tensor probs = vvad_predict(model, stream);
    for (std::size_t t = 0; t < probs.dim(0); ++t) {
      for (std::size_t n = 0; n < probs.dim(1); ++n) {
        const bool predicted = probs.at(t, n) >= 0.5;
        const bool truth = sample.labels.at(t, n) >= 0.5;
        if (predicted == truth) ++correct;
        ++total;
      }
    }
  }
  return static_cast<double>(correct) / static_cast<double>(total);
}

}  // namespace casanet
