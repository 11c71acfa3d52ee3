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

#include "casanet/augment.hpp"

#include <stdexcept>
#include <string>

#include "casanet/encoders.hpp"

namespace casanet {

namespace {

Tensor lerp(const Tensor& a, const Tensor& b, double lambda) {
  Tensor out = a;
  scale_in_place(out, lambda);
  add_in_place(out, scaled(b, 1.0 - lambda));
  return out;
}

}  // namespace

TrainingSample mixup(const TrainingSample& a, const TrainingSample& b,
                     double lambda) {
  if (a.visual.shape() != b.visual.shape() ||
      a.speaker.shape() != b.speaker.shape() ||
      a.labels.shape() != b.labels.shape() ||
      a.valid.shape() != b.valid.shape()) {
    throw std::invalid_argument("mixup: sample shapes differ");
  }
  if (!(lambda >= 0.0 && lambda <= 1.0)) {
    throw std::invalid_argument("mixup: lambda " + std::to_string(lambda) +
                                " outside [0, 1]");
  }
  TrainingSample out;
  out.visual = lerp(a.visual, b.visual, lambda);
  out.speaker = normalize_rows(lerp(a.speaker, b.speaker, lambda));
  out.labels = lerp(a.labels, b.labels, lambda);
  // Valid masks are not interpolated: a channel counts toward the loss
  // if it counts in either source.
  out.valid = a.valid;
  for (std::size_t n = 0; n < out.valid.dim(1); ++n) {
    out.valid.at(0, n) =
        (a.valid.at(0, n) != 0.0 || b.valid.at(0, n) != 0.0) ? 1.0 : 0.0;
  }
  return out;
}

TrainingSample negative_sample_pad(const TrainingSample& sample,
                                   std::size_t n_max,
                                   const std::vector<Tensor>& donor_visual,
                                   const Tensor& donor_embeddings, Rng& rng) {
  const std::size_t frames = sample.visual.shape()[0];
  const std::size_t speakers = sample.visual.shape()[1];
  const std::size_t f_lip = sample.visual.shape()[2];
  if (speakers > n_max) {
    throw std::invalid_argument(
        "negative_sample_pad: session has " + std::to_string(speakers) +
        " speakers, more than the maximum " + std::to_string(n_max));
  }
  if (speakers == n_max) return sample;
  if (donor_visual.empty()) {
    throw std::invalid_argument(
        "negative_sample_pad: padding needed but the visual donor pool is "
        "empty");
  }
  if (donor_embeddings.shape().size() != 2 ||
      donor_embeddings.dim(1) != sample.speaker.dim(1)) {
    throw std::invalid_argument(
        "negative_sample_pad: donor embeddings must be [K x D_I] with D_I "
        "matching the sample");
  }

  TrainingSample out;
  out.visual = Tensor({frames, n_max, f_lip});
  out.speaker = Tensor({n_max, sample.speaker.dim(1)});
  out.labels = Tensor({frames, n_max});
  out.valid = Tensor({1, n_max});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < f_lip; ++d) {
        out.visual.at(t, n, d) = sample.visual.at(t, n, d);
      }
      out.labels.at(t, n) = sample.labels.at(t, n);
    }
  }
  for (std::size_t n = 0; n < speakers; ++n) {
    for (std::size_t d = 0; d < sample.speaker.dim(1); ++d) {
      out.speaker.at(n, d) = sample.speaker.at(n, d);
    }
    out.valid.at(0, n) = sample.valid.at(0, n);
  }

  for (std::size_t n = speakers; n < n_max; ++n) {
    const Tensor& idle =
        donor_visual[rng.uniform_index(donor_visual.size())];
    if (idle.dim(0) != frames || idle.dim(1) != f_lip) {
      throw std::invalid_argument(
          "negative_sample_pad: donor visual block shape mismatch");
    }
    for (std::size_t t = 0; t < frames; ++t) {
      for (std::size_t d = 0; d < f_lip; ++d) {
        out.visual.at(t, n, d) = idle.at(t, d);
      }
    }
    const std::size_t e = rng.uniform_index(donor_embeddings.dim(0));
    for (std::size_t d = 0; d < donor_embeddings.dim(1); ++d) {
      out.speaker.at(n, d) = donor_embeddings.at(e, d);
    }
    out.valid.at(0, n) = 1.0;
    // Label row stays zero: the padded channel never speaks.
  }
  return out;
}

}  // namespace casanet
