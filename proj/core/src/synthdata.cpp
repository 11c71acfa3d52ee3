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

#include "casanet/synthdata.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "casanet/postproc.hpp"

namespace casanet {

void SynthConfig::validate() const {
  if (sessions == 0) {
    throw std::invalid_argument("synth: sessions must be positive");
  }
  if (speakers == 0) {
    throw std::invalid_argument("synth: speakers must be positive");
  }
  if (f_lip == 0) {
    throw std::invalid_argument("synth: f_lip must be positive");
  }
  if (d_i == 0) {
    throw std::invalid_argument("synth: d_i must be positive");
  }
  if (frame_rate <= 0.0) {
    throw std::invalid_argument("synth: frame rate must be positive");
  }
  if (!(p_stay_speaking > 0.0 && p_stay_speaking < 1.0)) {
    throw std::invalid_argument(
        "synth: p_stay_speaking must lie strictly between 0 and 1");
  }
  if (!(p_stay_silent > 0.0 && p_stay_silent < 1.0)) {
    throw std::invalid_argument(
        "synth: p_stay_silent must lie strictly between 0 and 1");
  }
  if (session_seconds < 8.0) {
    throw std::invalid_argument(
        "synth: session length must cover at least one 8 s analysis block");
  }
  if (speakers > d_i) {
    throw std::invalid_argument(
        "synth: " + std::to_string(speakers) +
        " speakers need identity dimension at least " +
        std::to_string(speakers) + ", have " + std::to_string(d_i));
  }
}

namespace {

double mean_square(const Tensor& x) {
  double total = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) total += x[i] * x[i];
  return total / static_cast<double>(x.size());
}

double noise_sigma(double signal_power, double snr_db) {
  return std::sqrt(signal_power / std::pow(10.0, snr_db / 10.0));
}

// Gram-Schmidt over random Gaussian rows; rows that collapse during
// orthogonalization are redrawn.
Tensor orthonormal_rows(std::size_t rows, std::size_t dim, Rng& rng) {
  Tensor out({rows, dim});
  for (std::size_t r = 0; r < rows; ++r) {
    while (true) {
      for (std::size_t d = 0; d < dim; ++d) out.at(r, d) = rng.gaussian();
      for (std::size_t prev = 0; prev < r; ++prev) {
        double dot = 0.0;
        for (std::size_t d = 0; d < dim; ++d) {
          dot += out.at(r, d) * out.at(prev, d);
        }
        for (std::size_t d = 0; d < dim; ++d) {
          out.at(r, d) -= dot * out.at(prev, d);
        }
      }
      double norm = 0.0;
      for (std::size_t d = 0; d < dim; ++d) norm += out.at(r, d) * out.at(r, d);
      norm = std::sqrt(norm);
      if (norm > 1e-6) {
        for (std::size_t d = 0; d < dim; ++d) out.at(r, d) /= norm;
        break;
      }
    }
  }
  return out;
}

SynthSession make_session(const SynthConfig& cfg, std::size_t index,
                          const Tensor& speaking_prototype,
                          const Tensor& idle_prototype, Rng rng) {
  SynthSession s;
  std::string number = std::to_string(index);
  while (number.size() < 3) number.insert(number.begin(), '0');
  s.file_id = "session_" + number;
  for (std::size_t n = 0; n < cfg.speakers; ++n) {
    s.speakers.push_back("spk" + std::to_string(n));
  }

  const auto frames = static_cast<std::size_t>(
      std::llround(cfg.session_seconds * cfg.frame_rate));
  const std::size_t speakers = cfg.speakers;

  s.centroids = orthonormal_rows(speakers, cfg.d_i, rng);
  s.spectral = Tensor({speakers, kSynthAudioBins});
  for (double& x : s.spectral.values()) x = rng.gaussian();

  // Independent two-state chain per speaker, started at stationarity so
  // every frame shares the long-run speaking probability.
  const double stationary =
      (1.0 - cfg.p_stay_silent) /
      ((1.0 - cfg.p_stay_speaking) + (1.0 - cfg.p_stay_silent));
  s.labels = Tensor({frames, speakers});
  for (std::size_t n = 0; n < speakers; ++n) {
    bool talking = rng.uniform() < stationary;
    for (std::size_t t = 0; t < frames; ++t) {
      s.labels.at(t, n) = talking ? 1.0 : 0.0;
      const double stay = talking ? cfg.p_stay_speaking : cfg.p_stay_silent;
      if (rng.uniform() >= stay) talking = !talking;
    }
  }

  const double sigma_visual = noise_sigma(
      0.5 * (mean_square(speaking_prototype) + mean_square(idle_prototype)),
      cfg.visual_snr_db);
  s.visual = Tensor({frames, speakers, cfg.f_lip});
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      const Tensor& prototype =
          s.labels.at(t, n) > 0.5 ? speaking_prototype : idle_prototype;
      for (std::size_t f = 0; f < cfg.f_lip; ++f) {
        s.visual.at(t, n, f) =
            prototype.at(0, f) + sigma_visual * rng.gaussian();
      }
    }
  }

  const double sigma_audio =
      noise_sigma(mean_square(s.spectral), cfg.audio_snr_db);
  s.audio = Tensor({frames * kSynthAudioRate, kSynthAudioBins});
  for (std::size_t ta = 0; ta < frames * kSynthAudioRate; ++ta) {
    const std::size_t t = ta / kSynthAudioRate;
    for (std::size_t bin = 0; bin < kSynthAudioBins; ++bin) {
      double value = 0.0;
      for (std::size_t n = 0; n < speakers; ++n) {
        if (s.labels.at(t, n) > 0.5) value += s.spectral.at(n, bin);
      }
      s.audio.at(ta, bin) = value + sigma_audio * rng.gaussian();
    }
  }

  const double sigma_identity =
      noise_sigma(mean_square(s.centroids), cfg.audio_snr_db);
  s.identity = Tensor({frames, cfg.d_i});
  for (std::size_t t = 0; t < frames; ++t) {
    std::size_t active = 0;
    for (std::size_t n = 0; n < speakers; ++n) {
      if (s.labels.at(t, n) > 0.5) ++active;
    }
    for (std::size_t d = 0; d < cfg.d_i; ++d) {
      double value = 0.0;
      if (active > 0) {
        for (std::size_t n = 0; n < speakers; ++n) {
          if (s.labels.at(t, n) > 0.5) value += s.centroids.at(n, d);
        }
        value /= static_cast<double>(active);
      }
      s.identity.at(t, d) = value + sigma_identity * rng.gaussian();
    }
  }

  s.reference =
      labels_to_timeline(s.labels, cfg.frame_rate, s.speakers, s.file_id);
  return s;
}

}  // namespace

SynthCorpus generate(const SynthConfig& cfg) {
  cfg.validate();
  SynthCorpus corpus;
  corpus.config = cfg;

  Rng root(cfg.seed);
  Rng prototype_rng = root.child(0);
  corpus.speaking_prototype = Tensor({1, cfg.f_lip});
  for (double& x : corpus.speaking_prototype.values()) {
    x = prototype_rng.gaussian();
  }
  corpus.idle_prototype = Tensor({1, cfg.f_lip});
  for (double& x : corpus.idle_prototype.values()) {
    x = prototype_rng.gaussian();
  }

  corpus.sessions.reserve(cfg.sessions);
  for (std::size_t i = 0; i < cfg.sessions; ++i) {
    corpus.sessions.push_back(make_session(cfg, i, corpus.speaking_prototype,
                                           corpus.idle_prototype,
                                           root.child(i + 1)));
  }
  return corpus;
}

std::pair<SynthCorpus, SynthCorpus> train_dev_split(const SynthCorpus& corpus,
                                                    double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("train_dev_split: ratio must lie in [0, 1]");
  }
  const std::size_t total = corpus.sessions.size();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(total)));
  n_train = std::min(n_train, total);

  SynthCorpus train;
  train.config = corpus.config;
  train.speaking_prototype = corpus.speaking_prototype;
  train.idle_prototype = corpus.idle_prototype;
  SynthCorpus dev = train;
  for (std::size_t i = 0; i < total; ++i) {
    (i < n_train ? train : dev).sessions.push_back(corpus.sessions[i]);
  }
  train.config.sessions = train.sessions.size();
  dev.config.sessions = dev.sessions.size();
  return {std::move(train), std::move(dev)};
}

Timeline corrupt_log(const Timeline& timeline, double flip_fraction, Rng& rng,
                     double frame_rate) {
  if (!(flip_fraction >= 0.0 && flip_fraction <= 1.0)) {
    throw std::invalid_argument(
        "corrupt_log: flip fraction must lie in [0, 1]");
  }
  if (frame_rate <= 0.0) {
    throw std::invalid_argument("corrupt_log: frame rate must be positive");
  }
  const std::vector<std::string> names = speaker_names(timeline);
  const auto frames = static_cast<std::size_t>(
      std::ceil(timeline_span(timeline) * frame_rate - 1e-9));
  if (names.empty() || frames == 0) return canonical(timeline);

  Tensor labels = timeline_to_labels(timeline, frame_rate, frames, names);
  const std::size_t cells = labels.size();
  const auto flips = static_cast<std::size_t>(
      std::llround(flip_fraction * static_cast<double>(cells)));
  std::vector<std::size_t> order(cells);
  std::iota(order.begin(), order.end(), std::size_t{0});
  rng.shuffle(order);
  for (std::size_t i = 0; i < flips; ++i) {
    labels[order[i]] = 1.0 - labels[order[i]];
  }
  return labels_to_timeline(labels, frame_rate, names, timeline.file_id);
}

}  // namespace casanet
