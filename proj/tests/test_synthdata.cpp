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

// Tests for the seeded conversation generator: chain statistics against
// closed-form values, feature separability, identity-stream geometry,
// splits, and frame-level log corruption.

#include "casanet/synthdata.hpp"

#include <cmath>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

#include "casanet/postproc.hpp"
#include "casanet/rttm.hpp"
#include "doctest.h"

using casanet::corrupt_log;
using casanet::generate;
using casanet::kSynthAudioBins;
using casanet::kSynthAudioRate;
using casanet::parse_rttm;
using casanet::Rng;
using casanet::SynthConfig;
using casanet::SynthCorpus;
using casanet::SynthSession;
using casanet::Tensor;
using casanet::Timeline;
using casanet::timeline_to_labels;
using casanet::train_dev_split;
using casanet::write_rttm;

namespace {

// Small corpus settings that keep the statistical tests fast.
SynthConfig small_config() {
  SynthConfig cfg;
  cfg.sessions = 2;
  cfg.session_seconds = 10.0;
  cfg.speakers = 2;
  cfg.f_lip = 8;
  cfg.d_i = 8;
  cfg.seed = 7;
  return cfg;
}

bool sessions_equal(const SynthSession& a, const SynthSession& b) {
  return a.file_id == b.file_id && a.speakers == b.speakers &&
         a.labels == b.labels && a.visual == b.visual && a.audio == b.audio &&
         a.identity == b.identity && a.centroids == b.centroids &&
         a.spectral == b.spectral && a.reference == b.reference;
}

double cosine(const Tensor& a, std::size_t row_a, const Tensor& b,
              std::size_t row_b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t d = 0; d < a.dim(1); ++d) {
    dot += a.at(row_a, d) * b.at(row_b, d);
    na += a.at(row_a, d) * a.at(row_a, d);
    nb += b.at(row_b, d) * b.at(row_b, d);
  }
  return dot / std::sqrt(na * nb);
}

}  // namespace

TEST_CASE("synthdata: the config validates its fields") {
  SynthConfig bad = small_config();
  bad.p_stay_speaking = 1.0;
  CHECK_THROWS_WITH_AS(generate(bad),
                       "synth: p_stay_speaking must lie strictly between 0 "
                       "and 1",
                       std::invalid_argument);
  bad = small_config();
  bad.p_stay_silent = 0.0;
  CHECK_THROWS_WITH_AS(generate(bad),
                       "synth: p_stay_silent must lie strictly between 0 "
                       "and 1",
                       std::invalid_argument);
  bad = small_config();
  bad.session_seconds = 4.0;
  CHECK_THROWS_WITH_AS(generate(bad),
                       "synth: session length must cover at least one 8 s "
                       "analysis block",
                       std::invalid_argument);
  bad = small_config();
  bad.sessions = 0;
  CHECK_THROWS_WITH_AS(generate(bad), "synth: sessions must be positive",
                       std::invalid_argument);
  bad = small_config();
  bad.speakers = 12;
  CHECK_THROWS_WITH_AS(generate(bad),
                       "synth: 12 speakers need identity dimension at least "
                       "12, have 8",
                       std::invalid_argument);
}

TEST_CASE("synthdata: generated sessions have the declared shapes") {
  const SynthConfig cfg = small_config();
  const SynthCorpus corpus = generate(cfg);
  REQUIRE(corpus.sessions.size() == 2);
  CHECK(corpus.speaking_prototype.dim(1) == cfg.f_lip);
  CHECK(corpus.idle_prototype.dim(1) == cfg.f_lip);

  const std::size_t frames = 250;  // 10 s at 25 Hz
  for (const SynthSession& s : corpus.sessions) {
    CHECK(s.labels.dim(0) == frames);
    CHECK(s.labels.dim(1) == cfg.speakers);
    CHECK(s.visual.dim(0) == frames);
    CHECK(s.visual.dim(1) == cfg.speakers);
    CHECK(s.visual.dim(2) == cfg.f_lip);
    CHECK(s.audio.dim(0) == frames * kSynthAudioRate);
    CHECK(s.audio.dim(1) == kSynthAudioBins);
    CHECK(s.identity.dim(0) == frames);
    CHECK(s.identity.dim(1) == cfg.d_i);
    CHECK(s.centroids.dim(0) == cfg.speakers);
    CHECK(s.centroids.dim(1) == cfg.d_i);
    CHECK(s.spectral.dim(0) == cfg.speakers);
    CHECK(s.spectral.dim(1) == kSynthAudioBins);
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      CHECK((s.labels[i] == 0.0 || s.labels[i] == 1.0));
    }
  }
  CHECK(corpus.sessions[0].file_id == "session_000");
  CHECK(corpus.sessions[1].file_id == "session_001");
  CHECK(corpus.sessions[0].speakers ==
        std::vector<std::string>{"spk0", "spk1"});
}

TEST_CASE("synthdata: the same config generates bit-identical corpora") {
  const SynthConfig cfg = small_config();
  const SynthCorpus first = generate(cfg);
  const SynthCorpus second = generate(cfg);
  CHECK(first.speaking_prototype == second.speaking_prototype);
  CHECK(first.idle_prototype == second.idle_prototype);
  REQUIRE(first.sessions.size() == second.sessions.size());
  for (std::size_t i = 0; i < first.sessions.size(); ++i) {
    CHECK(sessions_equal(first.sessions[i], second.sessions[i]));
  }
}

TEST_CASE("synthdata: sessions only depend on the config and their index") {
  // Growing the corpus must not disturb earlier sessions: each one draws
  // from its own seed stream.
  SynthConfig cfg = small_config();
  cfg.sessions = 2;
  const SynthCorpus small = generate(cfg);
  cfg.sessions = 4;
  const SynthCorpus large = generate(cfg);
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(sessions_equal(small.sessions[i], large.sessions[i]));
  }
}

TEST_CASE("synthdata: long-run speaking fraction matches the chain") {
  SynthConfig cfg = small_config();
  cfg.sessions = 1;
  cfg.session_seconds = 400.0;  // 10^4 frames at 25 Hz
  cfg.seed = 11;
  const SynthCorpus corpus = generate(cfg);
  const Tensor& labels = corpus.sessions[0].labels;
  REQUIRE(labels.dim(0) == 10000);

  // Stationary distribution of the two-state chain.
  const double expected = (1.0 - cfg.p_stay_silent) /
                          ((1.0 - cfg.p_stay_speaking) +
                           (1.0 - cfg.p_stay_silent));
  CHECK(expected == 0.375);
  for (std::size_t n = 0; n < cfg.speakers; ++n) {
    double speaking = 0.0;
    for (std::size_t t = 0; t < labels.dim(0); ++t) {
      speaking += labels.at(t, n);
    }
    const double fraction = speaking / static_cast<double>(labels.dim(0));
    CHECK(fraction == doctest::Approx(expected).epsilon(0.02 / expected));
  }
}

TEST_CASE("synthdata: overlap frequency matches independent chains") {
  SynthConfig cfg;
  cfg.sessions = 1;
  cfg.session_seconds = 400.0;
  cfg.speakers = 3;
  cfg.f_lip = 8;
  cfg.d_i = 8;
  cfg.seed = 13;
  const SynthCorpus corpus = generate(cfg);
  const Tensor& labels = corpus.sessions[0].labels;

  // P(at least two of three active) for independent stationary chains.
  const double p = 0.375;
  const double expected =
      1.0 - std::pow(1.0 - p, 3) - 3.0 * p * std::pow(1.0 - p, 2);
  CHECK(expected == doctest::Approx(0.31640625));

  std::size_t overlapped = 0;
  for (std::size_t t = 0; t < labels.dim(0); ++t) {
    std::size_t active = 0;
    for (std::size_t n = 0; n < 3; ++n) {
      if (labels.at(t, n) > 0.5) ++active;
    }
    if (active >= 2) ++overlapped;
  }
  const double rate =
      static_cast<double>(overlapped) / static_cast<double>(labels.dim(0));
  CHECK(std::fabs(rate - expected) < 0.03);
}

TEST_CASE("synthdata: noiseless visual features separate perfectly") {
  SynthConfig cfg = small_config();
  cfg.visual_snr_db = 80.0;  // effectively noise-free
  const SynthCorpus corpus = generate(cfg);
  const SynthSession& s = corpus.sessions[0];

  // Nearest-prototype classification must match every label.
  for (std::size_t t = 0; t < s.labels.dim(0); ++t) {
    for (std::size_t n = 0; n < cfg.speakers; ++n) {
      double to_speaking = 0.0;
      double to_idle = 0.0;
      for (std::size_t f = 0; f < cfg.f_lip; ++f) {
        const double x = s.visual.at(t, n, f);
        to_speaking += std::pow(x - corpus.speaking_prototype.at(0, f), 2);
        to_idle += std::pow(x - corpus.idle_prototype.at(0, f), 2);
      }
      const bool predicted = to_speaking < to_idle;
      CHECK(predicted == (s.labels.at(t, n) > 0.5));
    }
  }
}

TEST_CASE("synthdata: a fixed linear probe succeeds at the default SNR") {
  SynthConfig cfg = small_config();
  cfg.session_seconds = 40.0;
  const SynthCorpus corpus = generate(cfg);
  const SynthSession& s = corpus.sessions[0];

  // Project onto the prototype difference and threshold at the midpoint.
  std::size_t correct = 0;
  std::size_t total = 0;
  for (std::size_t t = 0; t < s.labels.dim(0); ++t) {
    for (std::size_t n = 0; n < cfg.speakers; ++n) {
      double score = 0.0;
      for (std::size_t f = 0; f < cfg.f_lip; ++f) {
        const double speaking = corpus.speaking_prototype.at(0, f);
        const double idle = corpus.idle_prototype.at(0, f);
        score += (s.visual.at(t, n, f) - 0.5 * (speaking + idle)) *
                 (speaking - idle);
      }
      const bool predicted = score > 0.0;
      if (predicted == (s.labels.at(t, n) > 0.5)) ++correct;
      ++total;
    }
  }
  const double accuracy =
      static_cast<double>(correct) / static_cast<double>(total);
  CHECK(accuracy >= 0.95);
}

TEST_CASE("synthdata: speaker centroids are orthonormal") {
  const SynthCorpus corpus = generate(small_config());
  for (const SynthSession& s : corpus.sessions) {
    const std::size_t n = s.centroids.dim(0);
    for (std::size_t a = 0; a < n; ++a) {
      double norm = 0.0;
      for (std::size_t d = 0; d < s.centroids.dim(1); ++d) {
        norm += s.centroids.at(a, d) * s.centroids.at(a, d);
      }
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-12));
      for (std::size_t b = a + 1; b < n; ++b) {
        CHECK(std::fabs(cosine(s.centroids, a, s.centroids, b)) < 1e-9);
      }
    }
  }
}

TEST_CASE("synthdata: the identity stream points at the active speakers") {
  SynthConfig cfg = small_config();
  cfg.audio_snr_db = 40.0;
  const SynthCorpus corpus = generate(cfg);
  const SynthSession& s = corpus.sessions[0];

  Tensor pair_mean({1, cfg.d_i});
  for (std::size_t t = 0; t < s.labels.dim(0); ++t) {
    const bool first = s.labels.at(t, 0) > 0.5;
    const bool second = s.labels.at(t, 1) > 0.5;
    Tensor frame({1, cfg.d_i});
    double norm = 0.0;
    for (std::size_t d = 0; d < cfg.d_i; ++d) {
      frame.at(0, d) = s.identity.at(t, d);
      norm += frame.at(0, d) * frame.at(0, d);
    }
    if (first && !second) {
      CHECK(cosine(frame, 0, s.centroids, 0) >= 0.99);
    } else if (second && !first) {
      CHECK(cosine(frame, 0, s.centroids, 1) >= 0.99);
    } else if (first && second) {
      for (std::size_t d = 0; d < cfg.d_i; ++d) {
        pair_mean.at(0, d) =
            0.5 * (s.centroids.at(0, d) + s.centroids.at(1, d));
      }
      CHECK(cosine(frame, 0, pair_mean, 0) >= 0.99);
    } else {
      CHECK(std::sqrt(norm) < 0.1);  // silence leaves only faint noise
    }
  }
}

TEST_CASE("synthdata: audio frames sum the active spectral prototypes") {
  SynthConfig cfg = small_config();
  cfg.audio_snr_db = 40.0;
  const SynthCorpus corpus = generate(cfg);
  const SynthSession& s = corpus.sessions[0];

  for (std::size_t ta = 0; ta < s.audio.dim(0); ta += 7) {
    const std::size_t t = ta / kSynthAudioRate;
    double sq_err = 0.0;
    for (std::size_t bin = 0; bin < kSynthAudioBins; ++bin) {
      double expected = 0.0;
      for (std::size_t n = 0; n < cfg.speakers; ++n) {
        if (s.labels.at(t, n) > 0.5) expected += s.spectral.at(n, bin);
      }
      sq_err += std::pow(s.audio.at(ta, bin) - expected, 2);
    }
    const double rms =
        std::sqrt(sq_err / static_cast<double>(kSynthAudioBins));
    CHECK(rms < 0.05);  // only the 40 dB noise floor remains
  }
}

TEST_CASE("synthdata: the reference timeline rasterizes back to the labels") {
  const SynthCorpus corpus = generate(small_config());
  for (const SynthSession& s : corpus.sessions) {
    const Tensor round_trip = timeline_to_labels(
        s.reference, corpus.config.frame_rate, s.labels.dim(0), s.speakers);
    CHECK(round_trip == s.labels);
  }
}

TEST_CASE("synthdata: references survive RTTM serialization bit-exactly") {
  const SynthCorpus corpus = generate(small_config());
  std::vector<Timeline> timelines;
  for (const SynthSession& s : corpus.sessions) {
    timelines.push_back(s.reference);
  }
  const auto parsed = parse_rttm(write_rttm(timelines));
  REQUIRE(parsed.size() == timelines.size());
  for (const SynthSession& s : corpus.sessions) {
    REQUIRE(parsed.count(s.file_id) == 1);
    CHECK(parsed.at(s.file_id) == s.reference);
  }
}

TEST_CASE("synthdata: the split is deterministic and exhaustive") {
  SynthConfig cfg = small_config();
  cfg.sessions = 10;
  const SynthCorpus corpus = generate(cfg);

  const auto [train, dev] = train_dev_split(corpus, 0.8);
  CHECK(train.sessions.size() == 8);
  CHECK(dev.sessions.size() == 2);
  CHECK(train.config.sessions == 8);
  CHECK(dev.config.sessions == 2);
  CHECK(train.speaking_prototype == corpus.speaking_prototype);
  CHECK(dev.idle_prototype == corpus.idle_prototype);
  for (std::size_t i = 0; i < 8; ++i) {
    CHECK(sessions_equal(train.sessions[i], corpus.sessions[i]));
  }
  for (std::size_t i = 0; i < 2; ++i) {
    CHECK(sessions_equal(dev.sessions[i], corpus.sessions[8 + i]));
  }

  const auto [all_train, no_dev] = train_dev_split(corpus, 1.0);
  CHECK(all_train.sessions.size() == 10);
  CHECK(no_dev.sessions.empty());
  const auto [no_train, all_dev] = train_dev_split(corpus, 0.0);
  CHECK(no_train.sessions.empty());
  CHECK(all_dev.sessions.size() == 10);

  CHECK_THROWS_WITH_AS(train_dev_split(corpus, 1.5),
                       "train_dev_split: ratio must lie in [0, 1]",
                       std::invalid_argument);
}

TEST_CASE("synthdata: corrupting no frames is the identity") {
  const SynthCorpus corpus = generate(small_config());
  Rng rng(5);
  const Timeline& reference = corpus.sessions[0].reference;
  CHECK(corrupt_log(reference, 0.0, rng) == reference);
}

TEST_CASE("synthdata: corrupting every frame is the exact complement") {
  const SynthCorpus corpus = generate(small_config());
  const SynthSession& s = corpus.sessions[0];
  Rng rng(6);
  const Timeline flipped = corrupt_log(s.reference, 1.0, rng);

  // The corruptor's grid ends with the last segment of its input; compare
  // rasterizations on that grid.
  const double rate = corpus.config.frame_rate;
  const auto frames = static_cast<std::size_t>(
      std::ceil(casanet::timeline_span(s.reference) * rate - 1e-9));
  const Tensor before =
      timeline_to_labels(s.reference, rate, frames, s.speakers);
  const Tensor after = timeline_to_labels(flipped, rate, frames, s.speakers);
  for (std::size_t i = 0; i < after.size(); ++i) {
    CHECK(after[i] == 1.0 - before[i]);
  }
}

TEST_CASE("synthdata: partial corruption flips the requested fraction") {
  SynthConfig cfg = small_config();
  cfg.sessions = 1;
  cfg.session_seconds = 400.0;  // 10^4 frames
  const SynthCorpus corpus = generate(cfg);
  const SynthSession& s = corpus.sessions[0];

  Rng rng(7);
  const Timeline mangled = corrupt_log(s.reference, 0.2, rng);
  const Tensor raster = timeline_to_labels(
      mangled, corpus.config.frame_rate, s.labels.dim(0), s.speakers);
  std::size_t disagreements = 0;
  for (std::size_t i = 0; i < raster.size(); ++i) {
    if (raster[i] != s.labels[i]) ++disagreements;
  }
  const double rate =
      static_cast<double>(disagreements) / static_cast<double>(raster.size());
  CHECK(rate == doctest::Approx(0.2).epsilon(0.05));
}

TEST_CASE("synthdata: corrupt_log validates its arguments") {
  const SynthCorpus corpus = generate(small_config());
  Rng rng(8);
  CHECK_THROWS_WITH_AS(corrupt_log(corpus.sessions[0].reference, 1.5, rng),
                       "corrupt_log: flip fraction must lie in [0, 1]",
                       std::invalid_argument);
  const Timeline empty;
  CHECK(corrupt_log(empty, 0.5, rng).segments.empty());
}
