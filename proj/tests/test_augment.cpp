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

#include <cmath>
#include <stdexcept>
#include <vector>

#include "casanet/encoders.hpp"
#include "casanet/rng.hpp"
#include "casanet/tensor.hpp"
#include "doctest.h"

namespace {

using casanet::mixup;
using casanet::negative_sample_pad;
using casanet::normalize_rows;
using casanet::Rng;
using casanet::Tensor;
using casanet::TrainingSample;

TrainingSample constant_sample(std::size_t frames, std::size_t speakers,
                               std::size_t f_lip, std::size_t d_i,
                               double value, double label) {
  TrainingSample s;
  s.visual = Tensor::full({frames, speakers, f_lip}, value);
  Tensor raw = Tensor::full({speakers, d_i}, 1.0);
  raw.at(0, 0) = 2.0;  // break the tie so rows are distinct directions
  s.speaker = normalize_rows(raw);
  s.labels = Tensor::full({frames, speakers}, label);
  s.valid = Tensor::full({1, speakers}, 1.0);
  return s;
}

TrainingSample random_sample(std::size_t frames, std::size_t speakers,
                             std::size_t f_lip, std::size_t d_i, Rng& rng) {
  TrainingSample s;
  s.visual = Tensor({frames, speakers, f_lip});
  for (std::size_t i = 0; i < s.visual.size(); ++i) {
    s.visual[i] = rng.gaussian();
  }
  Tensor raw({speakers, d_i});
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = rng.gaussian();
  s.speaker = normalize_rows(raw);
  s.labels = Tensor({frames, speakers});
  for (std::size_t i = 0; i < s.labels.size(); ++i) {
    s.labels[i] = rng.uniform() < 0.4 ? 1.0 : 0.0;
  }
  s.valid = Tensor::full({1, speakers}, 1.0);
  return s;
}

TEST_CASE("mixup at lambda=1 returns the first sample exactly") {
  Rng rng(1);
  const TrainingSample a = random_sample(6, 2, 4, 3, rng);
  const TrainingSample b = random_sample(6, 2, 4, 3, rng);
  const TrainingSample m = mixup(a, b, 1.0);
  CHECK(m.visual == a.visual);
  CHECK(m.labels == a.labels);
  // Unit rows re-normalize to themselves up to rounding.
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t d = 0; d < 3; ++d) {
      CHECK(m.speaker.at(n, d) ==
            doctest::Approx(a.speaker.at(n, d)).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixup midpoint of zeros and ones is one half everywhere") {
  TrainingSample zeros = constant_sample(4, 2, 3, 3, 0.0, 0.0);
  TrainingSample ones = constant_sample(4, 2, 3, 3, 1.0, 1.0);
  const TrainingSample m = mixup(zeros, ones, 0.5);
  for (std::size_t i = 0; i < m.visual.size(); ++i) {
    CHECK(m.visual[i] == 0.5);
  }
  for (std::size_t i = 0; i < m.labels.size(); ++i) {
    CHECK(m.labels[i] == 0.5);
  }
  // Both inputs share the same speaker rows, so mixing is the identity.
  CHECK(m.speaker == zeros.speaker);
}

TEST_CASE("mixup of a sample with itself is a fixed point for any lambda") {
  Rng rng(2);
  const TrainingSample s = random_sample(5, 3, 4, 3, rng);
  for (const double lambda : {0.0, 0.25, 0.5, 0.9, 1.0}) {
    const TrainingSample m = mixup(s, s, lambda);
    for (std::size_t i = 0; i < s.visual.size(); ++i) {
      CHECK(m.visual[i] == doctest::Approx(s.visual[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < s.labels.size(); ++i) {
      CHECK(m.labels[i] == doctest::Approx(s.labels[i]).epsilon(1e-12));
    }
    for (std::size_t i = 0; i < s.speaker.size(); ++i) {
      CHECK(m.speaker[i] == doctest::Approx(s.speaker[i]).epsilon(1e-12));
    }
  }
}

TEST_CASE("mixup commutes with swapping endpoints and lambda") {
  Rng rng(3);
  const TrainingSample a = random_sample(4, 2, 3, 3, rng);
  const TrainingSample b = random_sample(4, 2, 3, 3, rng);
  const TrainingSample m1 = mixup(a, b, 0.3);
  const TrainingSample m2 = mixup(b, a, 0.7);
  for (std::size_t i = 0; i < m1.visual.size(); ++i) {
    CHECK(m1.visual[i] == doctest::Approx(m2.visual[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < m1.labels.size(); ++i) {
    CHECK(m1.labels[i] == doctest::Approx(m2.labels[i]).epsilon(1e-12));
  }
  for (std::size_t i = 0; i < m1.speaker.size(); ++i) {
    CHECK(m1.speaker[i] == doctest::Approx(m2.speaker[i]).epsilon(1e-12));
  }
}

TEST_CASE("mixup keeps speaker rows unit-norm") {
  Rng rng(4);
  const TrainingSample a = random_sample(4, 3, 3, 5, rng);
  const TrainingSample b = random_sample(4, 3, 3, 5, rng);
  const TrainingSample m = mixup(a, b, 0.37);
  for (std::size_t n = 0; n < 3; ++n) {
    double sq = 0.0;
    for (std::size_t d = 0; d < 5; ++d) {
      sq += m.speaker.at(n, d) * m.speaker.at(n, d);
    }
    CHECK(std::sqrt(sq) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("mixup labels stay inside the unit interval") {
  Rng rng(5);
  Rng lam_rng(6);
  const TrainingSample a = random_sample(8, 2, 3, 3, rng);
  const TrainingSample b = random_sample(8, 2, 3, 3, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const double lambda = lam_rng.beta(0.5, 0.5);
    const TrainingSample m = mixup(a, b, lambda);
    for (std::size_t i = 0; i < m.labels.size(); ++i) {
      CHECK(m.labels[i] >= 0.0);
      CHECK(m.labels[i] <= 1.0);
    }
  }
}

TEST_CASE("mixup rejects mismatched shapes and out-of-range lambda") {
  Rng rng(7);
  const TrainingSample a = random_sample(4, 2, 3, 3, rng);
  const TrainingSample b = random_sample(4, 3, 3, 3, rng);
  CHECK_THROWS_WITH_AS(mixup(a, b, 0.5), "mixup: sample shapes differ",
                       std::invalid_argument);
  const TrainingSample c = random_sample(4, 2, 3, 3, rng);
  CHECK_THROWS_AS(mixup(a, c, 1.5), std::invalid_argument);
  CHECK_THROWS_AS(mixup(a, c, -0.1), std::invalid_argument);
}

TEST_CASE("beta(0.5, 0.5) draws average one half over many trials") {
  Rng rng(99);
  double sum = 0.0;
  const int trials = 100000;
  for (int i = 0; i < trials; ++i) sum += rng.beta(0.5, 0.5);
  CHECK(sum / trials == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("padding a full session returns it unchanged") {
  Rng rng(8);
  const TrainingSample s = random_sample(4, 3, 3, 3, rng);
  const TrainingSample padded =
      negative_sample_pad(s, 3, {}, Tensor({1, 3}, {1.0, 0.0, 0.0}), rng);
  CHECK(padded.visual == s.visual);
  CHECK(padded.speaker == s.speaker);
  CHECK(padded.labels == s.labels);
  CHECK(padded.valid == s.valid);
}

TEST_CASE("padding fills missing channels with donors and zero labels") {
  Rng data_rng(9);
  const TrainingSample s = random_sample(6, 2, 3, 4, data_rng);
  const Tensor idle = Tensor::full({6, 3}, -0.5);
  Tensor donors({2, 4}, {1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0});

  Rng pad_rng(10);
  const TrainingSample padded =
      negative_sample_pad(s, 4, {idle}, donors, pad_rng);
  REQUIRE(padded.visual.shape() == std::vector<std::size_t>{6, 4, 3});
  REQUIRE(padded.speaker.shape() == std::vector<std::size_t>{4, 4});
  REQUIRE(padded.labels.shape() == std::vector<std::size_t>{6, 4});
  REQUIRE(padded.valid.shape() == std::vector<std::size_t>{1, 4});

  // Original channels survive bit-exactly.
  for (std::size_t t = 0; t < 6; ++t) {
    for (std::size_t n = 0; n < 2; ++n) {
      for (std::size_t d = 0; d < 3; ++d) {
        CHECK(padded.visual.at(t, n, d) == s.visual.at(t, n, d));
      }
      CHECK(padded.labels.at(t, n) == s.labels.at(t, n));
    }
  }
  for (std::size_t n = 0; n < 2; ++n) {
    for (std::size_t d = 0; d < 4; ++d) {
      CHECK(padded.speaker.at(n, d) == s.speaker.at(n, d));
    }
  }

  // Padded channels: idle visuals, donor identities, silent labels,
  // still valid for the loss.
  for (std::size_t n = 2; n < 4; ++n) {
    for (std::size_t t = 0; t < 6; ++t) {
      for (std::size_t d = 0; d < 3; ++d) {
        CHECK(padded.visual.at(t, n, d) == -0.5);
      }
      CHECK(padded.labels.at(t, n) == 0.0);
    }
    CHECK(padded.valid.at(0, n) == 1.0);
    // The embedding is one of the donor rows.
    bool matches_donor = false;
    for (std::size_t k = 0; k < 2; ++k) {
      bool same = true;
      for (std::size_t d = 0; d < 4; ++d) {
        if (padded.speaker.at(n, d) != donors.at(k, d)) same = false;
      }
      matches_donor = matches_donor || same;
    }
    CHECK(matches_donor);
  }
}

TEST_CASE("padded identities stay far from in-session identities") {
  Rng rng(11);
  TrainingSample s = random_sample(4, 2, 3, 16, rng);
  // Donor embeddings from a different random session.
  Tensor donors({3, 16});
  for (std::size_t i = 0; i < donors.size(); ++i) donors[i] = rng.gaussian();
  donors = normalize_rows(donors);

  const Tensor idle = Tensor({4, 3});
  Rng pad_rng(12);
  const TrainingSample padded =
      negative_sample_pad(s, 4, {idle}, donors, pad_rng);
  for (std::size_t n = 2; n < 4; ++n) {
    for (std::size_t m = 0; m < 2; ++m) {
      double cosine = 0.0;
      for (std::size_t d = 0; d < 16; ++d) {
        cosine += padded.speaker.at(n, d) * padded.speaker.at(m, d);
      }
      CHECK(std::abs(cosine) < 0.99);
    }
  }
}

TEST_CASE("padding reports missing donor pools and oversized sessions") {
  Rng rng(13);
  const TrainingSample s = random_sample(4, 2, 3, 3, rng);
  CHECK_THROWS_WITH_AS(
      negative_sample_pad(s, 4, {}, Tensor({1, 3}, {1.0, 0.0, 0.0}), rng),
      "negative_sample_pad: padding needed but the visual donor pool is "
      "empty",
      std::invalid_argument);
  CHECK_THROWS_WITH_AS(
      negative_sample_pad(s, 1, {Tensor({4, 3})},
                          Tensor({1, 3}, {1.0, 0.0, 0.0}), rng),
      "negative_sample_pad: session has 2 speakers, more than the maximum 1",
      std::invalid_argument);
}

}  // namespace
