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

#include "casanet/features.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "casanet/rng.hpp"
#include "doctest.h"

using casanet::FbankConfig;
using casanet::Rng;
using casanet::Tensor;
using casanet::Waveform;

namespace {

// quadratic-time reference transform used only as a test oracle
std::vector<std::complex<double>> naive_dft(const std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  std::vector<std::complex<double>> out(n);
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
      const double angle = -2.0 * std::numbers::pi * static_cast<double>(k * t) /
                           static_cast<double>(n);
      acc += x[t] * std::complex<double>(std::cos(angle), std::sin(angle));
    }
    out[k] = acc;
  }
  return out;
}

Waveform noise_wave(double seconds, std::uint64_t seed) {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(static_cast<std::size_t>(seconds * 16000));
  Rng rng(seed);
  for (double& s : w.samples) s = rng.uniform(-0.9, 0.9);
  return w;
}

}  // namespace

TEST_CASE("features: fft matches a naive dft on random input") {
  Rng rng(13);
  for (std::size_t n : {8u, 64u, 512u}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.gaussian(), rng.gaussian()};
    std::vector<std::complex<double>> fast = x;
    casanet::fft_radix2(fast);
    const auto slow = naive_dft(x);
    for (std::size_t k = 0; k < n; ++k) {
      CHECK(std::abs(fast[k] - slow[k]) < 1e-8);
    }
  }
}

TEST_CASE("features: fft of an impulse is flat, of a constant is a dc spike") {
  std::vector<std::complex<double>> impulse(16, {0.0, 0.0});
  impulse[0] = {1.0, 0.0};
  casanet::fft_radix2(impulse);
  for (const auto& v : impulse) CHECK(std::abs(v - std::complex<double>(1.0, 0.0)) < 1e-12);

  std::vector<std::complex<double>> constant(16, {1.0, 0.0});
  casanet::fft_radix2(constant);
  CHECK(std::abs(constant[0] - std::complex<double>(16.0, 0.0)) < 1e-12);
  for (std::size_t k = 1; k < 16; ++k) CHECK(std::abs(constant[k]) < 1e-12);
}

TEST_CASE("features: fft rejects non-power-of-two sizes") {
  std::vector<std::complex<double>> x(12);
  CHECK_THROWS(casanet::fft_radix2(x));
  std::vector<std::complex<double>> empty;
  CHECK_THROWS(casanet::fft_radix2(empty));
}

TEST_CASE("features: mel scale round-trips and hits the 1 kHz anchor") {
  CHECK(casanet::hz_to_mel(0.0) == 0.0);
  CHECK(casanet::hz_to_mel(1000.0) == doctest::Approx(1000.0).epsilon(1e-3));
  for (double hz : {50.0, 333.0, 1000.0, 4000.0, 7999.0}) {
    CHECK(casanet::mel_to_hz(casanet::hz_to_mel(hz)) == doctest::Approx(hz).epsilon(1e-12));
  }
}

TEST_CASE("features: mel filterbank geometry") {
  const FbankConfig cfg;
  Tensor fb = casanet::mel_filterbank(cfg);
  REQUIRE(fb.shape() == std::vector<std::size_t>{40, 257});
  for (std::size_t i = 0; i < fb.size(); ++i) {
    CHECK(fb[i] >= 0.0);
    CHECK(fb[i] <= 1.0);
  }
  // every filter must capture at least one FFT bin
  for (std::size_t m = 0; m < 40; ++m) {
    double row = 0.0;
    for (std::size_t k = 0; k < 257; ++k) row += fb.at(m, k);
    CHECK(row > 0.0);
  }
  // interior FFT bins are covered by the overlapping triangles
  for (std::size_t k = 2; k < 255; ++k) {
    double col = 0.0;
    for (std::size_t m = 0; m < 40; ++m) col += fb.at(m, k);
    CHECK(col > 0.0);
  }
}

TEST_CASE("features: an 8 second block yields exactly 800 frames") {
  Waveform w = noise_wave(8.0, 99);
  REQUIRE(w.samples.size() == 128000);
  auto f = casanet::fbank(w);
  CHECK(f.frames.shape() == std::vector<std::size_t>{800, 40});
}

TEST_CASE("features: silence hits the log floor everywhere") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.assign(16000, 0.0);
  auto f = casanet::fbank(w);
  const double floor_log = std::log(1e-10);
  for (std::size_t i = 0; i < f.frames.size(); ++i) {
    CHECK(f.frames[i] == floor_log);
  }
}

TEST_CASE("features: a 1 kHz tone peaks in a mel bin whose band contains 1 kHz") {
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(16000);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.8 * std::sin(2.0 * std::numbers::pi * 1000.0 * static_cast<double>(i) / 16000.0);
  }
  auto f = casanet::fbank(w);

  // FFT bin 32 sits at exactly 1000 Hz (32 * 16000 / 512); the
  // admissible mel bins are those whose triangle covers that bin.
  const FbankConfig cfg;
  Tensor fb = casanet::mel_filterbank(cfg);
  std::vector<std::size_t> admissible;
  for (std::size_t m = 0; m < 40; ++m) {
    if (fb.at(m, 32) > 0.0) admissible.push_back(m);
  }
  REQUIRE(!admissible.empty());

  for (std::size_t t = 10; t < 90; t += 7) {  // interior frames
    std::size_t argmax = 0;
    for (std::size_t m = 1; m < 40; ++m) {
      if (f.frames.at(t, m) > f.frames.at(t, argmax)) argmax = m;
    }
    bool ok = false;
    for (std::size_t m : admissible) ok = ok || m == argmax;
    CHECK(ok);
  }
}

TEST_CASE("features: frames are translation consistent away from the edges") {
  Waveform w = noise_wave(2.0, 4242);
  auto full = casanet::fbank(w);

  Waveform shifted;
  shifted.sample_rate = 16000;
  const std::size_t frame_offset = 16;
  shifted.samples.assign(w.samples.begin() + 16 * 160, w.samples.end());
  auto part = casanet::fbank(shifted);

  // interior frames of the slice see exactly the same samples
  for (std::size_t t = 1; t + 2 < part.frames.dim(0); ++t) {
    for (std::size_t m = 0; m < 40; ++m) {
      CHECK(std::fabs(part.frames.at(t, m) - full.frames.at(t + frame_offset, m)) < 1e-9);
    }
  }
}

TEST_CASE("features: fbank rejects wrong rate and too-short input") {
  Waveform wrong_rate;
  wrong_rate.sample_rate = 8000;
  wrong_rate.samples.assign(8000, 0.1);
  CHECK_THROWS_WITH(casanet::fbank(wrong_rate), doctest::Contains("expected 16000 Hz"));

  Waveform tiny;
  tiny.sample_rate = 16000;
  tiny.samples.assign(399, 0.1);  // one sample short of a frame
  CHECK_THROWS_WITH(casanet::fbank(tiny), doctest::Contains("shorter than one frame"));
}

TEST_CASE("features: block plans match the documented examples") {
  CHECK(casanet::plan_blocks(20.0).offsets == std::vector<double>{0.0, 4.0, 8.0, 12.0});
  CHECK(casanet::plan_blocks(8.0).offsets == std::vector<double>{0.0});
  CHECK(casanet::plan_blocks(18.0).offsets == std::vector<double>{0.0, 4.0, 8.0, 10.0});
  CHECK_THROWS_WITH(casanet::plan_blocks(7.5), doctest::Contains("zero-pad"));
}

TEST_CASE("features: block plans cover every instant with uniform stride") {
  Rng rng(3141);
  for (int round = 0; round < 200; ++round) {
    const double length = 8.0 + rng.uniform() * 120.0;
    auto plan = casanet::plan_blocks(length);
    REQUIRE(!plan.offsets.empty());
    CHECK(plan.offsets.front() == 0.0);
    // full coverage: next block starts before the previous one ends
    for (std::size_t i = 1; i < plan.offsets.size(); ++i) {
      CHECK(plan.offsets[i] > plan.offsets[i - 1]);
      CHECK(plan.offsets[i] <= plan.offsets[i - 1] + plan.block_length);
    }
    // uniform stride except possibly the clamped last offset
    for (std::size_t i = 1; i + 1 < plan.offsets.size(); ++i) {
      CHECK(plan.offsets[i] - plan.offsets[i - 1] == doctest::Approx(4.0));
    }
    CHECK(plan.offsets.back() + plan.block_length == doctest::Approx(length));
  }
}

TEST_CASE("features: pooling averages groups of four rows") {
  Tensor ramp({4, 1}, {0.0, 1.0, 2.0, 3.0});
  Tensor pooled = casanet::pool_rows(ramp);
  REQUIRE(pooled.shape() == std::vector<std::size_t>{1, 1});
  CHECK(pooled.at(0, 0) == 1.5);

  Tensor constant = Tensor::full({800, 5}, 2.25);
  Tensor out = casanet::pool_rows(constant);
  REQUIRE(out.shape() == std::vector<std::size_t>{200, 5});
  for (std::size_t i = 0; i < out.size(); ++i) CHECK(out[i] == 2.25);

  CHECK_THROWS_WITH(casanet::pool_rows(Tensor({801, 5})), doctest::Contains("not divisible"));
}

TEST_CASE("features: pooling then nearest-neighbor upsampling restores constants") {
  Tensor constant = Tensor::full({8, 3}, -4.5);
  Tensor pooled = casanet::pool_rows(constant);
  Tensor restored({8, 3});
  for (std::size_t r = 0; r < 8; ++r) {
    for (std::size_t c = 0; c < 3; ++c) restored.at(r, c) = pooled.at(r / 4, c);
  }
  CHECK(restored == constant);
}
