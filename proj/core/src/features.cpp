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

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace casanet {

void fft_radix2(std::vector<std::complex<double>>& x) {
  const std::size_t n = x.size();
  if (n == 0 || (n & (n - 1)) != 0) {
    throw std::runtime_error("fft_radix2: size must be a power of two, got " +
                             std::to_string(n));
  }
  // bit-reversal permutation
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(x[i], x[j]);
  }
  // butterflies
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double angle = -2.0 * std::numbers::pi / static_cast<double>(len);
    const std::complex<double> w_len(std::cos(angle), std::sin(angle));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const std::complex<double> u = x[i + k];
        const std::complex<double> v = x[i + k + len / 2] * w;
        x[i + k] = u + v;
        x[i + k + len / 2] = u - v;
        w *= w_len;
      }
    }
  }
}

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) { return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0); }

Tensor mel_filterbank(const FbankConfig& cfg) {
  const std::size_t n_bins = static_cast<std::size_t>(cfg.mel_bins);
  const std::size_t n_fft_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;
  const double nyquist = cfg.sample_rate / 2.0;

  // mel_bins triangles need mel_bins + 2 evenly spaced mel edge points
  std::vector<double> edges_hz(n_bins + 2);
  const double mel_hi = hz_to_mel(nyquist);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] = mel_to_hz(mel_hi * static_cast<double>(i) / static_cast<double>(n_bins + 1));
  }

  Tensor fb({n_bins, n_fft_bins});
  for (std::size_t m = 0; m < n_bins; ++m) {
    const double left = edges_hz[m];
    const double center = edges_hz[m + 1];
    const double right = edges_hz[m + 2];
    for (std::size_t k = 0; k < n_fft_bins; ++k) {
      const double f = static_cast<double>(k) * cfg.sample_rate / cfg.fft_size;
      double w = 0.0;
      if (f > left && f < center) {
        w = (f - left) / (center - left);
      } else if (f == center) {
        w = 1.0;
      } else if (f > center && f < right) {
        w = (right - f) / (right - center);
      }
      fb.at(m, k) = w;
    }
  }
  return fb;
}

FbankMatrix fbank(const Waveform& w, const FbankConfig& cfg) {
  if (w.sample_rate != cfg.sample_rate) {
    throw std::runtime_error("fbank: expected " + std::to_string(cfg.sample_rate) +
                             " Hz input, got " + std::to_string(w.sample_rate));
  }
  const std::size_t flen =
      static_cast<std::size_t>(std::lround(cfg.frame_length * cfg.sample_rate));
  const std::size_t shift =
      static_cast<std::size_t>(std::lround(cfg.frame_shift * cfg.sample_rate));
  const std::size_t n = w.samples.size();
  if (n < flen) {
    throw std::runtime_error("fbank: waveform shorter than one frame (" + std::to_string(n) +
                             " < " + std::to_string(flen) + " samples)");
  }
  if (static_cast<std::size_t>(cfg.fft_size) < flen) {
    throw std::runtime_error("fbank: fft_size smaller than the frame length");
  }

  // Frames are centered on t*shift + shift/2; indices outside the
  // waveform replicate the edge sample. This rounds the frame count up
  // so an 8 s block gives 800 frames rather than the natural 798.
  const std::size_t n_frames =
      static_cast<std::size_t>((n + shift / 2) / shift);

  std::vector<double> window(flen);
  for (std::size_t i = 0; i < flen; ++i) {
    window[i] =
        0.54 - 0.46 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                               static_cast<double>(flen - 1));
  }

  const Tensor fb = mel_filterbank(cfg);
  const std::size_t n_fft_bins = static_cast<std::size_t>(cfg.fft_size) / 2 + 1;

  FbankMatrix out;
  out.frame_shift = cfg.frame_shift;
  out.frame_length = cfg.frame_length;
  out.frames = Tensor({n_frames, static_cast<std::size_t>(cfg.mel_bins)});

  std::vector<std::complex<double>> spectrum(static_cast<std::size_t>(cfg.fft_size));
  std::vector<double> power(n_fft_bins);
  const std::ptrdiff_t lead = static_cast<std::ptrdiff_t>((flen - shift) / 2);

  for (std::size_t t = 0; t < n_frames; ++t) {
    const std::ptrdiff_t begin = static_cast<std::ptrdiff_t>(t * shift) - lead;
    for (std::size_t i = 0; i < flen; ++i) {
      std::ptrdiff_t idx = begin + static_cast<std::ptrdiff_t>(i);
      idx = std::clamp<std::ptrdiff_t>(idx, 0, static_cast<std::ptrdiff_t>(n) - 1);
      spectrum[i] = window[i] * w.samples[static_cast<std::size_t>(idx)];
    }
    std::fill(spectrum.begin() + static_cast<std::ptrdiff_t>(flen), spectrum.end(),
              std::complex<double>(0.0, 0.0));
    fft_radix2(spectrum);
    for (std::size_t k = 0; k < n_fft_bins; ++k) power[k] = std::norm(spectrum[k]);

    for (std::size_t m = 0; m < static_cast<std::size_t>(cfg.mel_bins); ++m) {
      double energy = 0.0;
      for (std::size_t k = 0; k < n_fft_bins; ++k) energy += fb.at(m, k) * power[k];
      out.frames.at(t, m) = std::log(std::max(energy, cfg.log_floor));
    }
  }
  return out;
}

BlockPlan plan_blocks(double session_length, double block_length, double stride) {
  if (!(block_length > 0.0) || !(stride > 0.0)) {
    throw std::runtime_error("plan_blocks: block length and stride must be positive");
  }
  if (session_length < block_length) {
    throw std::runtime_error(
        "plan_blocks: session (" + std::to_string(session_length) + " s) is shorter than one " +
        std::to_string(block_length) + " s block; zero-pad the session upstream");
  }
  BlockPlan plan;
  plan.session_length = session_length;
  plan.block_length = block_length;
  plan.stride = stride;
  double t = 0.0;
  while (t + block_length < session_length) {
    plan.offsets.push_back(t);
    t += stride;
  }
  const double last = session_length - block_length;
  if (plan.offsets.empty() || last > plan.offsets.back()) {
    plan.offsets.push_back(last);  // end-anchored so nothing is dropped
  }
  return plan;
}

Tensor pool_rows(const Tensor& x, std::size_t factor) {
  if (x.rank() != 2) {
    throw std::runtime_error("pool_rows: expected a rank-2 tensor, got " + x.shape_str());
  }
  if (factor == 0 || x.dim(0) % factor != 0) {
    throw std::runtime_error("pool_rows: row count " + std::to_string(x.dim(0)) +
                             " not divisible by " + std::to_string(factor));
  }
  const std::size_t rows_out = x.dim(0) / factor;
  const std::size_t cols = x.dim(1);
  Tensor out({rows_out, cols});
  for (std::size_t r = 0; r < rows_out; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      double sum = 0.0;
      for (std::size_t i = 0; i < factor; ++i) sum += x.at(r * factor + i, c);
      out.at(r, c) = sum / static_cast<double>(factor);
    }
  }
  return out;
}

}  // namespace casanet
