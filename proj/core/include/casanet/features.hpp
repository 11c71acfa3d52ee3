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

#pragma once

#include <complex>
#include <vector>

#include "casanet/tensor.hpp"
#include "casanet/wave.hpp"

namespace casanet {

// Fixed acoustic front-end geometry: 16 kHz input, 25 ms Hamming
// frames at a 10 ms shift, 512-point FFT, 40 mel bins. An 8 s block
// maps to exactly 800 frames (the natural count is 798; symmetric
// edge padding supplies the remainder) and pools 4:1 onto the 25 Hz
// video rate.
struct FbankConfig {
  int sample_rate = 16000;
  double frame_length = 0.025;  // seconds
  double frame_shift = 0.010;   // seconds
  int fft_size = 512;
  int mel_bins = 40;
  double log_floor = 1e-10;
};

struct FbankMatrix {
  Tensor frames;  // [T_a x mel_bins]
  double frame_shift = 0.010;
  double frame_length = 0.025;
};

// Overlapping fixed-length windows covering a whole session.
struct BlockPlan {
  double session_length = 0.0;
  double block_length = 8.0;
  double stride = 4.0;
  std::vector<double> offsets;
};

// In-place iterative radix-2 FFT; n must be a power of two.
void fft_radix2(std::vector<std::complex<double>>& x);

// HTK mel scale.
double hz_to_mel(double hz);
double mel_to_hz(double mel);

// Triangular mel filterbank over FFT power bins, spanning 0 Hz to
// Nyquist. Returns [mel_bins x (fft_size/2 + 1)].
Tensor mel_filterbank(const FbankConfig& cfg);

// Log-mel filterbank energies. The waveform is edge-padded so that
// T_out = round(n_samples / shift_samples); an 8 s block therefore
// yields exactly 800 frames. Rejects non-16 kHz input and waveforms
// shorter than one frame.
FbankMatrix fbank(const Waveform& w, const FbankConfig& cfg = {});

// Block offsets 0, stride, 2*stride, ...; the final block is clamped
// to end exactly at session_length so no audio is dropped. Rejects
// sessions shorter than one block.
BlockPlan plan_blocks(double session_length, double block_length = 8.0, double stride = 4.0);

// Non-overlapping mean over groups of `factor` consecutive rows:
// [T x D] -> [T/factor x D]. T must be divisible by factor.
Tensor pool_rows(const Tensor& x, std::size_t factor = 4);

}  // namespace casanet
