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

#include <filesystem>
#include <vector>

namespace casanet {

// Mono audio in [-1, 1].
struct Waveform {
  std::vector<double> samples;
  int sample_rate = 16000;
};

// Reads a single-channel PCM 16-bit little-endian WAV file. Unknown
// RIFF chunks are skipped; stereo, non-PCM or non-16-bit data is
// rejected.
Waveform read_wav(const std::filesystem::path& path);

// Writes the matching format; samples are clipped to [-1, 1].
void write_wav(const std::filesystem::path& path, const Waveform& w);

}  // namespace casanet
