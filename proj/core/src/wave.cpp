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

#include "casanet/wave.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <stdexcept>
#include <string>

namespace casanet {

namespace {

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
  throw std::runtime_error("wav: " + path.string() + ": " + reason);
}

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 3])) << 24;
}

std::uint16_t get_u16(const std::string& in, std::size_t offset) {
  return static_cast<std::uint16_t>(static_cast<unsigned char>(in[offset]) |
                                    static_cast<unsigned char>(in[offset + 1]) << 8);
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

}  // namespace

Waveform read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 12 || bytes.compare(0, 4, "RIFF") != 0 || bytes.compare(8, 4, "WAVE") != 0) {
    fail(path, "not a RIFF/WAVE file");
  }

  bool have_fmt = false;
  int sample_rate = 0;
  std::size_t data_begin = 0, data_size = 0;
  std::size_t pos = 12;
  while (pos + 8 <= bytes.size()) {
    const std::string id = bytes.substr(pos, 4);
    const std::uint32_t chunk_size = get_u32(bytes, pos + 4);
    const std::size_t body = pos + 8;
    if (body + chunk_size > bytes.size()) fail(path, "chunk '" + id + "' overruns file");
    if (id == "fmt ") {
      if (chunk_size < 16) fail(path, "fmt chunk too short");
      const std::uint16_t format = get_u16(bytes, body);
      const std::uint16_t channels = get_u16(bytes, body + 2);
      sample_rate = static_cast<int>(get_u32(bytes, body + 4));
      const std::uint16_t bits = get_u16(bytes, body + 14);
      if (format != 1) fail(path, "only PCM data is supported");
      if (channels != 1) fail(path, "only mono data is supported");
      if (bits != 16) fail(path, "only 16-bit samples are supported");
      have_fmt = true;
    } else if (id == "data") {
      data_begin = body;
      data_size = chunk_size;
    }
    pos = body + chunk_size + (chunk_size % 2);  // chunks are word-aligned
  }
  if (!have_fmt) fail(path, "missing fmt chunk");
  if (data_begin == 0) fail(path, "missing data chunk");
  if (data_size % 2 != 0) fail(path, "odd data chunk size");

  Waveform w;
  w.sample_rate = sample_rate;
  w.samples.resize(data_size / 2);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    const std::uint16_t raw = get_u16(bytes, data_begin + 2 * i);
    const std::int16_t s = static_cast<std::int16_t>(raw);
    w.samples[i] = static_cast<double>(s) / 32768.0;
  }
  return w;
}

void write_wav(const std::filesystem::path& path, const Waveform& w) {
  const std::uint32_t data_size = static_cast<std::uint32_t>(w.samples.size() * 2);
  std::string bytes;
  bytes.reserve(44 + data_size);
  bytes += "RIFF";
  put_u32(bytes, 36 + data_size);
  bytes += "WAVEfmt ";
  put_u32(bytes, 16);
  put_u16(bytes, 1);  // PCM
  put_u16(bytes, 1);  // mono
  put_u32(bytes, static_cast<std::uint32_t>(w.sample_rate));
  put_u32(bytes, static_cast<std::uint32_t>(w.sample_rate * 2));  // byte rate
  put_u16(bytes, 2);                                              // block align
  put_u16(bytes, 16);                                             // bits per sample
  bytes += "data";
  put_u32(bytes, data_size);
  for (double sample : w.samples) {
    const double clipped = std::clamp(sample, -1.0, 1.0);
    const auto s = static_cast<std::int16_t>(std::lrint(clipped * 32767.0));
    put_u16(bytes, static_cast<std::uint16_t>(s));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(path, "write failed");
}

}  // namespace casanet
