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

#include "casanet/faeb.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <stdexcept>

namespace casanet {

namespace {

constexpr std::uint32_t kFaebVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f32(std::string& out, float v) { put_u32(out, std::bit_cast<std::uint32_t>(v)); }

std::uint32_t get_u32(const std::string& in, std::size_t offset) {
  return static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset])) |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 1])) << 8 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 2])) << 16 |
         static_cast<std::uint32_t>(static_cast<unsigned char>(in[offset + 3])) << 24;
}

float get_f32(const std::string& in, std::size_t offset) {
  return std::bit_cast<float>(get_u32(in, offset));
}

[[noreturn]] void fail(const std::filesystem::path& path, const std::string& reason) {
  throw std::runtime_error("faeb: " + path.string() + ": " + reason);
}

}  // namespace

void write_faeb(const std::filesystem::path& path, const FaebBlock& block) {
  if (block.data.rank() != 3) {
    throw std::runtime_error("faeb: block must be rank-3 [T x N x D], got " +
                             block.data.shape_str());
  }
  const std::uint32_t T = static_cast<std::uint32_t>(block.data.dim(0));
  const std::uint32_t N = static_cast<std::uint32_t>(block.data.dim(1));
  const std::uint32_t D = static_cast<std::uint32_t>(block.data.dim(2));

  std::string bytes;
  bytes.reserve(24 + block.data.size() * 4);
  bytes += "FAEB";
  put_u32(bytes, kFaebVersion);
  put_u32(bytes, T);
  put_u32(bytes, D);
  put_u32(bytes, N);
  put_f32(bytes, static_cast<float>(block.frame_rate));
  // tensor memory is [t][n][d] row-major, matching the payload order
  for (std::size_t i = 0; i < block.data.size(); ++i) {
    put_f32(bytes, static_cast<float>(block.data[i]));
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(path, "write failed");
}

FaebBlock read_faeb(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  if (bytes.size() < 24) fail(path, "truncated header");
  if (bytes.compare(0, 4, "FAEB") != 0) fail(path, "bad magic");
  const std::uint32_t version = get_u32(bytes, 4);
  if (version != kFaebVersion) {
    fail(path, "unsupported version " + std::to_string(version));
  }
  const std::uint32_t T = get_u32(bytes, 8);
  const std::uint32_t D = get_u32(bytes, 12);
  const std::uint32_t N = get_u32(bytes, 16);
  const std::size_t count = static_cast<std::size_t>(T) * N * D;
  const std::size_t expected = 24 + count * 4;
  if (bytes.size() < expected) fail(path, "truncated payload");
  if (bytes.size() > expected) fail(path, "trailing bytes after payload");
  if (count == 0) fail(path, "empty dimensions in header");

  FaebBlock block;
  block.frame_rate = static_cast<double>(get_f32(bytes, 20));
  block.data = Tensor({T, N, D});
  for (std::size_t i = 0; i < count; ++i) {
    block.data[i] = static_cast<double>(get_f32(bytes, 24 + i * 4));
  }
  return block;
}

}  // namespace casanet
