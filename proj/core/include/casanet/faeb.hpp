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

#include "casanet/tensor.hpp"

namespace casanet {

// FAEB: frame-aligned embedding binary. Layout, all little-endian:
//   magic "FAEB" | version u32 = 1 | T u32 | D u32 | N u32 |
//   frame_rate f32 | T*N*D payload f32 in [t][n][d] order
// Values are stored at f32 precision; in memory the block is a
// [T x N x D] f64 tensor.
struct FaebBlock {
  Tensor data;              // [T x N x D]
  double frame_rate = 0.0;  // frames per second
};

void write_faeb(const std::filesystem::path& path, const FaebBlock& block);

// Rejects bad magic, unsupported version, truncated or oversized
// payload — each with a distinct message naming the file.
FaebBlock read_faeb(const std::filesystem::path& path);

}  // namespace casanet
