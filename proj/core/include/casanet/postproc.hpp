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

#include <string>
#include <vector>

#include "casanet/tensor.hpp"
#include "casanet/timeline.hpp"

namespace casanet {

// Speech probabilities for one analysis block, [T x N] at frame_rate,
// starting `offset` seconds into the session.
struct BlockPrediction {
  Tensor probs;          // [T x N], values in [0, 1]
  double offset = 0.0;   // seconds
  double frame_rate = 25.0;
};

// Whole-session probabilities after merging overlapping blocks.
struct SessionPrediction {
  Tensor merged;  // [T_session x N]
  double frame_rate = 25.0;
};

// Per-frame arithmetic mean of every block covering that frame.
// Blocks must share N and frame_rate and jointly cover
// [0, session_length); an uncovered frame is an error.
SessionPrediction overlap_average(const std::vector<BlockPrediction>& blocks,
                                  double session_length);

// Sliding median with edge-replication padding; window must be odd.
// Window 1 is the identity.
std::vector<double> median_filter(const std::vector<double>& seq, std::size_t window = 11);

// Column-wise median filtering of a [T x N] matrix.
Tensor median_filter_columns(const Tensor& probs, std::size_t window = 11);

// label = 1 iff probability >= threshold; threshold must be in (0,1).
Tensor binarize(const Tensor& probs, double threshold = 0.5);

// Maximal runs of 1s in each column become segments of
// speaker_names[column]. Frame f spans [f, f+1) / frame_rate.
Timeline labels_to_timeline(const Tensor& labels, double frame_rate,
                            const std::vector<std::string>& speaker_names,
                            const std::string& file_id);

// Inverse of labels_to_timeline on the same frame grid: frame f of
// speaker n is 1 iff the frame center (f + 0.5) / frame_rate lies in
// one of that speaker's segments. Speakers absent from speaker_names
// are an error.
Tensor timeline_to_labels(const Timeline& t, double frame_rate, std::size_t n_frames,
                          const std::vector<std::string>& speaker_names);

}  // namespace casanet
