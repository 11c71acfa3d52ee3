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

#include "casanet/postproc.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace casanet {

SessionPrediction overlap_average(const std::vector<BlockPrediction>& blocks,
                                  double session_length) {
  if (blocks.empty()) {
    throw std::runtime_error("overlap_average: no blocks given");
  }
  const std::size_t n_speakers = blocks.front().probs.dim(1);
  const double frame_rate = blocks.front().frame_rate;
  for (const BlockPrediction& b : blocks) {
    if (b.probs.rank() != 2 || b.probs.dim(1) != n_speakers) {
      throw std::runtime_error("overlap_average: inconsistent speaker count across blocks");
    }
    if (b.frame_rate != frame_rate) {
      throw std::runtime_error("overlap_average: inconsistent frame rates across blocks");
    }
  }

  const std::size_t t_session =
      static_cast<std::size_t>(std::ceil(session_length * frame_rate));
  Tensor sum({t_session, n_speakers});
  std::vector<double> cover(t_session, 0.0);

  for (const BlockPrediction& b : blocks) {
    const std::size_t first =
        static_cast<std::size_t>(std::llround(b.offset * frame_rate));
    for (std::size_t t = 0; t < b.probs.dim(0); ++t) {
      const std::size_t frame = first + t;
      if (frame >= t_session) break;  // tail beyond the session span
      cover[frame] += 1.0;
      for (std::size_t n = 0; n < n_speakers; ++n) {
        sum.at(frame, n) += b.probs.at(t, n);
      }
    }
  }

  SessionPrediction out;
  out.frame_rate = frame_rate;
  out.merged = Tensor({t_session, n_speakers});
  for (std::size_t t = 0; t < t_session; ++t) {
    if (cover[t] == 0.0) {
      throw std::runtime_error("overlap_average: frame " + std::to_string(t) +
                               " is covered by no block");
    }
    for (std::size_t n = 0; n < n_speakers; ++n) {
      out.merged.at(t, n) = sum.at(t, n) / cover[t];
    }
  }
  return out;
}

std::vector<double> median_filter(const std::vector<double>& seq, std::size_t window) {
  if (window % 2 == 0 || window == 0) {
    throw std::runtime_error("median_filter: window must be odd, got " + std::to_string(window));
  }
  if (seq.empty() || window == 1) return seq;

  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(window / 2);
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(seq.size());
  std::vector<double> out(seq.size());
  std::vector<double> scratch(window);
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    for (std::ptrdiff_t k = -half; k <= half; ++k) {
      const std::ptrdiff_t idx = std::clamp<std::ptrdiff_t>(i + k, 0, n - 1);
      scratch[static_cast<std::size_t>(k + half)] = seq[static_cast<std::size_t>(idx)];
    }
    std::nth_element(scratch.begin(), scratch.begin() + half, scratch.end());
    out[static_cast<std::size_t>(i)] = scratch[static_cast<std::size_t>(half)];
  }
  return out;
}

Tensor median_filter_columns(const Tensor& probs, std::size_t window) {
  if (probs.rank() != 2) {
    throw std::runtime_error("median_filter_columns: expected [T x N], got " + probs.shape_str());
  }
  Tensor out(probs.shape());
  std::vector<double> column(probs.dim(0));
  for (std::size_t n = 0; n < probs.dim(1); ++n) {
    for (std::size_t t = 0; t < probs.dim(0); ++t) column[t] = probs.at(t, n);
    const std::vector<double> filtered = median_filter(column, window);
    for (std::size_t t = 0; t < probs.dim(0); ++t) out.at(t, n) = filtered[t];
  }
  return out;
}

Tensor binarize(const Tensor& probs, double threshold) {
  if (!(threshold > 0.0) || !(threshold < 1.0)) {
    throw std::runtime_error("binarize: threshold must lie in (0, 1)");
  }
  Tensor out(probs.shape());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = probs[i] >= threshold ? 1.0 : 0.0;
  }
  return out;
}

Timeline labels_to_timeline(const Tensor& labels, double frame_rate,
                            const std::vector<std::string>& speaker_names,
                            const std::string& file_id) {
  if (labels.rank() != 2) {
    throw std::runtime_error("labels_to_timeline: expected [T x N], got " + labels.shape_str());
  }
  if (labels.dim(1) != speaker_names.size()) {
    throw std::runtime_error("labels_to_timeline: " + std::to_string(labels.dim(1)) +
                             " label columns but " + std::to_string(speaker_names.size()) +
                             " speaker names");
  }
  Timeline out;
  out.file_id = file_id;
  const std::size_t t_total = labels.dim(0);
  for (std::size_t n = 0; n < labels.dim(1); ++n) {
    std::size_t run_start = 0;
    bool in_run = false;
    for (std::size_t t = 0; t <= t_total; ++t) {
      const bool on = t < t_total && labels.at(t, n) != 0.0;
      if (on && !in_run) {
        run_start = t;
        in_run = true;
      } else if (!on && in_run) {
        out.segments.push_back(Segment{speaker_names[n],
                                       static_cast<double>(run_start) / frame_rate,
                                       static_cast<double>(t - run_start) / frame_rate});
        in_run = false;
      }
    }
  }
  std::sort(out.segments.begin(), out.segments.end(), [](const Segment& a, const Segment& b) {
    if (a.start != b.start) return a.start < b.start;
    return a.speaker < b.speaker;
  });
  return out;
}

Tensor timeline_to_labels(const Timeline& t, double frame_rate, std::size_t n_frames,
                          const std::vector<std::string>& speaker_names) {
  Tensor labels({n_frames, speaker_names.size()});
  for (const Segment& s : t.segments) {
    const auto it = std::find(speaker_names.begin(), speaker_names.end(), s.speaker);
    if (it == speaker_names.end()) {
      throw std::runtime_error("timeline_to_labels: speaker '" + s.speaker +
                               "' missing from the name list");
    }
    const std::size_t col = static_cast<std::size_t>(it - speaker_names.begin());
    for (std::size_t f = 0; f < n_frames; ++f) {
      const double center = (static_cast<double>(f) + 0.5) / frame_rate;
      if (center >= s.start && center < s.end()) labels.at(f, col) = 1.0;
    }
  }
  return labels;
}

}  // namespace casanet
