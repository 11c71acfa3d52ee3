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

namespace casanet {

// One speaker turn: who spoke, from when, for how long (seconds).
struct Segment {
  std::string speaker;
  double start = 0.0;
  double duration = 0.0;

  double end() const { return start + duration; }

  bool operator==(const Segment&) const = default;
};

// All speaker turns of one recording. Overlapping speech is simply
// multiple speakers with intersecting segments.
struct Timeline {
  std::string file_id;
  std::vector<Segment> segments;

  bool operator==(const Timeline&) const = default;
};

// Canonical form: segments sorted by (speaker, start) with per-speaker
// overlaps and touching segments merged. Validates start >= 0 and
// duration > 0. All scoring operates on canonical timelines.
Timeline canonical(const Timeline& t);

// Sorted unique speaker names.
std::vector<std::string> speaker_names(const Timeline& t);

// Sum of segment durations after canonical merging; overlapped speech
// counts once per speaker speaking.
double total_speech(const Timeline& t);

// Latest segment end, or 0 for an empty timeline.
double timeline_span(const Timeline& t);

}  // namespace casanet
