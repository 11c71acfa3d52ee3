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

#include "casanet/timeline.hpp"

#include <algorithm>
#include <stdexcept>

namespace casanet {

Timeline canonical(const Timeline& t) {
  for (const Segment& s : t.segments) {
    if (s.start < 0.0) {
      throw std::runtime_error("timeline '" + t.file_id + "': segment for '" + s.speaker +
                               "' starts before 0");
    }
    if (!(s.duration > 0.0)) {
      throw std::runtime_error("timeline '" + t.file_id + "': segment for '" + s.speaker +
                               "' has non-positive duration");
    }
  }

  Timeline out;
  out.file_id = t.file_id;
  out.segments = t.segments;
  std::sort(out.segments.begin(), out.segments.end(), [](const Segment& a, const Segment& b) {
    if (a.speaker != b.speaker) return a.speaker < b.speaker;
    if (a.start != b.start) return a.start < b.start;
    return a.duration < b.duration;
  });

  std::vector<Segment> merged;
  for (const Segment& s : out.segments) {
    if (!merged.empty() && merged.back().speaker == s.speaker &&
        s.start <= merged.back().end()) {
      Segment& prev = merged.back();
      prev.duration = std::max(prev.end(), s.end()) - prev.start;
    } else {
      merged.push_back(s);
    }
  }
  out.segments = std::move(merged);
  return out;
}

std::vector<std::string> speaker_names(const Timeline& t) {
  std::vector<std::string> names;
  for (const Segment& s : t.segments) names.push_back(s.speaker);
  std::sort(names.begin(), names.end());
  names.erase(std::unique(names.begin(), names.end()), names.end());
  return names;
}

double total_speech(const Timeline& t) {
  const Timeline c = canonical(t);
  double total = 0.0;
  for (const Segment& s : c.segments) total += s.duration;
  return total;
}

double timeline_span(const Timeline& t) {
  double span = 0.0;
  for (const Segment& s : t.segments) span = std::max(span, s.end());
  return span;
}

}  // namespace casanet
