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

#include <map>
#include <string>

#include "casanet/timeline.hpp"

namespace casanet {

// Diarization error components, all in seconds of scored time.
struct DerReport {
  double fa = 0.0;       // hypothesis speech with no reference speaker
  double miss = 0.0;     // reference speech with no hypothesis speaker
  double spk_err = 0.0;  // speech attributed to the wrong speaker
  double total = 0.0;    // scored reference speaker-seconds
  std::map<std::string, std::string> speaker_map;  // hypothesis -> reference

  // (fa + miss + spk_err) / total; an empty reference scores 0 when
  // the hypothesis is also empty and infinity otherwise.
  double der() const;
};

// One-to-one partial mapping of hypothesis speakers onto reference
// speakers maximizing total overlapped speech time (Hungarian
// assignment on the overlap matrix). Hypothesis speakers with no
// overlap anywhere stay unmapped.
std::map<std::string, std::string> optimal_speaker_map(const Timeline& ref, const Timeline& hyp);

// Exact event-sweep scoring. In every homogeneous interval with R
// active reference and H active hypothesis speakers:
//   total   += |R| * len
//   miss    += max(0, |R| - |H|) * len
//   fa      += max(0, |H| - |R|) * len
//   spk_err += (min(|R|, |H|) - matched) * len
// where `matched` counts hypothesis speakers whose mapped reference
// speaker is also active. A collar excises [b - collar, b + collar]
// around every reference segment boundary from all accumulators.
DerReport der(const Timeline& ref, const Timeline& hyp, double collar = 0.0);

// Component-wise accumulation across files.
DerReport merge_reports(const DerReport& a, const DerReport& b);

}  // namespace casanet
