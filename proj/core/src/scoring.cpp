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

#include "casanet/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace casanet {

namespace {

// Per-speaker sorted disjoint segment spans.
struct SpeakerTrack {
  std::string name;
  std::vector<std::pair<double, double>> spans;  // [begin, end)

  bool active_at(double t) const {
    for (const auto& [b, e] : spans) {
      if (t >= b && t < e) return true;
    }
    return false;
  }
};

std::vector<SpeakerTrack> tracks_of(const Timeline& canonical_t) {
  std::vector<SpeakerTrack> tracks;
  for (const Segment& s : canonical_t.segments) {
    if (tracks.empty() || tracks.back().name != s.speaker) {
      tracks.push_back(SpeakerTrack{s.speaker, {}});
    }
    tracks.back().spans.emplace_back(s.start, s.end());
  }
  return tracks;
}

double overlap_seconds(const SpeakerTrack& a, const SpeakerTrack& b) {
  double total = 0.0;
  for (const auto& [ab, ae] : a.spans) {
    for (const auto& [bb, be] : b.spans) {
      total += std::max(0.0, std::min(ae, be) - std::max(ab, bb));
    }
  }
  return total;
}

// Minimum-cost perfect assignment on a square matrix (Jonker-style
// potentials, O(n^3)). Returns match[col] = row. Deterministic for a
// fixed matrix.
std::vector<int> min_cost_assignment(const std::vector<std::vector<double>>& cost) {
  const int n = static_cast<int>(cost.size());
  const double kInf = std::numeric_limits<double>::infinity();
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<int> p(n + 1, 0), way(n + 1, 0);
  for (int i = 1; i <= n; ++i) {
    p[0] = i;
    int j0 = 0;
    std::vector<double> minv(n + 1, kInf);
    std::vector<char> used(n + 1, 0);
    do {
      used[j0] = 1;
      const int i0 = p[j0];
      int j1 = -1;
      double delta = kInf;
      for (int j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost[i0 - 1][j - 1] - u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (int j = 0; j <= n; ++j) {
        if (used[j]) {
          u[p[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (p[j0] != 0);
    do {
      const int j1 = way[j0];
      p[j0] = p[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> match(n);
  for (int j = 1; j <= n; ++j) match[j - 1] = p[j] - 1;
  return match;
}

}  // namespace

double DerReport::der() const {
  const double errors = fa + miss + spk_err;
  if (total == 0.0) {
    return errors == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
  return errors / total;
}

std::map<std::string, std::string> optimal_speaker_map(const Timeline& ref, const Timeline& hyp) {
  const Timeline ref_c = canonical(ref);
  const Timeline hyp_c = canonical(hyp);
  const std::vector<SpeakerTrack> ref_tracks = tracks_of(ref_c);
  const std::vector<SpeakerTrack> hyp_tracks = tracks_of(hyp_c);
  if (ref_tracks.empty() || hyp_tracks.empty()) return {};

  // square matrix padded with zero-overlap dummies; maximize by
  // minimizing negated overlap
  const std::size_t n = std::max(ref_tracks.size(), hyp_tracks.size());
  std::vector<std::vector<double>> cost(n, std::vector<double>(n, 0.0));
  for (std::size_t r = 0; r < ref_tracks.size(); ++r) {
    for (std::size_t h = 0; h < hyp_tracks.size(); ++h) {
      cost[r][h] = -overlap_seconds(ref_tracks[r], hyp_tracks[h]);
    }
  }
  const std::vector<int> match = min_cost_assignment(cost);

  std::map<std::string, std::string> mapping;
  for (std::size_t h = 0; h < hyp_tracks.size(); ++h) {
    const int r = match[h];
    if (r < 0 || static_cast<std::size_t>(r) >= ref_tracks.size()) continue;
    if (cost[static_cast<std::size_t>(r)][h] < 0.0) {  // positive overlap only
      mapping[hyp_tracks[h].name] = ref_tracks[static_cast<std::size_t>(r)].name;
    }
  }
  return mapping;
}

DerReport der(const Timeline& ref, const Timeline& hyp, double collar) {
  if (collar < 0.0) {
    throw std::runtime_error("der: collar must be non-negative");
  }
  if (!ref.file_id.empty() && !hyp.file_id.empty() && ref.file_id != hyp.file_id) {
    throw std::runtime_error("der: file ids differ, '" + ref.file_id + "' vs '" + hyp.file_id +
                             "'");
  }
  const Timeline ref_c = canonical(ref);
  const Timeline hyp_c = canonical(hyp);
  const std::vector<SpeakerTrack> ref_tracks = tracks_of(ref_c);
  const std::vector<SpeakerTrack> hyp_tracks = tracks_of(hyp_c);

  DerReport report;
  report.speaker_map = optimal_speaker_map(ref_c, hyp_c);

  // no-score zones around every reference segment boundary
  std::vector<std::pair<double, double>> zones;
  if (collar > 0.0) {
    for (const Segment& s : ref_c.segments) {
      zones.emplace_back(s.start - collar, s.start + collar);
      zones.emplace_back(s.end() - collar, s.end() + collar);
    }
    std::sort(zones.begin(), zones.end());
    std::vector<std::pair<double, double>> merged;
    for (const auto& z : zones) {
      if (!merged.empty() && z.first <= merged.back().second) {
        merged.back().second = std::max(merged.back().second, z.second);
      } else {
        merged.push_back(z);
      }
    }
    zones = std::move(merged);
  }

  // elementary intervals between all boundary events
  std::vector<double> events;
  for (const auto& tr : {std::cref(ref_tracks), std::cref(hyp_tracks)}) {
    for (const SpeakerTrack& t : tr.get()) {
      for (const auto& [b, e] : t.spans) {
        events.push_back(b);
        events.push_back(e);
      }
    }
  }
  for (const auto& [b, e] : zones) {
    events.push_back(b);
    events.push_back(e);
  }
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end()), events.end());

  for (std::size_t i = 0; i + 1 < events.size(); ++i) {
    const double t0 = events[i];
    const double t1 = events[i + 1];
    const double len = t1 - t0;
    if (len <= 0.0) continue;
    const double mid = t0 + len / 2.0;

    bool excluded = false;
    for (const auto& [b, e] : zones) {
      if (mid >= b && mid < e) {
        excluded = true;
        break;
      }
    }
    if (excluded) continue;

    std::vector<const SpeakerTrack*> active_ref;
    for (const SpeakerTrack& t : ref_tracks) {
      if (t.active_at(mid)) active_ref.push_back(&t);
    }
    std::size_t active_hyp = 0;
    std::size_t matched = 0;
    for (const SpeakerTrack& t : hyp_tracks) {
      if (!t.active_at(mid)) continue;
      ++active_hyp;
      const auto it = report.speaker_map.find(t.name);
      if (it == report.speaker_map.end()) continue;
      for (const SpeakerTrack* r : active_ref) {
        if (r->name == it->second) {
          ++matched;
          break;
        }
      }
    }

    const double n_ref = static_cast<double>(active_ref.size());
    const double n_hyp = static_cast<double>(active_hyp);
    report.total += n_ref * len;
    report.miss += std::max(0.0, n_ref - n_hyp) * len;
    report.fa += std::max(0.0, n_hyp - n_ref) * len;
    report.spk_err += (std::min(n_ref, n_hyp) - static_cast<double>(matched)) * len;
  }
  return report;
}

DerReport merge_reports(const DerReport& a, const DerReport& b) {
  DerReport out;
  out.fa = a.fa + b.fa;
  out.miss = a.miss + b.miss;
  out.spk_err = a.spk_err + b.spk_err;
  out.total = a.total + b.total;
  return out;
}

}  // namespace casanet
