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
#include <map>
#include <string>
#include <vector>

#include "casanet/timeline.hpp"

namespace casanet {

// RTTM speaker records: ten whitespace-separated fields per line,
//   SPEAKER <file_id> 1 <tbeg> <tdur> <NA> <NA> <speaker> <NA> <NA>
// Blank lines and ';' comment lines are skipped. Anything else —
// wrong field count, a record type other than SPEAKER, non-numeric or
// negative times — raises an error naming the line.
std::map<std::string, Timeline> parse_rttm(const std::string& text);

// Serializes with times at 0.01 s resolution, records sorted by
// (file_id, tbeg, name). parse_rttm(write_rttm(x)) == x for timelines
// on that grid.
std::string write_rttm(const std::vector<Timeline>& timelines);

std::map<std::string, Timeline> read_rttm_file(const std::filesystem::path& path);
void write_rttm_file(const std::filesystem::path& path, const std::vector<Timeline>& timelines);

}  // namespace casanet
