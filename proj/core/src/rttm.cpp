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

#include "casanet/rttm.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <tuple>

namespace casanet {

namespace {

[[noreturn]] void fail(std::size_t line_no, const std::string& reason) {
  throw std::runtime_error("rttm: line " + std::to_string(line_no) + ": " + reason);
}

double parse_time(const std::string& field, std::size_t line_no, const char* what) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(field, &consumed);
  } catch (const std::exception&) {
    fail(line_no, std::string("bad ") + what + " '" + field + "'");
  }
  if (consumed != field.size()) {
    fail(line_no, std::string("bad ") + what + " '" + field + "'");
  }
  return value;
}

}  // namespace

std::map<std::string, Timeline> parse_rttm(const std::string& text) {
  std::map<std::string, Timeline> out;
  std::istringstream lines(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(lines, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();

    std::istringstream fields_in(line);
    std::vector<std::string> fields;
    std::string field;
    while (fields_in >> field) fields.push_back(field);

    if (fields.empty()) continue;                 // blank line
    if (fields[0].front() == ';') continue;       // comment line

    if (fields.size() != 10) {
      fail(line_no, "expected 10 fields, got " + std::to_string(fields.size()));
    }
    if (fields[0] != "SPEAKER") {
      fail(line_no, "unsupported record type '" + fields[0] + "'");
    }
    const std::string& file_id = fields[1];
    const double tbeg = parse_time(fields[3], line_no, "start time");
    const double tdur = parse_time(fields[4], line_no, "duration");
    if (tbeg < 0.0) fail(line_no, "negative start time");
    if (!(tdur > 0.0)) fail(line_no, "duration must be positive");

    Timeline& t = out[file_id];
    t.file_id = file_id;
    t.segments.push_back(Segment{fields[7], tbeg, tdur});
  }
  return out;
}

std::string write_rttm(const std::vector<Timeline>& timelines) {
  struct Record {
    std::string file_id;
    double tbeg;
    double tdur;
    std::string name;
  };
  std::vector<Record> records;
  for (const Timeline& t : timelines) {
    for (const Segment& s : t.segments) {
      records.push_back(Record{t.file_id, s.start, s.duration, s.speaker});
    }
  }
  std::sort(records.begin(), records.end(), [](const Record& a, const Record& b) {
    return std::tie(a.file_id, a.tbeg, a.name, a.tdur) <
           std::tie(b.file_id, b.tbeg, b.name, b.tdur);
  });

  std::string out;
  char buf[64];
  for (const Record& r : records) {
    out += "SPEAKER " + r.file_id + " 1 ";
    std::snprintf(buf, sizeof(buf), "%.2f %.2f", r.tbeg, r.tdur);
    out += buf;
    out += " <NA> <NA> " + r.name + " <NA> <NA>\n";
  }
  return out;
}

std::map<std::string, Timeline> read_rttm_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw std::runtime_error("rttm: cannot open '" + path.string() + "'");
  }
  std::ostringstream text;
  text << in.rdbuf();
  try {
    return parse_rttm(text.str());
  } catch (const std::runtime_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

void write_rttm_file(const std::filesystem::path& path, const std::vector<Timeline>& timelines) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("rttm: cannot write '" + path.string() + "'");
  }
  out << write_rttm(timelines);
  if (!out) {
    throw std::runtime_error("rttm: write failed for '" + path.string() + "'");
  }
}

}  // namespace casanet
