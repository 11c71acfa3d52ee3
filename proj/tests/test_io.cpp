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

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "casanet/faeb.hpp"
#include "casanet/rng.hpp"
#include "casanet/rttm.hpp"
#include "casanet/timeline.hpp"
#include "casanet/wave.hpp"
#include "doctest.h"

using casanet::FaebBlock;
using casanet::Rng;
using casanet::Segment;
using casanet::Tensor;
using casanet::Timeline;
using casanet::Waveform;

namespace {

std::filesystem::path temp_dir() {
  const auto dir = std::filesystem::temp_directory_path() / "casanet_io_tests";
  std::filesystem::create_directories(dir);
  return dir;
}

// Random timeline on the 0.01 s grid, the writer's native resolution.
Timeline random_timeline(const std::string& file_id, Rng& rng) {
  Timeline t;
  t.file_id = file_id;
  const std::size_t n_segments = 1 + rng.uniform_index(6);
  const std::size_t n_speakers = 1 + rng.uniform_index(4);
  for (std::size_t i = 0; i < n_segments; ++i) {
    Segment s;
    s.speaker = "spk" + std::to_string(rng.uniform_index(n_speakers));
    s.start = static_cast<double>(rng.uniform_index(3000)) / 100.0;
    s.duration = static_cast<double>(1 + rng.uniform_index(500)) / 100.0;
    t.segments.push_back(s);
  }
  return t;
}

}  // namespace

TEST_CASE("timeline: canonical sorts and merges per speaker") {
  Timeline t;
  t.file_id = "f";
  t.segments = {
      {"b", 5.0, 1.0}, {"a", 0.0, 2.0}, {"a", 1.5, 1.0}, {"a", 2.5, 0.5}, {"b", 8.0, 1.0}};
  Timeline c = casanet::canonical(t);
  REQUIRE(c.segments.size() == 3);
  // a: [0, 2) merged with [1.5, 2.5) merged with touching [2.5, 3)
  CHECK(c.segments[0] == Segment{"a", 0.0, 3.0});
  CHECK(c.segments[1] == Segment{"b", 5.0, 1.0});
  CHECK(c.segments[2] == Segment{"b", 8.0, 1.0});

  CHECK(casanet::total_speech(t) == doctest::Approx(5.0));
  CHECK(casanet::timeline_span(t) == doctest::Approx(9.0));
  CHECK(casanet::speaker_names(t) == std::vector<std::string>{"a", "b"});
}

TEST_CASE("timeline: canonical rejects bad segments") {
  Timeline neg{"f", {{"a", -0.5, 1.0}}};
  CHECK_THROWS(casanet::canonical(neg));
  Timeline zero{"f", {{"a", 0.5, 0.0}}};
  CHECK_THROWS(casanet::canonical(zero));
}

TEST_CASE("rttm: parses the documented single-record line") {
  auto parsed = casanet::parse_rttm("SPEAKER f1 1 0.00 1.00 <NA> <NA> spkA <NA> <NA>\n");
  REQUIRE(parsed.size() == 1);
  const Timeline& t = parsed.at("f1");
  REQUIRE(t.segments.size() == 1);
  CHECK(t.segments[0] == Segment{"spkA", 0.0, 1.0});
}

TEST_CASE("rttm: empty input, blank lines and comments") {
  CHECK(casanet::parse_rttm("").empty());
  auto parsed = casanet::parse_rttm(
      "\n; a comment line\n\n"
      "SPEAKER f1 1 0.50 2.00 <NA> <NA> spkB <NA> <NA>\n\n");
  REQUIRE(parsed.size() == 1);
  CHECK(parsed.at("f1").segments.size() == 1);
}

TEST_CASE("rttm: malformed lines name the offending line") {
  CHECK_THROWS_WITH_AS(casanet::parse_rttm("SPEAKER f1 1 0.00 1.00 <NA> <NA> spkA <NA>\n"),
                       "rttm: line 1: expected 10 fields, got 9", std::runtime_error);
  CHECK_THROWS_WITH_AS(
      casanet::parse_rttm("; ok\nSPEAKER f1 1 0.00 oops <NA> <NA> spkA <NA> <NA>\n"),
      "rttm: line 2: bad duration 'oops'", std::runtime_error);
  CHECK_THROWS_WITH_AS(casanet::parse_rttm("SPEAKER f1 1 -1.00 1.00 <NA> <NA> spkA <NA> <NA>\n"),
                       "rttm: line 1: negative start time", std::runtime_error);
  CHECK_THROWS_WITH_AS(casanet::parse_rttm("SPEAKER f1 1 0.00 0.00 <NA> <NA> spkA <NA> <NA>\n"),
                       "rttm: line 1: duration must be positive", std::runtime_error);
  CHECK_THROWS_WITH_AS(casanet::parse_rttm("LEXEME f1 1 0.00 1.00 <NA> <NA> w <NA> <NA>\n"),
                       "rttm: line 1: unsupported record type 'LEXEME'", std::runtime_error);
}

TEST_CASE("rttm: writer emits sorted, fixed-format records") {
  Timeline t1{"zeta", {{"s2", 1.0, 2.0}, {"s1", 1.0, 2.0}}};
  Timeline t2{"alpha", {{"s1", 0.125, 1.0}}};
  const std::string text = casanet::write_rttm({t1, t2});
  CHECK(text ==
        "SPEAKER alpha 1 0.12 1.00 <NA> <NA> s1 <NA> <NA>\n"
        "SPEAKER zeta 1 1.00 2.00 <NA> <NA> s1 <NA> <NA>\n"
        "SPEAKER zeta 1 1.00 2.00 <NA> <NA> s2 <NA> <NA>\n");
  CHECK(casanet::write_rttm({}) == "");
}

TEST_CASE("rttm: fuzz round-trip of 1000 random timelines") {
  Rng rng(20260815);
  for (int round = 0; round < 1000; ++round) {
    Timeline original = random_timeline("file" + std::to_string(round), rng);
    auto parsed = casanet::parse_rttm(casanet::write_rttm({original}));
    REQUIRE(parsed.size() == 1);
    // compare canonically: writer sorts records, parser keeps file order
    const Timeline a = casanet::canonical(original);
    const Timeline b = casanet::canonical(parsed.at(original.file_id));
    REQUIRE(a.segments.size() == b.segments.size());
    for (std::size_t i = 0; i < a.segments.size(); ++i) {
      CHECK(a.segments[i].speaker == b.segments[i].speaker);
      CHECK(std::fabs(a.segments[i].start - b.segments[i].start) < 1e-9);
      CHECK(std::fabs(a.segments[i].duration - b.segments[i].duration) < 1e-9);
    }
  }
}

TEST_CASE("rttm: file round-trip and missing-file error") {
  const auto path = temp_dir() / "roundtrip.rttm";
  Timeline t{"f1", {{"spkA", 0.0, 1.0}, {"spkB", 0.5, 2.0}}};
  casanet::write_rttm_file(path, {t});
  auto parsed = casanet::read_rttm_file(path);
  CHECK(parsed.at("f1").segments.size() == 2);
  CHECK_THROWS(casanet::read_rttm_file(temp_dir() / "does_not_exist.rttm"));
}

TEST_CASE("faeb: write/read round-trip is exact at f32 precision") {
  const auto path = temp_dir() / "block.faeb";
  Rng rng(7);
  FaebBlock block;
  block.frame_rate = 25.0;
  block.data = Tensor({6, 3, 4});
  for (std::size_t i = 0; i < block.data.size(); ++i) {
    block.data[i] = static_cast<double>(static_cast<float>(rng.gaussian()));
  }
  casanet::write_faeb(path, block);
  FaebBlock back = casanet::read_faeb(path);
  CHECK(back.frame_rate == 25.0);
  CHECK(back.data == block.data);
}

TEST_CASE("faeb: header layout matches the documented byte oracle") {
  // Hand-build a minimal file: T=1, D=2, N=1, frame_rate=25, payload
  // [1.0f, -2.0f], and check the reader agrees byte for byte.
  const auto path = temp_dir() / "hand.faeb";
  const unsigned char bytes[] = {
      'F', 'A',  'E',  'B',              // magic
      1,   0,    0,    0,                // version = 1
      1,   0,    0,    0,                // T = 1
      2,   0,    0,    0,                // D = 2
      1,   0,    0,    0,                // N = 1
      0,   0,    0xC8, 0x41,             // frame_rate = 25.0f
      0,   0,    0x80, 0x3F,             // 1.0f
      0,   0,    0,    0xC0,             // -2.0f
  };
  std::ofstream out(path, std::ios::binary);
  out.write(reinterpret_cast<const char*>(bytes), sizeof(bytes));
  out.close();

  FaebBlock block = casanet::read_faeb(path);
  CHECK(block.frame_rate == 25.0);
  REQUIRE(block.data.shape() == std::vector<std::size_t>{1, 1, 2});
  CHECK(block.data[0] == 1.0);
  CHECK(block.data[1] == -2.0);

  // and the writer reproduces the identical bytes
  casanet::write_faeb(path, block);
  std::ifstream in(path, std::ios::binary);
  std::string written((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  REQUIRE(written.size() == sizeof(bytes));
  CHECK(std::equal(written.begin(), written.end(), reinterpret_cast<const char*>(bytes)));
}

TEST_CASE("faeb: corrupt files raise distinct errors") {
  const auto dir = temp_dir();
  FaebBlock block;
  block.frame_rate = 25.0;
  block.data = Tensor::full({2, 1, 2}, 0.5);
  const auto good = dir / "good.faeb";
  casanet::write_faeb(good, block);

  std::ifstream in(good, std::ios::binary);
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  in.close();

  auto write_variant = [&](const std::string& name, const std::string& content) {
    const auto p = dir / name;
    std::ofstream out(p, std::ios::binary);
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    return p;
  };

  std::string bad_magic = bytes;
  bad_magic[0] = 'X';
  CHECK_THROWS_WITH(casanet::read_faeb(write_variant("bad_magic.faeb", bad_magic)),
                    doctest::Contains("bad magic"));

  std::string bad_version = bytes;
  bad_version[4] = 9;
  CHECK_THROWS_WITH(casanet::read_faeb(write_variant("bad_version.faeb", bad_version)),
                    doctest::Contains("unsupported version"));

  CHECK_THROWS_WITH(casanet::read_faeb(write_variant("short.faeb", bytes.substr(0, bytes.size() - 3))),
                    doctest::Contains("truncated payload"));

  CHECK_THROWS_WITH(casanet::read_faeb(write_variant("long.faeb", bytes + "xx")),
                    doctest::Contains("trailing bytes"));

  CHECK_THROWS_WITH(casanet::read_faeb(write_variant("header_only.faeb", bytes.substr(0, 10))),
                    doctest::Contains("truncated header"));

  CHECK_THROWS(casanet::read_faeb(dir / "missing.faeb"));
  FaebBlock bad_rank;
  bad_rank.data = Tensor({2, 2});
  CHECK_THROWS(casanet::write_faeb(dir / "bad_rank.faeb", bad_rank));
}

TEST_CASE("wav: round-trip preserves 16-bit samples") {
  const auto path = temp_dir() / "tone.wav";
  Waveform w;
  w.sample_rate = 16000;
  w.samples.resize(1600);
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    w.samples[i] = 0.5 * std::sin(2.0 * 3.141592653589793 * 440.0 * static_cast<double>(i) / 16000.0);
  }
  casanet::write_wav(path, w);
  Waveform back = casanet::read_wav(path);
  CHECK(back.sample_rate == 16000);
  REQUIRE(back.samples.size() == w.samples.size());
  for (std::size_t i = 0; i < w.samples.size(); ++i) {
    CHECK(std::fabs(back.samples[i] - w.samples[i]) < 1.0 / 32767.0);
  }
}

TEST_CASE("wav: rejects non-wav and unsupported formats") {
  const auto dir = temp_dir();
  const auto text_file = dir / "not_a.wav";
  std::ofstream(text_file) << "hello";
  CHECK_THROWS_WITH(casanet::read_wav(text_file), doctest::Contains("not a RIFF/WAVE"));
  CHECK_THROWS(casanet::read_wav(dir / "missing.wav"));
}
