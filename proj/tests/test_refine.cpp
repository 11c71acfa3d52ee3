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

#include "casanet/refine.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"

#include "casanet/corpus.hpp"
#include "casanet/pipeline.hpp"
#include "casanet/rng.hpp"
#include "casanet/rttm.hpp"
#include "casanet/scoring.hpp"
#include "casanet/synthdata.hpp"

namespace fs = std::filesystem;
using namespace casanet;

namespace {

SynthConfig refine_synth_config() {
  SynthConfig cfg;
  cfg.sessions = 3;
  cfg.session_seconds = 16.0;
  cfg.speakers = 2;
  cfg.f_lip = 8;
  cfg.d_i = 8;
  cfg.seed = 33;
  return cfg;
}

CasaConfig refine_casa_config() {
  CasaConfig cfg;
  cfg.d_a = 8;
  cfg.d_v = 8;
  cfg.d_i = 8;
  cfg.d_model = 8;
  cfg.heads = 2;
  cfg.frames = 200;
  cfg.n_max = 2;
  cfg.f_lip = 8;
  cfg.audio_features = kSynthAudioBins;
  cfg.visual_hidden = 8;
  cfg.audio_hidden = 8;
  cfg.decoder_hidden = 8;
  return cfg;
}

// Corpus, synthetic truth and a trained system shared by the tests.
struct Fixture {
  SynthCorpus synth;
  StoredCorpus full;
  StoredCorpus train;
  StoredCorpus dev;
  TrainedSystem system;
};

const Fixture& fixture() {
  static const Fixture f = [] {
    const fs::path dir =
        fs::temp_directory_path() / "casanet_refine_tests" / "corpus";
    fs::remove_all(dir);
    SynthCorpus synth = generate(refine_synth_config());
    save_corpus(dir, synth);
    StoredCorpus full = load_corpus(dir);
    auto [train, dev] = train_dev_split(full, 2.0 / 3.0);
    TrainSettings ts;
    ts.vvad_epochs = 25;
    ts.vvad_learning_rate = 0.01;
    ts.casa_epochs = 12;
    ts.casa_learning_rate = 0.02;
    ts.seed = 5;
    TrainedSystem system =
        train_pipeline(train, dev, refine_casa_config(), ts);
    return Fixture{std::move(synth), std::move(full), std::move(train),
                   std::move(dev), std::move(system)};
  }();
  return f;
}

fs::path temp_dir(const std::string& leaf) {
  fs::path dir = fs::temp_directory_path() / "casanet_refine_tests" / leaf;
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

double cosine(const Tensor& a, std::size_t row_a, const Tensor& b,
              std::size_t row_b) {
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t d = 0; d < a.dim(1); ++d) {
    dot += a.at(row_a, d) * b.at(row_b, d);
    na += a.at(row_a, d) * a.at(row_a, d);
    nb += b.at(row_b, d) * b.at(row_b, d);
  }
  return dot / std::sqrt(na * nb);
}

RefineSettings refine_settings() {
  RefineSettings rs;
  rs.rounds = 2;
  rs.epochs_per_round = 2;
  rs.learning_rate = 0.001;
  rs.seed = 17;
  return rs;
}

std::vector<Timeline> corrupt_logs(const StoredCorpus& corpus,
                                   double fraction, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<Timeline> logs;
  for (const StoredSession& s : corpus.sessions) {
    logs.push_back(corrupt_log(s.reference, fraction, rng, s.frame_rate));
  }
  return logs;
}

std::string read_text(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  REQUIRE(in.good());
  return std::string((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
}

}  // namespace

TEST_CASE("embeddings extracted under the reference point at the centroids") {
  const Fixture& f = fixture();
  for (std::size_t i = 0; i < f.full.sessions.size(); ++i) {
    const StoredSession& s = f.full.sessions[i];
    const ExtractedEmbeddings got =
        extract_speaker_embeddings(s, s.reference);
    REQUIRE(got.set.vectors.shape() == std::vector<std::size_t>{2, 8});
    const Tensor& truth = f.synth.sessions[i].centroids;
    for (std::size_t n = 0; n < 2; ++n) {
      CHECK(!got.fallback[n]);
      CHECK(cosine(got.set.vectors, n, truth, n) > 0.99);
      double norm = 0.0;
      for (std::size_t d = 0; d < 8; ++d) {
        norm += got.set.vectors.at(n, d) * got.set.vectors.at(n, d);
      }
      CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
}

TEST_CASE("a speaker the log never isolates falls back to the global mean") {
  const Fixture& f = fixture();
  const StoredSession& s = f.full.sessions[0];
  Timeline log = s.reference;
  std::erase_if(log.segments,
                [](const Segment& seg) { return seg.speaker == "spk1"; });

  const ExtractedEmbeddings got = extract_speaker_embeddings(s, log);
  CHECK(!got.fallback[0]);
  CHECK(got.fallback[1]);
  double norm = 0.0;
  for (std::size_t d = 0; d < 8; ++d) {
    norm += got.set.vectors.at(1, d) * got.set.vectors.at(1, d);
  }
  CHECK(std::sqrt(norm) == doctest::Approx(1.0).epsilon(1e-9));

  Timeline empty;
  empty.file_id = s.file_id;
  const ExtractedEmbeddings none = extract_speaker_embeddings(s, empty);
  CHECK(none.fallback[0]);
  CHECK(none.fallback[1]);
}

TEST_CASE("log corruption degrades the extracted embeddings") {
  const Fixture& f = fixture();
  double clean_sum = 0.0;
  double corrupt_sum = 0.0;
  Rng rng(7);
  for (std::size_t i = 0; i < f.full.sessions.size(); ++i) {
    const StoredSession& s = f.full.sessions[i];
    const Tensor& truth = f.synth.sessions[i].centroids;
    const ExtractedEmbeddings clean =
        extract_speaker_embeddings(s, s.reference);
    const Timeline bad = corrupt_log(s.reference, 0.3, rng, s.frame_rate);
    const ExtractedEmbeddings corrupted = extract_speaker_embeddings(s, bad);
    for (std::size_t n = 0; n < 2; ++n) {
      clean_sum += cosine(clean.set.vectors, n, truth, n);
      corrupt_sum += cosine(corrupted.set.vectors, n, truth, n);
    }
  }
  CHECK(corrupt_sum < clean_sum);
}

TEST_CASE("extraction rejects logs naming unknown speakers") {
  const StoredSession& s = fixture().full.sessions[0];
  Timeline log = s.reference;
  log.segments.push_back(Segment{"ghost", 0.0, 1.0});
  CHECK_THROWS_AS(extract_speaker_embeddings(s, log), std::runtime_error);
}

TEST_CASE("zero refinement rounds leave the model and log untouched") {
  const Fixture& f = fixture();
  const fs::path out = temp_dir("zero_rounds");
  CasaModel model = f.system.model;
  const std::vector<Timeline> train_log = corrupt_logs(f.train, 0.2, 1);
  const std::vector<Timeline> dev_log = corrupt_logs(f.dev, 0.2, 2);

  RefineSettings rs = refine_settings();
  rs.rounds = 0;
  const RefineResult result =
      refine_loop(model, f.train, f.dev, train_log, dev_log, rs, out);

  CasaModel original = f.system.model;
  auto params_a = model.parameters();
  auto params_b = original.parameters();
  for (std::size_t i = 0; i < params_a.size(); ++i) {
    CHECK(params_a[i]->value == params_b[i]->value);
  }
  REQUIRE(result.history.size() == 1);
  CHECK(result.history[0].round == 0);
  CHECK(result.history[0].losses.empty());
  CHECK(result.train_log == train_log);
  CHECK(result.dev_log == dev_log);
  CHECK(fs::exists(out / "round_0.rttm"));
  CHECK(fs::exists(out / "refine_history.json"));
  CHECK(!fs::exists(out / "round_1.rttm"));

  // Round 0 scores the corrupted log as-is.
  DerReport direct;
  for (std::size_t i = 0; i < f.dev.sessions.size(); ++i) {
    direct = merge_reports(direct,
                           der(f.dev.sessions[i].reference, dev_log[i]));
  }
  CHECK(result.history[0].dev.der() == direct.der());
}

TEST_CASE("refinement from a corrupted log recovers within two rounds") {
  const Fixture& f = fixture();
  const fs::path out = temp_dir("recovery");
  CasaModel model = f.system.model;
  const std::vector<Timeline> train_log = corrupt_logs(f.train, 0.2, 1);
  const std::vector<Timeline> dev_log = corrupt_logs(f.dev, 0.2, 2);

  const RefineResult result = refine_loop(model, f.train, f.dev, train_log,
                                          dev_log, refine_settings(), out);
  REQUIRE(result.history.size() == 3);
  const double round0 = result.history[0].dev.der();
  const double round1 = result.history[1].dev.der();
  const double round2 = result.history[2].dev.der();
  CAPTURE(round0);
  CAPTURE(round1);
  CAPTURE(round2);
  CHECK(round0 > 0.1);  // the corruption is visible at round 0
  CHECK(round1 < round0);
  CHECK(round2 <= round1 + 0.01);
  CHECK(result.history[1].losses.size() == 2);

  for (int k = 0; k <= 2; ++k) {
    CHECK(fs::exists(out / ("round_" + std::to_string(k) + ".rttm")));
  }
  const std::string history = read_text(out / "refine_history.json");
  CHECK(history.find("\"round\": 0") != std::string::npos);
  CHECK(history.find("\"round\": 2") != std::string::npos);
  CHECK(history.find("\"der\"") != std::string::npos);

  // The emitted logs re-score to exactly the recorded history.
  const auto parsed = parse_rttm(read_text(out / "round_2.rttm"));
  DerReport rescored;
  for (const StoredSession& s : f.dev.sessions) {
    rescored =
        merge_reports(rescored, der(s.reference, parsed.at(s.file_id)));
  }
  CHECK(rescored.der() == doctest::Approx(round2).epsilon(1e-12));
}

TEST_CASE("refinement is deterministic and job-count independent") {
  const Fixture& f = fixture();
  const std::vector<Timeline> train_log = corrupt_logs(f.train, 0.2, 1);
  const std::vector<Timeline> dev_log = corrupt_logs(f.dev, 0.2, 2);

  const fs::path out_a = temp_dir("det_a");
  CasaModel model_a = f.system.model;
  const RefineResult a = refine_loop(model_a, f.train, f.dev, train_log,
                                     dev_log, refine_settings(), out_a);

  const fs::path out_b = temp_dir("det_b");
  CasaModel model_b = f.system.model;
  RefineSettings rs = refine_settings();
  rs.jobs = 3;
  const RefineResult b = refine_loop(model_b, f.train, f.dev, train_log,
                                     dev_log, rs, out_b);

  REQUIRE(a.history.size() == b.history.size());
  for (std::size_t k = 0; k < a.history.size(); ++k) {
    CHECK(a.history[k].dev.der() == b.history[k].dev.der());
    CHECK(a.history[k].losses == b.history[k].losses);
  }
  CHECK(a.train_log == b.train_log);
  CHECK(a.dev_log == b.dev_log);
  for (int k = 0; k <= 2; ++k) {
    const std::string name = "round_" + std::to_string(k) + ".rttm";
    CHECK(read_text(out_a / name) == read_text(out_b / name));
  }
  CHECK(read_text(out_a / "refine_history.json") ==
        read_text(out_b / "refine_history.json"));
}

TEST_CASE("refine_loop validates the log alignment") {
  const Fixture& f = fixture();
  CasaModel model = f.system.model;
  const std::vector<Timeline> dev_log = corrupt_logs(f.dev, 0.2, 2);
  CHECK_THROWS_WITH_AS(
      refine_loop(model, f.train, f.dev, {}, dev_log, refine_settings(),
                  temp_dir("bad_align")),
      "refine: one initial log per session required", std::invalid_argument);
}
