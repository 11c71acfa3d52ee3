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

#include "casanet/corpus.hpp"

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "json.hpp"

#include "casanet/faeb.hpp"
#include "casanet/postproc.hpp"
#include "casanet/rttm.hpp"

namespace casanet {
namespace {

// Key order in corpus.json is fixed so identical corpora serialize to
// identical bytes.
using Json = nlohmann::ordered_json;

constexpr int kManifestVersion = 1;

std::filesystem::path block_path(const std::filesystem::path& dir,
                                 const std::string& file_id,
                                 const char* stream) {
  return dir / (file_id + "." + stream + ".faeb");
}

[[noreturn]] void fail(const std::filesystem::path& file,
                       const std::string& reason) {
  throw std::runtime_error("corpus: " + file.string() + ": " + reason);
}

Json config_to_json(const SynthConfig& cfg) {
  Json j;
  j["sessions"] = cfg.sessions;
  j["session_seconds"] = cfg.session_seconds;
  j["speakers"] = cfg.speakers;
  j["frame_rate"] = cfg.frame_rate;
  j["p_stay_speaking"] = cfg.p_stay_speaking;
  j["p_stay_silent"] = cfg.p_stay_silent;
  j["visual_snr_db"] = cfg.visual_snr_db;
  j["audio_snr_db"] = cfg.audio_snr_db;
  j["f_lip"] = cfg.f_lip;
  j["d_i"] = cfg.d_i;
  j["seed"] = cfg.seed;
  return j;
}

SynthConfig config_from_json(const std::filesystem::path& file,
                             const Json& j) {
  SynthConfig cfg;
  try {
    cfg.sessions = j.at("sessions").get<std::size_t>();
    cfg.session_seconds = j.at("session_seconds").get<double>();
    cfg.speakers = j.at("speakers").get<std::size_t>();
    cfg.frame_rate = j.at("frame_rate").get<double>();
    cfg.p_stay_speaking = j.at("p_stay_speaking").get<double>();
    cfg.p_stay_silent = j.at("p_stay_silent").get<double>();
    cfg.visual_snr_db = j.at("visual_snr_db").get<double>();
    cfg.audio_snr_db = j.at("audio_snr_db").get<double>();
    cfg.f_lip = j.at("f_lip").get<std::size_t>();
    cfg.d_i = j.at("d_i").get<std::size_t>();
    cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const Json::exception& e) {
    fail(file, std::string("bad generator config: ") + e.what());
  }
  return cfg;
}

Tensor as_rank3(const Tensor& m) {
  return Tensor({m.dim(0), std::size_t{1}, m.dim(1)}, m.values());
}

Tensor as_rank2(const Tensor& block) {
  return Tensor({block.dim(0), block.dim(2)}, block.values());
}

void write_text_file(const std::filesystem::path& path,
                     const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out << text;
  if (!out) fail(path, "write failed");
}

}  // namespace

void save_corpus(const std::filesystem::path& dir,
                 const SynthCorpus& corpus) {
  std::filesystem::create_directories(dir);

  Json manifest;
  manifest["format_version"] = kManifestVersion;
  manifest["config"] = config_to_json(corpus.config);
  Json session_list = Json::array();
  std::vector<Timeline> references;
  references.reserve(corpus.sessions.size());
  for (const SynthSession& s : corpus.sessions) {
    Json entry;
    entry["file_id"] = s.file_id;
    entry["speakers"] = s.speakers;
    session_list.push_back(std::move(entry));
    references.push_back(s.reference);
  }
  manifest["sessions"] = std::move(session_list);
  write_text_file(dir / "corpus.json", manifest.dump(2) + "\n");
  write_rttm_file(dir / "ref.rttm", references);

  const double rate = corpus.config.frame_rate;
  for (const SynthSession& s : corpus.sessions) {
    write_faeb(block_path(dir, s.file_id, "visual"),
               FaebBlock{s.visual, rate});
    write_faeb(block_path(dir, s.file_id, "audio"),
               FaebBlock{as_rank3(s.audio), rate * kSynthAudioRate});
    write_faeb(block_path(dir, s.file_id, "identity"),
               FaebBlock{as_rank3(s.identity), rate});
  }
}

StoredCorpus load_corpus(const std::filesystem::path& dir) {
  const std::filesystem::path manifest_path = dir / "corpus.json";
  std::ifstream in(manifest_path, std::ios::binary);
  if (!in) fail(manifest_path, "cannot open");
  std::stringstream buffer;
  buffer << in.rdbuf();

  Json manifest;
  try {
    manifest = Json::parse(buffer.str());
  } catch (const Json::exception& e) {
    fail(manifest_path, std::string("invalid JSON: ") + e.what());
  }
  if (!manifest.is_object() || !manifest.contains("format_version") ||
      !manifest["format_version"].is_number_integer()) {
    fail(manifest_path, "missing format_version");
  }
  const int version = manifest["format_version"].get<int>();
  if (version != kManifestVersion) {
    fail(manifest_path,
         "unsupported manifest version " + std::to_string(version));
  }
  if (!manifest.contains("config") || !manifest.contains("sessions") ||
      !manifest["sessions"].is_array()) {
    fail(manifest_path, "missing config or session list");
  }

  StoredCorpus corpus;
  corpus.config = config_from_json(manifest_path, manifest["config"]);

  const std::filesystem::path ref_path = dir / "ref.rttm";
  std::ifstream ref_in(ref_path, std::ios::binary);
  if (!ref_in) fail(ref_path, "cannot open");
  std::stringstream ref_buffer;
  ref_buffer << ref_in.rdbuf();
  std::map<std::string, Timeline> references;
  try {
    references = parse_rttm(ref_buffer.str());
  } catch (const std::exception& e) {
    fail(ref_path, e.what());
  }

  for (const Json& entry : manifest["sessions"]) {
    if (!entry.is_object() || !entry.contains("file_id") ||
        !entry.contains("speakers")) {
      fail(manifest_path, "malformed session entry");
    }
    StoredSession s;
    try {
      s.file_id = entry.at("file_id").get<std::string>();
      s.speakers = entry.at("speakers").get<std::vector<std::string>>();
    } catch (const Json::exception& e) {
      fail(manifest_path, std::string("malformed session entry: ") + e.what());
    }

    const std::filesystem::path visual_path =
        block_path(dir, s.file_id, "visual");
    const FaebBlock visual = read_faeb(visual_path);
    if (visual.data.dim(1) != s.speakers.size()) {
      fail(visual_path,
           "block has " + std::to_string(visual.data.dim(1)) +
               " speaker channels, manifest lists " +
               std::to_string(s.speakers.size()));
    }
    if (visual.data.dim(2) != corpus.config.f_lip) {
      fail(visual_path, "lip feature width " +
                            std::to_string(visual.data.dim(2)) +
                            " does not match config f_lip " +
                            std::to_string(corpus.config.f_lip));
    }
    s.visual = visual.data;
    s.frame_rate = visual.frame_rate;
    const std::size_t frames = s.visual.dim(0);

    const std::filesystem::path audio_path =
        block_path(dir, s.file_id, "audio");
    const FaebBlock audio = read_faeb(audio_path);
    if (audio.data.dim(1) != 1 || audio.data.dim(2) != kSynthAudioBins) {
      fail(audio_path, "expected a [T x 1 x " +
                           std::to_string(kSynthAudioBins) +
                           "] block, got " + audio.data.shape_str());
    }
    if (audio.data.dim(0) != frames * kSynthAudioRate) {
      fail(audio_path,
           "audio frame count " + std::to_string(audio.data.dim(0)) +
               " is not " + std::to_string(kSynthAudioRate) +
               "x the visual frame count " + std::to_string(frames));
    }
    s.audio = as_rank2(audio.data);

    const std::filesystem::path identity_path =
        block_path(dir, s.file_id, "identity");
    const FaebBlock identity = read_faeb(identity_path);
    if (identity.data.dim(0) != frames || identity.data.dim(1) != 1 ||
        identity.data.dim(2) != corpus.config.d_i) {
      fail(identity_path, "expected a [" + std::to_string(frames) + " x 1 x " +
                              std::to_string(corpus.config.d_i) +
                              "] block, got " + identity.data.shape_str());
    }
    s.identity = as_rank2(identity.data);

    // A session whose reference is empty has no RTTM lines at all.
    auto it = references.find(s.file_id);
    if (it != references.end()) {
      s.reference = it->second;
    } else {
      s.reference.file_id = s.file_id;
    }
    s.labels =
        timeline_to_labels(s.reference, s.frame_rate, frames, s.speakers);
    corpus.sessions.push_back(std::move(s));
  }
  return corpus;
}

std::pair<StoredCorpus, StoredCorpus> train_dev_split(
    const StoredCorpus& corpus, double ratio) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("train_dev_split: ratio must lie in [0, 1]");
  }
  const std::size_t total = corpus.sessions.size();
  std::size_t n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(total)));
  if (n_train > total) n_train = total;

  StoredCorpus train;
  StoredCorpus dev;
  train.config = corpus.config;
  dev.config = corpus.config;
  train.sessions.assign(corpus.sessions.begin(),
                        corpus.sessions.begin() + n_train);
  dev.sessions.assign(corpus.sessions.begin() + n_train,
                      corpus.sessions.end());
  train.config.sessions = train.sessions.size();
  dev.config.sessions = dev.sessions.size();
  return {std::move(train), std::move(dev)};
}

}  // namespace casanet
