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

#include "casanet/runconfig.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include "json.hpp"

namespace casanet {
namespace {

using Json = nlohmann::json;

[[noreturn]] void fail(const std::string& message) {
  throw std::invalid_argument("config: " + message);
}

std::string qualified(const char* section, const std::string& key) {
  return section[0] == '\0' ? key : std::string(section) + "." + key;
}

void check_keys(const Json& obj, const char* section,
                std::initializer_list<const char*> allowed) {
  if (!obj.is_object()) {
    fail(std::string(section[0] == '\0' ? "document" : section) +
         " must be a JSON object");
  }
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* name : allowed) {
      if (item.key() == name) {
        known = true;
        break;
      }
    }
    if (!known) {
      fail("unknown key '" + qualified(section, item.key()) + "'");
    }
  }
}

template <typename T>
void read(const Json& obj, const char* section, const char* key, T& out) {
  const auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const Json::exception&) {
    fail("'" + qualified(section, key) + "' has the wrong type");
  }
}

void parse_synth(const Json& obj, SynthConfig& synth) {
  check_keys(obj, "synth",
             {"sessions", "session_seconds", "speakers", "frame_rate",
              "p_stay_speaking", "p_stay_silent", "visual_snr_db",
              "audio_snr_db", "f_lip", "d_i", "seed"});
  read(obj, "synth", "sessions", synth.sessions);
  read(obj, "synth", "session_seconds", synth.session_seconds);
  read(obj, "synth", "speakers", synth.speakers);
  read(obj, "synth", "frame_rate", synth.frame_rate);
  read(obj, "synth", "p_stay_speaking", synth.p_stay_speaking);
  read(obj, "synth", "p_stay_silent", synth.p_stay_silent);
  read(obj, "synth", "visual_snr_db", synth.visual_snr_db);
  read(obj, "synth", "audio_snr_db", synth.audio_snr_db);
  read(obj, "synth", "f_lip", synth.f_lip);
  read(obj, "synth", "d_i", synth.d_i);
  read(obj, "synth", "seed", synth.seed);
}

void parse_model(const Json& obj, RunConfig& cfg) {
  check_keys(obj, "model",
             {"d_a", "d_v", "d_model", "heads", "n_max", "visual_hidden",
              "audio_hidden", "decoder_hidden"});
  read(obj, "model", "d_a", cfg.model.d_a);
  read(obj, "model", "d_v", cfg.model.d_v);
  read(obj, "model", "d_model", cfg.model.d_model);
  read(obj, "model", "heads", cfg.model.heads);
  read(obj, "model", "visual_hidden", cfg.model.visual_hidden);
  read(obj, "model", "audio_hidden", cfg.model.audio_hidden);
  read(obj, "model", "decoder_hidden", cfg.model.decoder_hidden);
  if (obj.contains("n_max")) {
    read(obj, "model", "n_max", cfg.model.n_max);
    cfg.n_max_overridden = true;
  }
}

void parse_train(const Json& obj, TrainSettings& train) {
  check_keys(obj, "train",
             {"vvad_epochs", "vvad_learning_rate", "casa_epochs",
              "casa_learning_rate", "mixup", "mixup_alpha", "fusion"});
  read(obj, "train", "vvad_epochs", train.vvad_epochs);
  read(obj, "train", "vvad_learning_rate", train.vvad_learning_rate);
  read(obj, "train", "casa_epochs", train.casa_epochs);
  read(obj, "train", "casa_learning_rate", train.casa_learning_rate);
  read(obj, "train", "mixup", train.mixup.enabled);
  read(obj, "train", "mixup_alpha", train.mixup.alpha);
  if (obj.contains("fusion")) {
    std::string fusion;
    read(obj, "train", "fusion", fusion);
    if (fusion == "casa") {
      train.fusion = FusionMode::casa;
    } else if (fusion == "concat") {
      train.fusion = FusionMode::concat_baseline;
    } else {
      fail("'train.fusion' must be \"casa\" or \"concat\", got \"" + fusion +
           "\"");
    }
  }
}

void parse_refine(const Json& obj, RefineSettings& refine) {
  check_keys(obj, "refine", {"rounds", "epochs_per_round", "learning_rate"});
  read(obj, "refine", "rounds", refine.rounds);
  read(obj, "refine", "epochs_per_round", refine.epochs_per_round);
  read(obj, "refine", "learning_rate", refine.learning_rate);
}

void parse_blocks(const Json& obj, BlockSettings& blocks) {
  check_keys(obj, "blocks", {"block_seconds", "stride_seconds"});
  read(obj, "blocks", "block_seconds", blocks.block_seconds);
  read(obj, "blocks", "stride_seconds", blocks.stride_seconds);
}

void parse_postproc(const Json& obj, PostprocSettings& postproc) {
  check_keys(obj, "postproc", {"median_window", "threshold"});
  read(obj, "postproc", "median_window", postproc.median_window);
  read(obj, "postproc", "threshold", postproc.threshold);
}

void derive_and_validate(RunConfig& cfg) {
  adapt_model_to_corpus(cfg, cfg.synth);

  cfg.synth.validate();
  cfg.model.validate();
  if (!(cfg.split_ratio >= 0.0 && cfg.split_ratio <= 1.0)) {
    fail("'split_ratio' must lie in [0, 1]");
  }
  if (cfg.train.blocks.block_seconds <= 0.0 ||
      cfg.train.blocks.stride_seconds <= 0.0) {
    fail("'blocks' durations must be positive");
  }
  if (cfg.train.postproc.median_window % 2 == 0) {
    fail("'postproc.median_window' must be odd");
  }
  if (!(cfg.train.postproc.threshold > 0.0 &&
        cfg.train.postproc.threshold < 1.0)) {
    fail("'postproc.threshold' must lie strictly between 0 and 1");
  }
  if (cfg.train.vvad_learning_rate <= 0.0 ||
      cfg.train.casa_learning_rate <= 0.0 ||
      cfg.refine.learning_rate <= 0.0) {
    fail("learning rates must be positive");
  }
  if (cfg.train.mixup.alpha <= 0.0) {
    fail("'train.mixup_alpha' must be positive");
  }
}

}  // namespace

RunConfig default_run_config() {
  RunConfig cfg;

  cfg.model.d_a = 32;
  cfg.model.d_v = 32;
  cfg.model.d_model = 32;
  cfg.model.heads = 2;
  cfg.model.visual_hidden = 32;
  cfg.model.audio_hidden = 32;
  cfg.model.decoder_hidden = 32;

  cfg.train.vvad_epochs = 30;
  cfg.train.vvad_learning_rate = 1e-3;
  cfg.train.casa_epochs = 8;
  cfg.train.casa_learning_rate = 2e-3;

  cfg.refine.rounds = 2;
  cfg.refine.epochs_per_round = 2;
  cfg.refine.learning_rate = 1e-3;

  derive_and_validate(cfg);
  return cfg;
}

RunConfig parse_run_config(const std::string& json_text) {
  Json doc;
  try {
    doc = Json::parse(json_text);
  } catch (const Json::exception& e) {
    fail(std::string("invalid JSON: ") + e.what());
  }

  RunConfig cfg = default_run_config();
  check_keys(doc, "",
             {"seed", "split_ratio", "synth", "model", "train", "refine",
              "blocks", "postproc"});
  read(doc, "", "seed", cfg.seed);
  read(doc, "", "split_ratio", cfg.split_ratio);
  if (doc.contains("synth")) parse_synth(doc["synth"], cfg.synth);
  if (doc.contains("model")) parse_model(doc["model"], cfg);
  if (doc.contains("train")) parse_train(doc["train"], cfg.train);
  if (doc.contains("refine")) parse_refine(doc["refine"], cfg.refine);
  BlockSettings blocks;
  PostprocSettings postproc;
  if (doc.contains("blocks")) parse_blocks(doc["blocks"], blocks);
  if (doc.contains("postproc")) parse_postproc(doc["postproc"], postproc);

  // One shared frame grid, smoothing rule and seed stream everywhere.
  cfg.train.blocks = blocks;
  cfg.train.postproc = postproc;
  cfg.refine.blocks = blocks;
  cfg.refine.postproc = postproc;
  cfg.refine.mixup = cfg.train.mixup;
  if (!doc.contains("synth") || !doc["synth"].contains("seed")) {
    cfg.synth.seed = cfg.seed;
  }
  cfg.train.seed = cfg.seed;
  cfg.refine.seed = cfg.seed;

  derive_and_validate(cfg);
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_run_config(buffer.str());
}

void adapt_model_to_corpus(RunConfig& config, const SynthConfig& corpus) {
  config.model.f_lip = corpus.f_lip;
  config.model.d_i = corpus.d_i;
  config.model.audio_features = kSynthAudioBins;
  config.model.frames = static_cast<std::size_t>(std::llround(
      config.train.blocks.block_seconds * corpus.frame_rate));
  if (!config.n_max_overridden) {
    config.model.n_max = corpus.speakers;
  }
}

}  // namespace casanet
