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

// One JSON document configures a whole run: corpus generation, model
// dimensions, both training stages, refinement and post-processing.
// Every key is optional; unknown keys are rejected by name. Model
// geometry that must match the corpus (lip width, identity width, the
// block frame grid, audio bins) is derived, not spelled out.

#ifndef CASANET_RUNCONFIG_HPP_
#define CASANET_RUNCONFIG_HPP_

#include <cstdint>
#include <filesystem>
#include <string>

#include "casanet/casa.hpp"
#include "casanet/pipeline.hpp"
#include "casanet/refine.hpp"
#include "casanet/synthdata.hpp"

namespace casanet {

struct RunConfig {
  SynthConfig synth;
  CasaConfig model;
  TrainSettings train;
  RefineSettings refine;
  double split_ratio = 0.8;
  std::uint64_t seed = 0;
  bool n_max_overridden = false;  // channel count pinned by the config
};

// The defaults used when no config file is given: the standard corpus
// (10 sessions of 60 s, three speakers) and a compact model sized so a
// full train/infer cycle stays well inside a desktop time budget.
RunConfig default_run_config();

// Parses a JSON document over the defaults. Throws std::invalid_argument
// naming the first unknown key ("config: unknown key 'train.foo'"), a
// value of the wrong type, or an out-of-range setting.
RunConfig parse_run_config(const std::string& json_text);

// parse_run_config over a file's contents; a missing file is an
// std::invalid_argument naming the path.
RunConfig load_run_config(const std::filesystem::path& path);

// Re-derives the geometry-coupled model fields from the generator
// settings a corpus was actually built with (its lip width, identity
// width, frame rate, and — unless the config pinned it — its speaker
// count).
void adapt_model_to_corpus(RunConfig& config, const SynthConfig& corpus);

}  // namespace casanet

#endif  // CASANET_RUNCONFIG_HPP_
