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

// Micro-benchmarks for the hot paths: dense algebra, attention,
// the acoustic front end, post-processing, and the scorer. Build with
// -DCASANET_BUILD_BENCHMARKS=ON; the suite is not part of the test run.

#include <benchmark/benchmark.h>

#include <complex>
#include <vector>

#include "casanet/casa.hpp"
#include "casanet/features.hpp"
#include "casanet/layers.hpp"
#include "casanet/postproc.hpp"
#include "casanet/rng.hpp"
#include "casanet/scoring.hpp"
#include "casanet/tensor.hpp"
#include "casanet/timeline.hpp"
#include "casanet/wave.hpp"

namespace {

using namespace casanet;

Tensor random_matrix(std::size_t rows, std::size_t cols, Rng& rng) {
  Tensor m({rows, cols});
  for (double& x : m.values()) x = rng.gaussian();
  return m;
}

void bm_matmul(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(1);
  const Tensor a = random_matrix(n, n, rng);
  const Tensor b = random_matrix(n, n, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(matmul(a, b));
  }
  state.SetItemsProcessed(static_cast<int64_t>(state.iterations()) * n * n * n);
}
BENCHMARK(bm_matmul)->Arg(64)->Arg(128)->Arg(256);

void bm_attention_forward(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  Rng rng(2);
  MultiHeadAttention attn("bench", 64, 64, 64, 4, 64, rng);
  const Tensor x = random_matrix(frames, 64, rng);
  for (auto _ : state) {
    benchmark::DoNotOptimize(attn.forward(x, x));
  }
}
BENCHMARK(bm_attention_forward)->Arg(50)->Arg(200)->Arg(800);

void bm_attention_backward(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  Rng rng(3);
  MultiHeadAttention attn("bench", 64, 64, 64, 4, 64, rng);
  const Tensor x = random_matrix(frames, 64, rng);
  const Tensor grad = random_matrix(frames, 64, rng);
  for (auto _ : state) {
    MultiHeadAttention::Cache cache;
    benchmark::DoNotOptimize(attn.forward(x, x, &cache));
    benchmark::DoNotOptimize(attn.backward(x, x, cache, grad));
  }
}
BENCHMARK(bm_attention_backward)->Arg(50)->Arg(200);

void bm_fft(benchmark::State& state) {
  Rng rng(4);
  std::vector<std::complex<double>> base(512);
  for (auto& c : base) c = {rng.gaussian(), 0.0};
  for (auto _ : state) {
    auto x = base;
    fft_radix2(x);
    benchmark::DoNotOptimize(x);
  }
}
BENCHMARK(bm_fft);

void bm_fbank_8s_block(benchmark::State& state) {
  Rng rng(5);
  Waveform w;
  w.samples.resize(16000 * 8);
  for (double& s : w.samples) s = 0.1 * rng.gaussian();
  for (auto _ : state) {
    benchmark::DoNotOptimize(fbank(w));
  }
}
BENCHMARK(bm_fbank_8s_block);

void bm_median_filter(benchmark::State& state) {
  const auto frames = static_cast<std::size_t>(state.range(0));
  Rng rng(6);
  Tensor probs({frames, 3});
  for (double& x : probs.values()) x = rng.uniform();
  for (auto _ : state) {
    benchmark::DoNotOptimize(median_filter_columns(probs, 11));
  }
}
BENCHMARK(bm_median_filter)->Arg(1500)->Arg(15000);

void bm_der_scoring(benchmark::State& state) {
  Rng rng(7);
  Timeline ref{"f", {}};
  Timeline hyp{"f", {}};
  for (std::size_t i = 0; i < 200; ++i) {
    ref.segments.push_back({"spk" + std::to_string(rng.uniform_index(4)),
                            rng.uniform() * 590.0, 0.5 + rng.uniform() * 9.0});
    hyp.segments.push_back({"h" + std::to_string(rng.uniform_index(4)),
                            rng.uniform() * 590.0, 0.5 + rng.uniform() * 9.0});
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(der(ref, hyp));
  }
}
BENCHMARK(bm_der_scoring);

void bm_casa_forward_block(benchmark::State& state) {
  CasaConfig cfg;  // production geometry: one 8 s block, three channels
  cfg.frames = 200;
  cfg.n_max = 3;
  Rng rng(8);
  CasaModel model(cfg, FusionMode::casa, rng);
  CasaInputs inputs;
  inputs.visual.features = Tensor({200, 3, cfg.f_lip});
  for (double& x : inputs.visual.features.values()) x = rng.gaussian();
  inputs.audio_features = Tensor({200, cfg.audio_features});
  for (double& x : inputs.audio_features.values()) x = rng.gaussian();
  Tensor ids({3, cfg.d_i});
  for (double& x : ids.values()) x = rng.gaussian();
  inputs.speakers.vectors = normalize_rows(ids);
  model.audio.fit_normalizer({inputs.audio_features});
  for (auto _ : state) {
    benchmark::DoNotOptimize(casa_forward(model, inputs));
  }
}
BENCHMARK(bm_casa_forward_block);

}  // namespace

BENCHMARK_MAIN();
