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

#include "casanet/casa.hpp"

#include <bit>
#include <cstdint>
#include <fstream>
#include <iterator>
#include <numeric>
#include <stdexcept>
#include <utility>

#include "casanet/loss.hpp"

namespace casanet {

void CasaConfig::validate() const {
  const struct {
    const char* name;
    std::size_t value;
  } dims[] = {
      {"d_a", d_a},
      {"d_v", d_v},
      {"d_i", d_i},
      {"d_model", d_model},
      {"heads", heads},
      {"frames", frames},
      {"n_max", n_max},
      {"f_lip", f_lip},
      {"audio_features", audio_features},
      {"visual_hidden", visual_hidden},
      {"audio_hidden", audio_hidden},
      {"decoder_hidden", decoder_hidden},
  };
  for (const auto& d : dims) {
    if (d.value == 0) {
      throw std::invalid_argument(std::string("config: ") + d.name +
                                  " must be positive");
    }
  }
  if (d_model % heads != 0) {
    throw std::invalid_argument(
        "config: d_model " + std::to_string(d_model) +
        " not divisible by heads " + std::to_string(heads));
  }
}

CasaModel::CasaModel(const CasaConfig& cfg, FusionMode fusion_mode, Rng& rng)
    : config((cfg.validate(), cfg)),
      mode(fusion_mode),
      visual(cfg.f_lip, cfg.visual_hidden, cfg.d_v, rng),
      vvad_head("vvad_head", cfg.d_v, 1, rng),
      audio(cfg.audio_features, cfg.audio_hidden, cfg.d_a, rng),
      ca_av("ca_av", cfg.d_v, cfg.d_a + cfg.d_i, cfg.d_model, cfg.heads,
            cfg.d_v, rng),
      ca_va("ca_va", cfg.d_a + cfg.d_i, cfg.d_v, cfg.d_model, cfg.heads,
            cfg.d_a + cfg.d_i, rng),
      sa("sa", cfg.fused_dim(), cfg.fused_dim(), cfg.d_model, cfg.heads,
         cfg.fused_dim(), rng),
      decoder("decoder", cfg.fused_dim(), cfg.decoder_hidden, 2, rng) {}

std::vector<Parameter*> CasaModel::parameters() {
  std::vector<Parameter*> out;
  visual.collect_parameters(out);
  vvad_head.collect_parameters(out);
  audio.collect_parameters(out);
  ca_av.collect_parameters(out);
  ca_va.collect_parameters(out);
  sa.collect_parameters(out);
  decoder.collect_parameters(out);
  return out;
}

std::vector<Parameter*> CasaModel::trainable_parameters() {
  std::vector<Parameter*> out;
  audio.collect_parameters(out);
  ca_av.collect_parameters(out);
  ca_va.collect_parameters(out);
  sa.collect_parameters(out);
  decoder.collect_parameters(out);
  return out;
}

void adopt_vvad(CasaModel& model, const VvadModel& vvad) {
  const Parameter* src[] = {
      &vvad.encoder.net.l1.weight, &vvad.encoder.net.l1.bias,
      &vvad.encoder.net.l2.weight, &vvad.encoder.net.l2.bias,
      &vvad.head.weight,           &vvad.head.bias,
  };
  Parameter* dst[] = {
      &model.visual.net.l1.weight, &model.visual.net.l1.bias,
      &model.visual.net.l2.weight, &model.visual.net.l2.bias,
      &model.vvad_head.weight,     &model.vvad_head.bias,
  };
  for (std::size_t i = 0; i < std::size(dst); ++i) {
    if (!dst[i]->value.same_shape(src[i]->value)) {
      throw std::invalid_argument("adopt_vvad: parameter '" + dst[i]->name +
                                  "' shape mismatch, " +
                                  dst[i]->value.shape_str() + " vs " +
                                  src[i]->value.shape_str());
    }
    dst[i]->value = src[i]->value;
  }
}

EmbeddingBlock build_audio_stream(const EmbeddingBlock& audio,
                                  const EmbeddingBlock& speaker) {
  if (audio.frames() != speaker.frames()) {
    throw std::invalid_argument("build_audio_stream: frame counts differ");
  }
  if (audio.speakers() != speaker.speakers()) {
    throw std::invalid_argument("build_audio_stream: speaker counts differ");
  }
  const std::size_t frames = audio.frames();
  const std::size_t speakers = audio.speakers();
  const std::size_t d_a = audio.feature_dim();
  const std::size_t d_i = speaker.feature_dim();
  EmbeddingBlock out;
  out.data = Tensor({frames, speakers, d_a + d_i});
  out.offset = audio.offset;
  out.kind = BlockKind::fused;
  for (std::size_t t = 0; t < frames; ++t) {
    for (std::size_t n = 0; n < speakers; ++n) {
      for (std::size_t d = 0; d < d_a; ++d) {
        out.data.at(t, n, d) = audio.data.at(t, n, d);
      }
      for (std::size_t d = 0; d < d_i; ++d) {
        out.data.at(t, n, d_a + d) = speaker.data.at(t, n, d);
      }
    }
  }
  return out;
}

EmbeddingBlock cross_attend(const EmbeddingBlock& query,
                            const EmbeddingBlock& kv,
                            const MultiHeadAttention& mha) {
  if (query.frames() != kv.frames() || query.speakers() != kv.speakers()) {
    throw std::invalid_argument(
        "cross_attend: query and key/value blocks disagree on frames or "
        "speakers");
  }
  const std::size_t speakers = query.speakers();
  EmbeddingBlock out;
  out.data = Tensor({query.frames(), speakers, mha.w_o.value.dim(1)});
  out.offset = query.offset;
  out.kind = BlockKind::fused;
  for (std::size_t n = 0; n < speakers; ++n) {
    const Tensor q_n = speaker_slice(query.data, n);
    const Tensor kv_n = speaker_slice(kv.data, n);
    set_speaker_slice(out.data, n, mha.forward(q_n, kv_n));
  }
  return out;
}

EmbeddingBlock self_attend(const EmbeddingBlock& f_av,
                           const EmbeddingBlock& f_va,
                           const MultiHeadAttention& mha) {
  if (f_av.frames() != f_va.frames() || f_av.speakers() != f_va.speakers()) {
    throw std::invalid_argument(
        "self_attend: stream blocks disagree on frames or speakers");
  }
  const std::size_t speakers = f_av.speakers();
  EmbeddingBlock out;
  out.data = Tensor({f_av.frames(), speakers,
                     f_av.feature_dim() + f_va.feature_dim()});
  out.offset = f_av.offset;
  out.kind = BlockKind::fused;
  for (std::size_t n = 0; n < speakers; ++n) {
    const Tensor cat = concat_cols(speaker_slice(f_av.data, n),
                                   speaker_slice(f_va.data, n));
    Tensor attended = mha.forward(cat, cat);
    add_in_place(attended, cat);  // residual connection
    set_speaker_slice(out.data, n, attended);
  }
  return out;
}

Tensor decode(const EmbeddingBlock& fused, const FeedForward& decoder) {
  if (fused.feature_dim() != decoder.l1.in_dim()) {
    throw std::invalid_argument(
        "decode: fused width " + std::to_string(fused.feature_dim()) +
        " does not match decoder input width " +
        std::to_string(decoder.l1.in_dim()));
  }
  const std::size_t frames = fused.frames();
  const std::size_t speakers = fused.speakers();
  Tensor probs({frames, speakers});
  for (std::size_t n = 0; n < speakers; ++n) {
    const Tensor logits =
        decoder.forward(speaker_slice(fused.data, n), nullptr);
    for (std::size_t t = 0; t < frames; ++t) {
      // Two-class softmax on (z0, z1) reduces to a logistic on z1 - z0.
      probs.at(t, n) = sigmoid(logits.at(t, 1) - logits.at(t, 0));
    }
  }
  return probs;
}

namespace {

void check_inputs(const CasaModel& model, const CasaInputs& inputs) {
  const CasaConfig& cfg = model.config;
  if (inputs.visual.feature_dim() != cfg.f_lip) {
    throw std::invalid_argument(
        "casa_forward: visual stream has " +
        std::to_string(inputs.visual.feature_dim()) +
        " lip features, config expects " + std::to_string(cfg.f_lip));
  }
  if (inputs.audio_features.rank() != 2 ||
      inputs.audio_features.dim(1) != cfg.audio_features) {
    throw std::invalid_argument(
        "casa_forward: audio features must be [T x " +
        std::to_string(cfg.audio_features) + "]");
  }
  if (inputs.audio_features.dim(0) != inputs.visual.frames()) {
    throw std::invalid_argument(
        "casa_forward: audio has " +
        std::to_string(inputs.audio_features.dim(0)) +
        " frames but the visual stream has " +
        std::to_string(inputs.visual.frames()));
  }
  if (inputs.speakers.speakers() != inputs.visual.speakers()) {
    throw std::invalid_argument(
        "casa_forward: speaker set has " +
        std::to_string(inputs.speakers.speakers()) +
        " identities but the visual stream has " +
        std::to_string(inputs.visual.speakers()) + " channels");
  }
  if (inputs.speakers.dim() != cfg.d_i) {
    throw std::invalid_argument(
        "casa_forward: speaker identities are " +
        std::to_string(inputs.speakers.dim()) + "-dimensional, config "
        "expects " + std::to_string(cfg.d_i));
  }
}

}  // namespace

Tensor casa_forward_logits(const CasaModel& model, const CasaInputs& inputs,
                           CasaForwardCache* cache) {
  check_inputs(model, inputs);
  const std::size_t frames = inputs.visual.frames();
  const std::size_t speakers = inputs.visual.speakers();

  CasaForwardCache local;
  CasaForwardCache& c = cache != nullptr ? *cache : local;
  c.frames = frames;
  c.speakers = speakers;
  c.per_speaker.assign(speakers, CasaSpeakerCache{});

  // Shared encoders.
  c.visual_rows = flatten_block(inputs.visual.features);
  const Tensor e_v_rows =
      model.visual.forward_rows(c.visual_rows, &c.visual_cache);
  EmbeddingBlock e_v;
  e_v.data = unflatten_block(e_v_rows, frames, speakers);
  e_v.kind = BlockKind::visual;

  const Tensor e_a =
      model.audio.forward(inputs.audio_features, &c.audio_cache);
  const EmbeddingBlock e_a_block = replicate_audio(e_a, speakers);
  const EmbeddingBlock identity_block =
      replicate_speaker(inputs.speakers, frames);

  Tensor logits({frames, speakers});
  if (model.mode == FusionMode::casa) {
    const EmbeddingBlock f_a_block =
        build_audio_stream(e_a_block, identity_block);
    for (std::size_t n = 0; n < speakers; ++n) {
      CasaSpeakerCache& sc = c.per_speaker[n];
      sc.f_v = speaker_slice(e_v.data, n);
      sc.f_a = speaker_slice(f_a_block.data, n);
      const Tensor f_av = model.ca_av.forward(sc.f_v, sc.f_a, &sc.ca_av);
      const Tensor f_va = model.ca_va.forward(sc.f_a, sc.f_v, &sc.ca_va);
      sc.cat = concat_cols(f_av, f_va);
      sc.fused_rows = model.sa.forward(sc.cat, sc.cat, &sc.sa);
      add_in_place(sc.fused_rows, sc.cat);
      const Tensor two = model.decoder.forward(sc.fused_rows, &sc.dec);
      for (std::size_t t = 0; t < frames; ++t) {
        logits.at(t, n) = two.at(t, 1) - two.at(t, 0);
      }
    }
  } else {
    for (std::size_t n = 0; n < speakers; ++n) {
      CasaSpeakerCache& sc = c.per_speaker[n];
      const Tensor audio_rows = speaker_slice(e_a_block.data, n);
      const Tensor visual_rows_n = speaker_slice(e_v.data, n);
      const Tensor id_rows = speaker_slice(identity_block.data, n);
      sc.fused_rows =
          concat_cols(concat_cols(audio_rows, visual_rows_n), id_rows);
      const Tensor two = model.decoder.forward(sc.fused_rows, &sc.dec);
      for (std::size_t t = 0; t < frames; ++t) {
        logits.at(t, n) = two.at(t, 1) - two.at(t, 0);
      }
    }
  }
  return logits;
}

Tensor casa_forward(const CasaModel& model, const CasaInputs& inputs) {
  Tensor s = casa_forward_logits(model, inputs);
  for (std::size_t i = 0; i < s.size(); ++i) s[i] = sigmoid(s[i]);
  return s;
}

void casa_backward(CasaModel& model, const CasaForwardCache& cache,
                   const Tensor& grad_logits) {
  const std::size_t frames = cache.frames;
  const std::size_t speakers = cache.speakers;
  if (grad_logits.rank() != 2 || grad_logits.dim(0) != frames ||
      grad_logits.dim(1) != speakers) {
    throw std::invalid_argument("casa_backward: gradient shape mismatch");
  }
  const CasaConfig& cfg = model.config;

  Tensor grad_e_v_rows({frames * speakers, cfg.d_v});
  Tensor grad_e_a({frames, cfg.d_a});

  for (std::size_t n = 0; n < speakers; ++n) {
    const CasaSpeakerCache& sc = cache.per_speaker[n];
    Tensor grad_two({frames, 2});
    for (std::size_t t = 0; t < frames; ++t) {
      grad_two.at(t, 0) = -grad_logits.at(t, n);
      grad_two.at(t, 1) = grad_logits.at(t, n);
    }
    // The decoder cache is mutable state owned by this call's caller;
    // FeedForward::backward only reads it.
    const Tensor grad_fused = model.decoder.backward(sc.dec, grad_two);

    if (model.mode == FusionMode::casa) {
      auto sa_grads = model.sa.backward(sc.cat, sc.cat, sc.sa, grad_fused);
      Tensor grad_cat = grad_fused;  // residual path
      add_in_place(grad_cat, sa_grads.first);
      add_in_place(grad_cat, sa_grads.second);

      const Tensor grad_f_av = slice_cols(grad_cat, 0, cfg.d_v);
      const Tensor grad_f_va =
          slice_cols(grad_cat, cfg.d_v, cfg.d_a + cfg.d_i);
      auto av_grads = model.ca_av.backward(sc.f_v, sc.f_a, sc.ca_av,
                                           grad_f_av);
      auto va_grads = model.ca_va.backward(sc.f_a, sc.f_v, sc.ca_va,
                                           grad_f_va);
      Tensor grad_f_v = std::move(av_grads.first);
      add_in_place(grad_f_v, va_grads.second);
      Tensor grad_f_a = std::move(av_grads.second);
      add_in_place(grad_f_a, va_grads.first);

      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t d = 0; d < cfg.d_v; ++d) {
          grad_e_v_rows.at(t * speakers + n, d) = grad_f_v.at(t, d);
        }
        for (std::size_t d = 0; d < cfg.d_a; ++d) {
          grad_e_a.at(t, d) += grad_f_a.at(t, d);
        }
        // Gradients w.r.t. the identity columns stop here: speaker
        // embeddings are inputs, not parameters.
      }
    } else {
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t d = 0; d < cfg.d_a; ++d) {
          grad_e_a.at(t, d) += grad_fused.at(t, d);
        }
        for (std::size_t d = 0; d < cfg.d_v; ++d) {
          grad_e_v_rows.at(t * speakers + n, d) =
              grad_fused.at(t, cfg.d_a + d);
        }
      }
    }
  }

  model.visual.net.backward(cache.visual_cache, grad_e_v_rows);
  model.audio.backward(cache.audio_cache, grad_e_a);
}

std::vector<double> train_casa(CasaModel& model,
                               const std::vector<CasaSample>& corpus,
                               std::size_t epochs, double learning_rate,
                               const MixupParams& mix, Rng& rng) {
  if (corpus.empty()) {
    throw std::invalid_argument("train_casa: empty corpus");
  }
  if (mix.enabled && mix.alpha <= 0.0) {
    throw std::invalid_argument("train_casa: mixup alpha must be positive");
  }
  const std::vector<Parameter*> all = model.parameters();
  const std::vector<Parameter*> trainable = model.trainable_parameters();

  std::vector<double> history;
  history.reserve(epochs);
  std::vector<std::size_t> order(corpus.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<std::size_t> partner(corpus.size());

  for (std::size_t epoch = 0; epoch < epochs; ++epoch) {
    rng.shuffle(order);
    std::iota(partner.begin(), partner.end(), std::size_t{0});
    if (mix.enabled) rng.shuffle(partner);

    double total = 0.0;
    for (const std::size_t index : order) {
      const CasaSample* sample = &corpus[index];
      CasaSample mixed;
      if (mix.enabled && partner[index] != index) {
        const CasaSample& other = corpus[partner[index]];
        const bool compatible =
            sample->features.visual.same_shape(other.features.visual) &&
            sample->features.speaker.same_shape(other.features.speaker);
        if (compatible) {
          const double lambda = rng.beta(mix.alpha, mix.alpha);
          mixed.features = mixup(sample->features, other.features, lambda);
          mixed.audio = sample->audio;
          sample = &mixed;
        }
      }

      const std::size_t frames = sample->features.visual.dim(0);
      const std::size_t speakers = sample->features.visual.dim(1);
      CasaInputs inputs;
      inputs.visual.features = sample->features.visual;
      inputs.audio_features = sample->audio;
      inputs.speakers.vectors = sample->features.speaker;

      Tensor mask({frames, speakers});
      for (std::size_t t = 0; t < frames; ++t) {
        for (std::size_t n = 0; n < speakers; ++n) {
          mask.at(t, n) = sample->features.valid.at(0, n);
        }
      }

      zero_grad_all(all);
      CasaForwardCache cache;
      const Tensor logits = casa_forward_logits(model, inputs, &cache);
      const BceResult loss =
          bce_with_logits(logits, sample->features.labels, mask);
      total += loss.value;
      casa_backward(model, cache, loss.grad_logits);
      adam_step_all(trainable, learning_rate);
    }
    history.push_back(total / static_cast<double>(corpus.size()));
  }
  return history;
}

// --- checkpoint serialization ---

namespace {

constexpr std::uint32_t kCheckpointVersion = 1;

void put_u32(std::string& out, std::uint32_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
  out.push_back(static_cast<char>((v >> 16) & 0xFF));
  out.push_back(static_cast<char>((v >> 24) & 0xFF));
}

void put_f64(std::string& out, double v) {
  const std::uint64_t bits = std::bit_cast<std::uint64_t>(v);
  for (int shift = 0; shift < 64; shift += 8) {
    out.push_back(static_cast<char>((bits >> shift) & 0xFF));
  }
}

[[noreturn]] void fail(const std::filesystem::path& path,
                       const std::string& reason) {
  throw std::runtime_error("checkpoint: " + path.string() + ": " + reason);
}

class Reader {
 public:
  Reader(const std::string& bytes, const std::filesystem::path& path)
      : bytes_(bytes), path_(path) {}

  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) {
      v = (v << 8) |
          static_cast<unsigned char>(bytes_[offset_ + static_cast<std::size_t>(i)]);
    }
    offset_ += 4;
    return v;
  }

  double f64() {
    need(8);
    std::uint64_t bits = 0;
    for (int i = 7; i >= 0; --i) {
      bits = (bits << 8) |
             static_cast<unsigned char>(bytes_[offset_ + static_cast<std::size_t>(i)]);
    }
    offset_ += 8;
    return std::bit_cast<double>(bits);
  }

  std::string raw(std::size_t count) {
    need(count);
    std::string out = bytes_.substr(offset_, count);
    offset_ += count;
    return out;
  }

  std::size_t remaining() const { return bytes_.size() - offset_; }

 private:
  void need(std::size_t count) {
    if (bytes_.size() - offset_ < count) fail(path_, "truncated file");
  }

  const std::string& bytes_;
  const std::filesystem::path& path_;
  std::size_t offset_ = 0;
};

void put_tensor(std::string& out, const Tensor& t) {
  put_u32(out, static_cast<std::uint32_t>(t.rank()));
  for (std::size_t axis = 0; axis < t.rank(); ++axis) {
    put_u32(out, static_cast<std::uint32_t>(t.dim(axis)));
  }
  for (std::size_t i = 0; i < t.size(); ++i) put_f64(out, t[i]);
}

void read_tensor_into(Reader& reader, Tensor& dst, const std::string& name,
                      const std::filesystem::path& path) {
  const std::uint32_t rank = reader.u32();
  std::vector<std::size_t> shape(rank);
  for (std::uint32_t axis = 0; axis < rank; ++axis) {
    shape[axis] = reader.u32();
  }
  if (shape != dst.shape()) {
    fail(path, "parameter '" + name + "' has unexpected shape");
  }
  for (std::size_t i = 0; i < dst.size(); ++i) dst[i] = reader.f64();
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path,
                     const CasaModel& model) {
  std::string bytes;
  bytes += "CASA";
  put_u32(bytes, kCheckpointVersion);
  const CasaConfig& cfg = model.config;
  for (const std::size_t dim :
       {cfg.d_a, cfg.d_v, cfg.d_i, cfg.d_model, cfg.heads, cfg.frames,
        cfg.n_max, cfg.f_lip, cfg.audio_features, cfg.visual_hidden,
        cfg.audio_hidden, cfg.decoder_hidden}) {
    put_u32(bytes, static_cast<std::uint32_t>(dim));
  }
  put_u32(bytes, model.mode == FusionMode::casa ? 0 : 1);
  put_tensor(bytes, model.audio.feature_mean);
  put_tensor(bytes, model.audio.feature_std);
  // parameters() needs a mutable model only because it returns pointers
  // usable for updates; serialization just reads the values.
  CasaModel& readable = const_cast<CasaModel&>(model);
  for (const Parameter* p : readable.parameters()) {
    put_tensor(bytes, p->value);
  }

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(path, "cannot open for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) fail(path, "write failed");
}

CasaModel load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(path, "cannot open");
  const std::string bytes((std::istreambuf_iterator<char>(in)),
                          std::istreambuf_iterator<char>());
  Reader reader(bytes, path);
  if (reader.raw(4) != "CASA") fail(path, "bad magic");
  const std::uint32_t version = reader.u32();
  if (version != kCheckpointVersion) {
    fail(path, "unsupported version " + std::to_string(version));
  }
  CasaConfig cfg;
  cfg.d_a = reader.u32();
  cfg.d_v = reader.u32();
  cfg.d_i = reader.u32();
  cfg.d_model = reader.u32();
  cfg.heads = reader.u32();
  cfg.frames = reader.u32();
  cfg.n_max = reader.u32();
  cfg.f_lip = reader.u32();
  cfg.audio_features = reader.u32();
  cfg.visual_hidden = reader.u32();
  cfg.audio_hidden = reader.u32();
  cfg.decoder_hidden = reader.u32();
  const std::uint32_t mode_code = reader.u32();
  if (mode_code > 1) {
    fail(path, "unknown fusion mode " + std::to_string(mode_code));
  }
  try {
    cfg.validate();
  } catch (const std::invalid_argument& e) {
    fail(path, e.what());
  }

  Rng rng(0);  // initialization is overwritten below
  CasaModel model(cfg, mode_code == 0 ? FusionMode::casa
                                      : FusionMode::concat_baseline,
                  rng);
  read_tensor_into(reader, model.audio.feature_mean, "audio.feature_mean",
                   path);
  read_tensor_into(reader, model.audio.feature_std, "audio.feature_std",
                   path);
  for (Parameter* p : model.parameters()) {
    read_tensor_into(reader, p->value, p->name, path);
  }
  if (reader.remaining() != 0) fail(path, "trailing bytes after parameters");
  return model;
}

}  // namespace casanet
