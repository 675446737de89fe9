/**
 * Copyright 2026 The biasaudit Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "biasaudit/train/model.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::train {
namespace {

constexpr float kMean[3] = {0.485f, 0.456f, 0.406f};
constexpr float kStd[3] = {0.229f, 0.224f, 0.225f};
constexpr char kMagic[8] = {'B', 'A', 'C', 'K', 'P', 'T', '0', '1'};

const std::vector<std::string> kAdapterBackends = {"convnext_t", "vit_s", "resnet50", "vgg16", "alexnet"};

void fill_normal(Mat& m, float stddev, CounterRng& rng) {
  for (long i = 0; i < m.size(); ++i) m.data()[i] = static_cast<float>(rng.normal()) * stddev;
}

}  // namespace

void ModelSpec::validate() const {
  if (num_classes < 2) throw Error("num_classes must be at least 2");
  if (!(width_multiplier > 0.0) || !(depth_multiplier > 0.0)) throw Error("multipliers must be positive");
}

nlohmann::json model_spec_to_json(const ModelSpec& s) {
  return {{"backend", s.backend_name},
          {"width_multiplier", s.width_multiplier},
          {"depth_multiplier", s.depth_multiplier},
          {"num_classes", s.num_classes}};
}

ModelSpec model_spec_from_json(const nlohmann::json& j) {
  ModelSpec s;
  s.backend_name = j.value("backend", s.backend_name);
  s.width_multiplier = j.value("width_multiplier", s.width_multiplier);
  s.depth_multiplier = j.value("depth_multiplier", s.depth_multiplier);
  s.num_classes = j.value("num_classes", s.num_classes);
  s.validate();
  return s;
}

int Classifier::predict(const Image& input) {
  const Mat logits = forward(std::span<const Image>(&input, 1), false);
  Eigen::Index best = 0;
  logits.col(0).maxCoeff(&best);
  return static_cast<int>(best);
}

void Classifier::zero_grad() {
  for (Param* p : parameters()) p->grad.setZero();
}

std::size_t Classifier::parameter_count() {
  std::size_t n = 0;
  for (Param* p : parameters()) n += static_cast<std::size_t>(p->value.size());
  return n;
}

std::vector<int> ReferenceCnn::widths(double width_multiplier) {
  std::vector<int> w;
  w.push_back(std::max(1, static_cast<int>(std::lround(kStemWidth * width_multiplier))));
  for (int base : kStageWidths) w.push_back(std::max(1, static_cast<int>(std::lround(base * width_multiplier))));
  return w;
}

int ReferenceCnn::blocks_per_stage(double depth_multiplier) {
  return std::max(1, static_cast<int>(std::lround(depth_multiplier)));
}

ReferenceCnn::ReferenceCnn(const ModelSpec& spec, std::uint64_t init_seed)
    : spec_(spec), head_(widths(spec.width_multiplier).back(), spec.num_classes, "head") {
  spec_.validate();
  const auto w = widths(spec_.width_multiplier);
  const int depth = blocks_per_stage(spec_.depth_multiplier);
  layers_.resize(5);
  layers_[0].push_back(Block{Conv2d(3, w[0], kStemPatch, kStemPatch, 0, "stem.conv"),
                             ChannelLayerNorm(w[0], "stem.norm"), Relu{}, false});
  for (int s = 1; s <= 4; ++s) {
    const std::string prefix = "stage" + std::to_string(s);
    layers_[static_cast<std::size_t>(s)].push_back(
        Block{Conv2d(w[static_cast<std::size_t>(s - 1)], w[static_cast<std::size_t>(s)], 3, 2, 1, prefix + ".0.conv"),
              ChannelLayerNorm(w[static_cast<std::size_t>(s)], prefix + ".0.norm"), Relu{}, false});
    for (int b = 1; b < depth; ++b) {
      const std::string name = prefix + "." + std::to_string(b);
      layers_[static_cast<std::size_t>(s)].push_back(
          Block{Conv2d(w[static_cast<std::size_t>(s)], w[static_cast<std::size_t>(s)], 3, 1, 1, name + ".conv"),
                ChannelLayerNorm(w[static_cast<std::size_t>(s)], name + ".norm"), Relu{}, true});
    }
  }
  init_weights(init_seed);
}

void ReferenceCnn::init_weights(std::uint64_t seed) {
  CounterRng rng(hash64(seed, std::string_view("reference_cnn.init")));
  for (auto& layer : layers_) {
    for (auto& block : layer) {
      const auto fan_in = static_cast<float>(block.conv.weight.value.cols());
      fill_normal(block.conv.weight.value, std::sqrt(2.0f / fan_in), rng);
    }
  }
  reset_head(spec_.num_classes, seed);
}

void ReferenceCnn::reset_head(int num_classes, std::uint64_t seed) {
  if (num_classes < 2) throw Error("num_classes must be at least 2");
  spec_.num_classes = num_classes;
  head_ = Linear(widths(spec_.width_multiplier).back(), num_classes, "head");
  CounterRng rng(hash64(seed, std::string_view("reference_cnn.head")));
  fill_normal(head_.weight.value, 0.01f, rng);
}

Mat ReferenceCnn::pack_batch(std::span<const Image> batch, Shape& shape) {
  if (batch.empty()) throw Error("empty batch");
  const Image& first = batch.front();
  shape = Shape{static_cast<int>(batch.size()), first.height, first.width};
  Mat x(3, shape.columns());
  const long hw = static_cast<long>(first.width) * first.height;
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const Image& img = batch[i];
    if (img.channels != 3 || img.width != first.width || img.height != first.height) {
      throw Error("batch images must share size and have 3 channels");
    }
    std::memcpy(x.data() + static_cast<long>(i) * hw * 3, img.pixels.data(), sizeof(float) * static_cast<std::size_t>(hw * 3));
  }
  for (int c = 0; c < 3; ++c) x.row(c) = (x.row(c).array() - kMean[c]) / kStd[c];
  return x;
}

Mat ReferenceCnn::run_blocks(const Mat& input, Shape shape, bool train, int stop_layer, Shape* out_shape) {
  Mat x = input;
  for (int l = 0; l < stop_layer; ++l) {
    for (auto& block : layers_[static_cast<std::size_t>(l)]) {
      block.in_shape = shape;
      Mat y = block.conv.forward(x, shape, block.out_shape, train);
      y = block.norm.forward(y, train);
      y = block.act.forward(y, train);
      if (block.residual) y += x;
      shape = block.out_shape;
      x = std::move(y);
    }
  }
  if (out_shape) *out_shape = shape;
  return x;
}

Mat ReferenceCnn::forward(std::span<const Image> batch, bool train) {
  Shape shape;
  const Mat x = pack_batch(batch, shape);
  Shape final_shape;
  const Mat h = run_blocks(x, shape, train, 5, &final_shape);
  last_shape_ = final_shape;
  return head_.forward(global_avg_pool(h, final_shape), train);
}

void ReferenceCnn::backward(const Mat& dlogits) {
  Mat d = global_avg_pool_backward(head_.backward(dlogits), last_shape_);
  for (int l = 4; l >= 0; --l) {
    auto& layer = layers_[static_cast<std::size_t>(l)];
    for (auto it = layer.rbegin(); it != layer.rend(); ++it) {
      Mat dy = it->norm.backward(it->act.backward(d));
      const bool first_layer = (l == 0);
      Mat dx = it->conv.backward(dy, !first_layer);
      if (it->residual) dx += d;
      d = std::move(dx);
    }
  }
}

std::vector<Param*> ReferenceCnn::parameters() {
  std::vector<Param*> out;
  for (auto& layer : layers_) {
    for (auto& block : layer) {
      out.push_back(&block.conv.weight);
      out.push_back(&block.conv.bias);
      out.push_back(&block.norm.gamma);
      out.push_back(&block.norm.beta);
    }
  }
  out.push_back(&head_.weight);
  out.push_back(&head_.bias);
  return out;
}

int ReferenceCnn::feature_dim(int layer) const {
  if (layer < 1 || layer > 5) throw Error("layer_index out of range");
  return widths(spec_.width_multiplier)[static_cast<std::size_t>(layer - 1)];
}

Mat ReferenceCnn::features(std::span<const Image> batch, int layer) {
  if (layer < 1 || layer > 5) throw Error("layer_index out of range");
  Shape shape;
  const Mat x = pack_batch(batch, shape);
  Shape out;
  const Mat h = run_blocks(x, shape, false, layer, &out);
  return global_avg_pool(h, out);
}

std::unique_ptr<Classifier> ReferenceCnn::clone() const { return std::make_unique<ReferenceCnn>(*this); }

std::unique_ptr<Classifier> make_model(const ModelSpec& spec, std::uint64_t init_seed) {
  spec.validate();
  if (spec.backend_name == "reference_cnn") return std::make_unique<ReferenceCnn>(spec, init_seed);
  if (std::find(kAdapterBackends.begin(), kAdapterBackends.end(), spec.backend_name) != kAdapterBackends.end()) {
    throw Error("backend unavailable: " + spec.backend_name);
  }
  throw Error("unknown backend: " + spec.backend_name);
}

std::vector<std::string> known_backends() {
  std::vector<std::string> out = {"reference_cnn"};
  out.insert(out.end(), kAdapterBackends.begin(), kAdapterBackends.end());
  return out;
}

std::size_t count_parameters(const ModelSpec& spec) {
  spec.validate();
  if (spec.backend_name != "reference_cnn") throw Error("backend unavailable: " + spec.backend_name);
  const auto w = ReferenceCnn::widths(spec.width_multiplier);
  const auto depth = static_cast<std::size_t>(ReferenceCnn::blocks_per_stage(spec.depth_multiplier));
  auto block = [](std::size_t cin, std::size_t cout, std::size_t k) { return cin * cout * k * k + cout + 2 * cout; };
  std::size_t total = block(3, static_cast<std::size_t>(w[0]), ReferenceCnn::kStemPatch);
  for (std::size_t s = 1; s <= 4; ++s) {
    const auto cin = static_cast<std::size_t>(w[s - 1]);
    const auto cout = static_cast<std::size_t>(w[s]);
    total += block(cin, cout, 3) + (depth - 1) * block(cout, cout, 3);
  }
  total += (static_cast<std::size_t>(w[4]) + 1) * static_cast<std::size_t>(spec.num_classes);
  return total;
}

void save_checkpoint(Classifier& model, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot write checkpoint: " + path.string());
  const std::string spec = model_spec_to_json(model.spec()).dump();
  auto put_u64 = [&](std::uint64_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof(v)); };
  out.write(kMagic, sizeof(kMagic));
  put_u64(spec.size());
  out.write(spec.data(), static_cast<std::streamsize>(spec.size()));
  const auto params = model.parameters();
  put_u64(params.size());
  for (Param* p : params) {
    put_u64(p->name.size());
    out.write(p->name.data(), static_cast<std::streamsize>(p->name.size()));
    put_u64(static_cast<std::uint64_t>(p->value.rows()));
    put_u64(static_cast<std::uint64_t>(p->value.cols()));
    out.write(reinterpret_cast<const char*>(p->value.data()), static_cast<std::streamsize>(sizeof(float) * p->value.size()));
  }
  if (!out) throw Error("failed writing checkpoint: " + path.string());
}

std::unique_ptr<Classifier> load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open checkpoint: " + path.string());
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) throw Error("not a checkpoint file: " + path.string());
  auto get_u64 = [&]() {
    std::uint64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof(v));
    if (!in) throw Error("truncated checkpoint: " + path.string());
    return v;
  };
  const auto spec_len = get_u64();
  if (spec_len > (1u << 20)) throw Error("corrupt checkpoint header");
  std::string spec_text(spec_len, '\0');
  in.read(spec_text.data(), static_cast<std::streamsize>(spec_len));
  auto model = make_model(model_spec_from_json(nlohmann::json::parse(spec_text)), 0);
  const auto params = model->parameters();
  if (get_u64() != params.size()) throw Error("checkpoint parameter count mismatch");
  for (Param* p : params) {
    const auto name_len = get_u64();
    if (name_len > 4096) throw Error("corrupt checkpoint");
    std::string name(name_len, '\0');
    in.read(name.data(), static_cast<std::streamsize>(name_len));
    const auto rows = get_u64();
    const auto cols = get_u64();
    if (name != p->name || rows != static_cast<std::uint64_t>(p->value.rows()) ||
        cols != static_cast<std::uint64_t>(p->value.cols())) {
      throw Error("checkpoint tensor mismatch at " + p->name);
    }
    in.read(reinterpret_cast<char*>(p->value.data()), static_cast<std::streamsize>(sizeof(float) * p->value.size()));
    if (!in) throw Error("truncated checkpoint: " + path.string());
  }
  return model;
}

}  // namespace biasaudit::train
