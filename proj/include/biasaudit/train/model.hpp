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

#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/core/image.hpp"
#include "biasaudit/train/nn.hpp"

namespace biasaudit::train {

struct ModelSpec {
  std::string backend_name = "reference_cnn";
  double width_multiplier = 1.0;
  double depth_multiplier = 1.0;
  int num_classes = 3;

  void validate() const;
  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

nlohmann::json model_spec_to_json(const ModelSpec& spec);
ModelSpec model_spec_from_json(const nlohmann::json& j);

/// A trainable image classifier. Inputs are batches of equally sized RGB
/// model inputs in [0, 1]; normalization happens inside the model.
class Classifier {
 public:
  virtual ~Classifier() = default;

  virtual const ModelSpec& spec() const = 0;
  /// Logits [num_classes, batch]. train=true keeps state for backward().
  virtual Mat forward(std::span<const Image> batch, bool train) = 0;
  virtual void backward(const Mat& dlogits) = 0;
  virtual std::vector<Param*> parameters() = 0;

  /// Number of feature layers exposed for probing (1-based indices).
  virtual int num_feature_layers() const = 0;
  virtual int feature_dim(int layer) const = 0;
  /// Globally pooled activations of `layer`, shape [feature_dim, batch].
  virtual Mat features(std::span<const Image> batch, int layer) = 0;

  virtual std::unique_ptr<Classifier> clone() const = 0;
  /// Replaces the classification head with a freshly initialized one.
  virtual void reset_head(int num_classes, std::uint64_t seed) = 0;

  int predict(const Image& input);
  void zero_grad();
  std::size_t parameter_count();
};

/// Patchify stem (8x8, stride 8) followed by four stages of
/// conv3x3(stride 2)-LayerNorm-ReLU blocks, global average pooling and a
/// linear head. depth_multiplier adds residual conv3x3 blocks per stage.
class ReferenceCnn final : public Classifier {
 public:
  static constexpr int kStemWidth = 16;
  static constexpr int kStageWidths[4] = {16, 32, 64, 128};
  static constexpr int kStemPatch = 8;

  ReferenceCnn(const ModelSpec& spec, std::uint64_t init_seed);

  const ModelSpec& spec() const override { return spec_; }
  Mat forward(std::span<const Image> batch, bool train) override;
  void backward(const Mat& dlogits) override;
  std::vector<Param*> parameters() override;
  int num_feature_layers() const override { return 5; }
  int feature_dim(int layer) const override;
  Mat features(std::span<const Image> batch, int layer) override;
  std::unique_ptr<Classifier> clone() const override;
  void reset_head(int num_classes, std::uint64_t seed) override;

  /// Channel widths after applying the width multiplier: stem, then stages.
  static std::vector<int> widths(double width_multiplier);
  static int blocks_per_stage(double depth_multiplier);

 private:
  struct Block {
    Conv2d conv;
    ChannelLayerNorm norm;
    Relu act;
    bool residual = false;
    Shape in_shape{}, out_shape{};
  };

  Mat run_blocks(const Mat& input, Shape shape, bool train, int stop_layer, Shape* out_shape);
  static Mat pack_batch(std::span<const Image> batch, Shape& shape);
  void init_weights(std::uint64_t seed);

  ModelSpec spec_;
  std::vector<std::vector<Block>> layers_;  // layer 0 = stem, 1..4 = stages
  Linear head_;
  Shape last_shape_{};
};

/// Constructs a backend. reference_cnn is always available; the large
/// reference architectures are recognized names that raise
/// "backend unavailable" since no adapter is compiled in.
std::unique_ptr<Classifier> make_model(const ModelSpec& spec, std::uint64_t init_seed);
std::vector<std::string> known_backends();

/// Exact count of trainable scalars for a spec, without allocating a model.
std::size_t count_parameters(const ModelSpec& spec);

void save_checkpoint(Classifier& model, const std::filesystem::path& path);
std::unique_ptr<Classifier> load_checkpoint(const std::filesystem::path& path);

}  // namespace biasaudit::train
