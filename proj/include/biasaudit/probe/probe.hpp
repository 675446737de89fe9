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
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/probe/features.hpp"
#include "biasaudit/train/labeled_images.hpp"
#include "biasaudit/train/model.hpp"

namespace biasaudit::probe {

struct ProbeConfig {
  std::vector<double> base_lr_sweep{0.1, 0.2, 0.3};
  /// Layer indices expressed for a backbone of reference_depth blocks;
  /// mapped proportionally onto the actual backbone.
  std::vector<int> layer_sweep{8, 9, 10};
  int reference_depth = 12;
  int epochs = 90;
  int batch_size = 256;
  double momentum = 0.9;
  double weight_decay = 0.0;
  /// Which training checkpoint to probe, as a fraction of the budget.
  double checkpoint_fraction = 250.0 / 300.0;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json probe_config_to_json(const ProbeConfig& cfg);
ProbeConfig probe_config_from_json(const nlohmann::json& j);

struct ProbeCell {
  int layer = 0;
  double base_lr = 0.0;
  double accuracy = 0.0;
};

struct ProbeResult {
  /// Max over all grid cells, in percent.
  double accuracy = 0.0;
  int best_layer = 0;
  double best_lr = 0.0;
  std::vector<ProbeCell> cells;
  bool degenerate = false;
  std::string warning;
};

nlohmann::json probe_result_to_json(const ProbeResult& r);

/// Per-dimension standardization fit on training features only. Constant
/// dimensions map to zero.
struct Standardizer {
  Eigen::VectorXf mean;
  Eigen::VectorXf inv_std;
  int informative_dims = 0;

  static Standardizer fit(const Mat& features);
  Mat apply(const Mat& features) const;
};

/// Layers actually probed on a backbone with `num_layers` feature layers.
std::vector<int> map_probe_layers(const ProbeConfig& cfg, int num_layers);

/// Softmax-regression head trained by momentum SGD with cosine decay.
/// Features are [dim, n]. Returns held-out accuracy in percent.
double train_linear_head(const Mat& train_x, const std::vector<int>& train_y, const Mat& val_x,
                         const std::vector<int>& val_y, int num_classes, double base_lr, const ProbeConfig& cfg);

/// Probes one feature set over the learning-rate sweep. Zero-variance
/// features yield chance accuracy and a warning.
ProbeResult linear_probe(const Mat& train_x, const std::vector<int>& train_y, const Mat& val_x,
                         const std::vector<int>& val_y, int num_classes, const ProbeConfig& cfg, int layer = 0);

/// Probes every mapped layer of a frozen backbone on a labeled image set.
ProbeResult probe_backbone(const train::Classifier& backbone, const train::LabeledImages& data, const ProbeConfig& cfg,
                           const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

struct TransferResult {
  ProbeResult trained;
  ProbeResult random;
};

/// Linear probing of a dataset classifier's frozen features on a semantic
/// labeled set, alongside a randomly initialized backbone of the same
/// architecture. The backbone is not modified.
TransferResult transfer_probe(const train::Classifier& backbone, const train::LabeledImages& semantic,
                              const ProbeConfig& cfg, std::uint64_t random_seed,
                              const std::optional<std::filesystem::path>& cache_dir = std::nullopt);

/// The checkpoint in a run directory whose iteration is nearest to
/// fraction x budget (ties go to the earlier checkpoint).
std::filesystem::path select_checkpoint(const std::filesystem::path& run_dir, double fraction);

}  // namespace biasaudit::probe
