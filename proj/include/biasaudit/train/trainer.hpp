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
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "biasaudit/train/evaluate.hpp"
#include "biasaudit/train/labeled_images.hpp"
#include "biasaudit/train/model.hpp"
#include "biasaudit/train/schedule.hpp"
#include "biasaudit/transform/augment.hpp"

namespace biasaudit::train {

/// Optimization recipe. Defaults are the full-scale values; desk-scale runs
/// override batch_size and the budget inputs.
struct TrainConfig {
  double base_lr = 1e-3;
  double weight_decay = 0.3;
  double beta1 = 0.9;
  double beta2 = 0.95;
  double eps = 1e-8;
  int batch_size = 4096;
  double warmup_fraction = 20.0 / 300.0;
  double label_smoothing = 0.1;
  std::int64_t ref_epochs = 300;
  std::int64_t ref_dataset_size = 1'281'167;
  /// Explicit step count; replaces the reference-schedule rule when set.
  std::optional<std::int64_t> iterations;
  std::uint64_t seed = 0;

  double checkpoint_fraction = 0.1;
  double val_interval_fraction = 0.02;
  int val_monitor_max_images = 512;
  int train_eval_max_images = 10'000;
  std::size_t cache_bytes = std::size_t{1} << 30;

  std::int64_t budget() const;
  void validate() const;
  friend bool operator==(const TrainConfig&, const TrainConfig&) = default;
};

nlohmann::json train_config_to_json(const TrainConfig& cfg);
TrainConfig train_config_from_json(const nlohmann::json& j);

struct RunRecord {
  std::string config_hash;
  std::vector<std::string> class_names;
  std::vector<float> loss_series;
  std::vector<std::pair<std::int64_t, double>> val_series;
  double final_train_accuracy = 0.0;
  double final_val_accuracy = 0.0;
  std::vector<std::vector<std::int64_t>> confusion;
  ConvergenceStatus convergence_status = ConvergenceStatus::converged;
  double wall_time_seconds = 0.0;
  std::int64_t iterations = 0;
  std::int64_t parameter_count = 0;
};

nlohmann::json run_record_to_json(const RunRecord& r);
RunRecord run_record_from_json(const nlohmann::json& j);

/// Balanced, deterministic stream of training examples: each pass is a fresh
/// permutation of the full training set keyed by (seed, pass number).
class TrainStream {
 public:
  TrainStream(std::vector<ExampleRef> examples, std::uint64_t seed);
  std::vector<ExampleRef> next_batch(std::size_t batch_size);

 private:
  void reshuffle();
  std::vector<ExampleRef> examples_;
  std::vector<ExampleRef> order_;
  std::uint64_t seed_;
  std::uint64_t pass_ = 0;
  std::size_t pos_ = 0;
};

struct TrainOptions {
  /// When set: checkpoints, sidecar metadata, metric events and the record
  /// are written here.
  std::optional<std::filesystem::path> out_dir;
  std::string config_hash;
  /// One manifest path per class; enables writing val_set.json.
  std::vector<std::string> manifest_paths;
  std::function<void(const nlohmann::json&)> on_event;
};

struct TrainResult {
  std::unique_ptr<Classifier> model;
  RunRecord record;
};

/// Trains an N-way dataset classifier where label = class position in `data`.
TrainResult train_classifier(const LabeledImages& data, const ModelSpec& spec, const TrainConfig& cfg,
                             const transform::AugmentationPolicy& policy, const TrainOptions& options = {});

/// Builds the model-input batch exactly as the trainer does for a given step.
/// Exposed so the data stream can be inspected and compared across runs.
std::vector<Image> training_inputs(const LabeledImages& data, const std::vector<ExampleRef>& batch,
                                   const transform::AugmentationPolicy& policy, std::uint64_t seed,
                                   std::int64_t iteration);

}  // namespace biasaudit::train
