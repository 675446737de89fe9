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

#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "biasaudit/core/image.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::transform {

inline constexpr int kInputSize = 224;
inline constexpr int kEvalResize = 256;

/// The four rungs of the augmentation ladder, weakest first.
enum class AugLevel { none, rand_crop, rand_crop_rand_aug, rand_crop_rand_aug_mix };

std::string_view to_string(AugLevel level);
AugLevel aug_level_from_string(std::string_view name);

struct AugmentationPolicy {
  AugLevel level = AugLevel::rand_crop_rand_aug_mix;
  int rand_aug_ops = 2;
  double rand_aug_magnitude = 9.0;
  /// Probability that each selected RandAugment op is applied.
  double rand_aug_prob = 0.5;
  double mixup_alpha = 0.8;
  double cutmix_alpha = 1.0;
  /// Probability of choosing cutmix over mixup for a batch.
  double cutmix_switch_prob = 0.5;
  double crop_scale_min = 0.08;
  double crop_scale_max = 1.0;
  double crop_ratio_min = 3.0 / 4.0;
  double crop_ratio_max = 4.0 / 3.0;

  bool uses_crop() const { return level != AugLevel::none; }
  bool uses_rand_aug() const {
    return level == AugLevel::rand_crop_rand_aug || level == AugLevel::rand_crop_rand_aug_mix;
  }
  bool uses_mix() const { return level == AugLevel::rand_crop_rand_aug_mix; }

  friend bool operator==(const AugmentationPolicy&, const AugmentationPolicy&) = default;
};

/// Policy with the default recipe values at the given ladder rung.
AugmentationPolicy policy_for_level(AugLevel level);

nlohmann::json policy_to_json(const AugmentationPolicy& policy);
AugmentationPolicy policy_from_json(const nlohmann::json& j);

/// Inference transform: resize shorter side to 256 (aspect preserved), then
/// take the central 224x224 crop.
Image eval_transform(const Image& image);

/// Training transform. With level=none this is exactly eval_transform.
/// Otherwise a random resized crop to 224x224, followed by RandAugment when
/// the level includes it. Consumes randomness only from `rng`.
Image train_transform(const Image& image, const AugmentationPolicy& policy, CounterRng& rng);

Image random_resized_crop(const Image& image, const AugmentationPolicy& policy, CounterRng& rng);
Image rand_augment(const Image& image, const AugmentationPolicy& policy, CounterRng& rng);

/// Names of the RandAugment operations, in selection order.
const std::vector<std::string>& rand_augment_op_names();
/// Applies a single named op at the given magnitude (0..10 scale).
Image apply_rand_augment_op(const Image& image, std::string_view op, double magnitude, CounterRng& rng);

struct MixedBatch {
  std::vector<Image> inputs;
  /// Row-major [batch, num_classes]; every row sums to 1.
  std::vector<float> soft_labels;
  int num_classes = 0;
  /// Weight of each sample's own label (1 for pass-through).
  double lambda = 1.0;
  bool used_cutmix = false;
};

struct CutBox {
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // half-open [x0,x1) x [y0,y1)
  int area() const { return (x1 - x0) * (y1 - y0); }
};

/// One-hot soft labels, no mixing.
MixedBatch one_hot_batch(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes);

/// Pairs sample i with sample (n-1-i) and blends with weight lambda.
MixedBatch mixup_pair(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes, double lambda);
/// Pastes the box from the paired sample; label weight follows the pasted area.
MixedBatch cutmix_pair(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes, const CutBox& box);

/// Chooses mixup or cutmix for the whole batch, draws the mixing coefficient
/// from Beta(alpha, alpha), and mixes. Batches of size 1 pass through.
MixedBatch mix_batch(std::vector<Image> inputs, const std::vector<int>& labels, int num_classes,
                     const AugmentationPolicy& policy, CounterRng& rng);

}  // namespace biasaudit::transform
