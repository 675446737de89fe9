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
#include <span>
#include <string_view>
#include <vector>

#include "biasaudit/train/nn.hpp"

namespace biasaudit::train {

/// Optimizer steps equal to ref_epochs passes over a reference dataset of
/// ref_dataset_size images: ref_epochs * ceil(ref_dataset_size / batch_size).
/// Deliberately independent of the actual training-set size.
std::int64_t iteration_budget(std::int64_t ref_epochs, std::int64_t ref_dataset_size, std::int64_t batch_size);

/// Linear warmup to base_lr over warmup_iters, then cosine decay to zero.
double learning_rate_at(std::int64_t iteration, std::int64_t budget, std::int64_t warmup_iters, double base_lr);

enum class ConvergenceStatus { converged, failed };
std::string_view to_string(ConvergenceStatus status);
ConvergenceStatus convergence_status_from_string(std::string_view name);

struct FailureCriterion {
  double delta = 0.05;
  /// Fraction of the budget after which the loss must be below ln(N) - delta.
  double horizon = 0.5;
  /// Smoothing window as a fraction of the budget (trailing mean).
  double window_fraction = 0.02;
  /// Minimum elapsed fraction for a verdict.
  double min_elapsed = 0.1;
};

/// Trailing moving average with the given window.
std::vector<double> smooth_losses(std::span<const float> losses, std::size_t window);

/// failed iff the smoothed loss never drops below ln(n_classes) - delta at or
/// after the horizon (or after the last recorded step, when fewer steps have
/// run). Throws if less than min_elapsed of the budget has been recorded.
ConvergenceStatus detect_failure(std::span<const float> losses, int n_classes, std::int64_t budget,
                                 const FailureCriterion& criterion = {});

/// AdamW with decoupled weight decay applied to parameters flagged `decay`.
class AdamW {
 public:
  AdamW(double beta1, double beta2, double eps, double weight_decay)
      : beta1_(beta1), beta2_(beta2), eps_(eps), weight_decay_(weight_decay) {}

  void step(const std::vector<Param*>& params, double lr);
  std::int64_t steps() const { return t_; }

 private:
  double beta1_, beta2_, eps_, weight_decay_;
  std::int64_t t_ = 0;
  std::vector<Mat> m_, v_;
};

}  // namespace biasaudit::train
