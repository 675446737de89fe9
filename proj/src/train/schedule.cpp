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

#include "biasaudit/train/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "biasaudit/core/error.hpp"

namespace biasaudit::train {

std::int64_t iteration_budget(std::int64_t ref_epochs, std::int64_t ref_dataset_size, std::int64_t batch_size) {
  if (ref_epochs <= 0 || ref_dataset_size <= 0 || batch_size <= 0) throw Error("iteration_budget needs positive inputs");
  return ref_epochs * ((ref_dataset_size + batch_size - 1) / batch_size);
}

double learning_rate_at(std::int64_t iteration, std::int64_t budget, std::int64_t warmup_iters, double base_lr) {
  if (warmup_iters > 0 && iteration < warmup_iters) {
    return base_lr * static_cast<double>(iteration + 1) / static_cast<double>(warmup_iters);
  }
  const double span = static_cast<double>(std::max<std::int64_t>(1, budget - warmup_iters));
  const double progress = std::clamp(static_cast<double>(iteration - warmup_iters) / span, 0.0, 1.0);
  return base_lr * 0.5 * (1.0 + std::cos(std::numbers::pi * progress));
}

std::string_view to_string(ConvergenceStatus status) {
  return status == ConvergenceStatus::converged ? "converged" : "failed";
}

ConvergenceStatus convergence_status_from_string(std::string_view name) {
  if (name == "converged") return ConvergenceStatus::converged;
  if (name == "failed") return ConvergenceStatus::failed;
  throw Error("unknown convergence status: " + std::string(name));
}

std::vector<double> smooth_losses(std::span<const float> losses, std::size_t window) {
  window = std::max<std::size_t>(1, window);
  std::vector<double> out(losses.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < losses.size(); ++i) {
    acc += losses[i];
    if (i >= window) acc -= losses[i - window];
    out[i] = acc / static_cast<double>(std::min(window, i + 1));
  }
  return out;
}

ConvergenceStatus detect_failure(std::span<const float> losses, int n_classes, std::int64_t budget,
                                 const FailureCriterion& criterion) {
  if (n_classes < 2 || budget <= 0) throw Error("detect_failure needs n_classes >= 2 and a positive budget");
  const auto elapsed = static_cast<std::int64_t>(losses.size());
  if (elapsed == 0 || static_cast<double>(elapsed) < criterion.min_elapsed * static_cast<double>(budget)) {
    throw Error("detect_failure needs at least 10% of the budget elapsed");
  }
  const auto window = static_cast<std::size_t>(std::max<double>(1.0, std::floor(criterion.window_fraction * budget)));
  const auto smoothed = smooth_losses(losses, window);
  const double threshold = std::log(static_cast<double>(n_classes)) - criterion.delta;
  const auto horizon = static_cast<std::int64_t>(std::ceil(criterion.horizon * static_cast<double>(budget)));
  const std::int64_t start = std::min(horizon, elapsed - 1);
  for (std::int64_t i = start; i < elapsed; ++i) {
    if (smoothed[static_cast<std::size_t>(i)] < threshold) return ConvergenceStatus::converged;
  }
  return ConvergenceStatus::failed;
}

void AdamW::step(const std::vector<Param*>& params, double lr) {
  if (m_.size() != params.size()) {
    m_.clear();
    v_.clear();
    for (Param* p : params) {
      m_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
      v_.push_back(Mat::Zero(p->value.rows(), p->value.cols()));
    }
  }
  ++t_;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  const auto b1 = static_cast<float>(beta1_);
  const auto b2 = static_cast<float>(beta2_);
  const auto step = static_cast<float>(lr / bc1);
  const auto inv_sqrt_bc2 = static_cast<float>(1.0 / std::sqrt(bc2));
  const auto eps = static_cast<float>(eps_);
  for (std::size_t i = 0; i < params.size(); ++i) {
    Param& p = *params[i];
    if (p.decay && weight_decay_ > 0.0) p.value *= static_cast<float>(1.0 - lr * weight_decay_);
    m_[i] = b1 * m_[i] + (1.0f - b1) * p.grad;
    v_[i] = b2 * v_[i] + (1.0f - b2) * p.grad.cwiseProduct(p.grad);
    p.value.array() -= step * m_[i].array() / (v_[i].array().sqrt() * inv_sqrt_bc2 + eps);
  }
}

}  // namespace biasaudit::train
