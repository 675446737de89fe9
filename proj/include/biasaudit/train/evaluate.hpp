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

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

#include "biasaudit/core/image.hpp"
#include "biasaudit/train/labeled_images.hpp"
#include "biasaudit/train/model.hpp"

namespace biasaudit::train {

struct EvalResult {
  double accuracy = 0.0;  // percent
  std::int64_t correct = 0;
  std::int64_t total = 0;
  /// confusion[true][predicted]
  std::vector<std::vector<std::int64_t>> confusion;
};

/// Maps one model input (post eval_transform) to a class index.
using Predictor = std::function<int(const Image&)>;

/// Evaluates every example independently: prepared image -> eval_transform ->
/// single-image prediction. No state is shared between examples, so the
/// result does not depend on example order.
EvalResult evaluate(const Predictor& predict, const LabeledImages& data, const std::vector<ExampleRef>& examples);
EvalResult evaluate(Classifier& model, const LabeledImages& data, Subset subset = Subset::val,
                    std::size_t max_images = 0);

EvalResult tally(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes);

}  // namespace biasaudit::train
