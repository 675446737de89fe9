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

#include "biasaudit/train/evaluate.hpp"

#include "biasaudit/core/error.hpp"
#include "biasaudit/transform/augment.hpp"

namespace biasaudit::train {

EvalResult tally(const std::vector<int>& truth, const std::vector<int>& predicted, int num_classes) {
  if (truth.size() != predicted.size()) throw Error("tally size mismatch");
  if (truth.empty()) throw Error("empty validation set");
  EvalResult r;
  r.confusion.assign(static_cast<std::size_t>(num_classes), std::vector<std::int64_t>(static_cast<std::size_t>(num_classes), 0));
  for (std::size_t i = 0; i < truth.size(); ++i) {
    if (predicted[i] < 0 || predicted[i] >= num_classes) throw Error("prediction out of range");
    ++r.confusion[static_cast<std::size_t>(truth[i])][static_cast<std::size_t>(predicted[i])];
    if (truth[i] == predicted[i]) ++r.correct;
  }
  r.total = static_cast<std::int64_t>(truth.size());
  r.accuracy = 100.0 * static_cast<double>(r.correct) / static_cast<double>(r.total);
  return r;
}

EvalResult evaluate(const Predictor& predict, const LabeledImages& data, const std::vector<ExampleRef>& examples) {
  if (examples.empty()) throw Error("empty validation set");
  std::vector<int> truth;
  std::vector<int> predicted;
  truth.reserve(examples.size());
  predicted.reserve(examples.size());
  for (const auto& ex : examples) {
    truth.push_back(ex.label);
    predicted.push_back(predict(transform::eval_transform(data.prepared(ex))));
  }
  return tally(truth, predicted, data.num_classes());
}

EvalResult evaluate(Classifier& model, const LabeledImages& data, Subset subset, std::size_t max_images) {
  if (model.spec().num_classes != data.num_classes()) {
    throw Error("checkpoint class count does not match the number of splits");
  }
  return evaluate([&](const Image& input) { return model.predict(input); }, data, data.examples(subset, max_images));
}

}  // namespace biasaudit::train
