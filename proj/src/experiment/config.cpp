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

#include "biasaudit/experiment/config.hpp"

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"

namespace biasaudit::experiment {

using nlohmann::json;

std::vector<std::string> ExperimentConfig::class_names() const {
  std::vector<std::string> names;
  if (pseudo) {
    for (std::size_t i = 0; i < pseudo->k; ++i) names.push_back(pseudo->source.id + "#pseudo" + std::to_string(i));
  } else {
    for (const auto& d : datasets) names.push_back(d.id);
  }
  return names;
}

void ExperimentConfig::validate() const {
  if (pseudo && !datasets.empty()) throw Error("a config uses either datasets or a pseudo source, not both");
  if (num_classes() < 2) throw Error("an experiment needs at least two classes");
  if (train_per_dataset == 0) throw Error("train_per_dataset must be positive");
  if (val_per_dataset == 0) throw Error("val_per_dataset must be positive");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    for (std::size_t j = i + 1; j < datasets.size(); ++j) {
      if (datasets[i].id == datasets[j].id) throw Error("duplicate dataset in config: " + datasets[i].id);
    }
  }
  model.validate();
  train.validate();
  corruption.validate();
  if (probe) {
    if (probe->classes.size() < 2) throw Error("probe task needs at least two classes");
    if (probe->train_per_class == 0 || probe->val_per_class == 0) throw Error("probe split sizes must be positive");
    probe->config.validate();
  }
}

json dataset_source_to_json(const DatasetSource& d) {
  json j = {{"id", d.id}, {"manifest", d.manifest}};
  j["corruption"] = d.corruption ? transform::corruption_to_json(*d.corruption) : json(nullptr);
  return j;
}

DatasetSource dataset_source_from_json(const json& j) {
  DatasetSource d;
  d.id = j.at("id").get<std::string>();
  d.manifest = j.at("manifest").get<std::string>();
  if (j.contains("corruption") && !j["corruption"].is_null()) d.corruption = transform::corruption_from_json(j["corruption"]);
  return d;
}

json experiment_to_json(const ExperimentConfig& c) {
  // The run seed and class count are derived fields; normalize them so that
  // equivalent configs hash equal however they were built.
  auto train_cfg = c.train;
  train_cfg.seed = c.seed;
  auto model = c.model;
  model.num_classes = static_cast<int>(c.num_classes());
  json datasets = json::array();
  for (const auto& d : c.datasets) datasets.push_back(dataset_source_to_json(d));
  json j = {{"datasets", datasets},
            {"train_per_dataset", c.train_per_dataset},
            {"val_per_dataset", c.val_per_dataset},
            {"model", train::model_spec_to_json(model)},
            {"train", train::train_config_to_json(train_cfg)},
            {"augmentation", transform::policy_to_json(c.augmentation)},
            {"corruption", transform::corruption_to_json(c.corruption)},
            {"seed", c.seed}};
  j["pseudo"] = c.pseudo ? json{{"source", dataset_source_to_json(c.pseudo->source)}, {"k", c.pseudo->k}} : json(nullptr);
  if (c.probe) {
    json classes = json::array();
    for (const auto& d : c.probe->classes) classes.push_back(dataset_source_to_json(d));
    j["probe"] = {{"classes", classes},
                  {"train_per_class", c.probe->train_per_class},
                  {"val_per_class", c.probe->val_per_class},
                  {"config", probe::probe_config_to_json(c.probe->config)}};
  } else {
    j["probe"] = nullptr;
  }
  return j;
}

ExperimentConfig experiment_from_json(const json& j) {
  ExperimentConfig c;
  for (const auto& d : j.value("datasets", json::array())) c.datasets.push_back(dataset_source_from_json(d));
  if (j.contains("pseudo") && !j["pseudo"].is_null()) {
    c.pseudo = PseudoSpec{dataset_source_from_json(j["pseudo"].at("source")), j["pseudo"].value("k", std::size_t{3})};
  }
  c.train_per_dataset = j.at("train_per_dataset").get<std::size_t>();
  c.val_per_dataset = j.at("val_per_dataset").get<std::size_t>();
  if (j.contains("model")) c.model = train::model_spec_from_json(j["model"]);
  if (j.contains("train")) c.train = train::train_config_from_json(j["train"]);
  if (j.contains("augmentation")) {
    const auto& a = j["augmentation"];
    c.augmentation = a.is_string() ? transform::policy_for_level(transform::aug_level_from_string(a.get<std::string>()))
                                   : transform::policy_from_json(a);
  }
  if (j.contains("corruption")) c.corruption = transform::corruption_from_json(j["corruption"]);
  if (j.contains("probe") && !j["probe"].is_null()) {
    const auto& p = j["probe"];
    ProbeTask task;
    for (const auto& d : p.at("classes")) task.classes.push_back(dataset_source_from_json(d));
    task.train_per_class = p.at("train_per_class").get<std::size_t>();
    task.val_per_class = p.at("val_per_class").get<std::size_t>();
    if (p.contains("config")) task.config = probe::probe_config_from_json(p["config"]);
    c.probe = std::move(task);
  }
  c.seed = j.value("seed", std::uint64_t{0});
  c.model.num_classes = static_cast<int>(c.num_classes());
  c.train.seed = c.seed;
  c.validate();
  return c;
}

std::string canonical_hash(const json& j) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  return hex64(fnv1a64(j.dump()));
}

std::string config_hash(const ExperimentConfig& c) { return canonical_hash(experiment_to_json(c)); }

std::vector<std::vector<std::string>> enumerate_combinations(const std::vector<std::string>& pool, std::size_t k) {
  if (k > pool.size()) {
    throw Error("k=" + std::to_string(k) + " exceeds pool size " + std::to_string(pool.size()));
  }
  std::vector<std::vector<std::string>> out;
  std::vector<std::size_t> idx(k);
  for (std::size_t i = 0; i < k; ++i) idx[i] = i;
  while (true) {
    std::vector<std::string> combo;
    combo.reserve(k);
    for (auto i : idx) combo.push_back(pool[i]);
    out.push_back(std::move(combo));
    // Advance the rightmost index that can still move.
    std::size_t i = k;
    while (i > 0 && idx[i - 1] == pool.size() - k + (i - 1)) --i;
    if (i == 0) break;
    ++idx[i - 1];
    for (std::size_t j = i; j < k; ++j) idx[j] = idx[j - 1] + 1;
  }
  return out;
}

}  // namespace biasaudit::experiment
