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

#include "biasaudit/dataset/sampling.hpp"

#include <algorithm>
#include <fstream>

#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"

namespace biasaudit::dataset {
namespace {

std::vector<std::size_t> shuffled_pool(const DatasetManifest& manifest, std::uint64_t key) {
  std::vector<std::size_t> pool = manifest.usable_indices();
  CounterRng rng(key);
  rng.shuffle(std::span<std::size_t>(pool));
  return pool;
}

std::vector<std::size_t> sorted_slice(const std::vector<std::size_t>& pool, std::size_t begin, std::size_t n) {
  std::vector<std::size_t> out(pool.begin() + static_cast<std::ptrdiff_t>(begin),
                               pool.begin() + static_cast<std::ptrdiff_t>(begin + n));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

SplitSpec sample_split(const DatasetManifest& manifest, std::size_t n_train, std::size_t n_val,
                       std::uint64_t seed) {
  const auto usable = manifest.usable_indices().size();
  if (n_train + n_val > usable) {
    throw Error("insufficient images: " + manifest.dataset_id + " has " + std::to_string(usable) +
                " usable, requested " + std::to_string(n_train + n_val));
  }
  const auto pool = shuffled_pool(manifest, hash64(seed, manifest.dataset_id));
  SplitSpec split;
  split.dataset_id = manifest.dataset_id;
  split.seed = seed;
  split.train_indices = sorted_slice(pool, 0, n_train);
  split.val_indices = sorted_slice(pool, n_train, n_val);
  return split;
}

std::vector<SplitSpec> build_pseudo_datasets(const DatasetManifest& manifest, std::size_t k,
                                             std::size_t n_per_set, std::uint64_t seed,
                                             std::size_t n_val_per_set) {
  if (k == 0) throw Error("pseudo-dataset count must be positive");
  const auto usable = manifest.usable_indices().size();
  const std::size_t per_set = n_per_set + n_val_per_set;
  if (k * per_set > usable) {
    throw Error("insufficient images: " + manifest.dataset_id + " has " + std::to_string(usable) +
                " usable, pseudo-datasets need " + std::to_string(k * per_set));
  }
  const auto pool = shuffled_pool(manifest, hash64(seed, manifest.dataset_id + "#pseudo"));
  std::vector<SplitSpec> sets;
  sets.reserve(k);
  for (std::size_t i = 0; i < k; ++i) {
    SplitSpec s;
    s.dataset_id = manifest.dataset_id + "#pseudo" + std::to_string(i);
    s.seed = seed;
    // Training blocks first, then validation blocks, so growing n_val_per_set
    // never changes the training sets.
    s.train_indices = sorted_slice(pool, i * n_per_set, n_per_set);
    s.val_indices = sorted_slice(pool, k * n_per_set + i * n_val_per_set, n_val_per_set);
    sets.push_back(std::move(s));
  }
  return sets;
}

nlohmann::json split_to_json(const SplitSpec& split) {
  return {{"dataset_id", split.dataset_id},
          {"seed", split.seed},
          {"train_indices", split.train_indices},
          {"val_indices", split.val_indices}};
}

SplitSpec split_from_json(const nlohmann::json& j) {
  SplitSpec s;
  s.dataset_id = j.at("dataset_id").get<std::string>();
  s.seed = j.at("seed").get<std::uint64_t>();
  s.train_indices = j.at("train_indices").get<std::vector<std::size_t>>();
  s.val_indices = j.at("val_indices").get<std::vector<std::size_t>>();
  return s;
}

void save_split(const SplitSpec& split, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write split: " + path.string());
  out << split_to_json(split).dump(2) << '\n';
}

SplitSpec load_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open split: " + path.string());
  try {
    return split_from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw Error("parse error in " + path.string() + ": " + e.what());
  }
}

}  // namespace biasaudit::dataset
