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
#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/dataset/manifest.hpp"

namespace biasaudit::dataset {

struct SplitSpec {
  std::string dataset_id;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> val_indices;
  std::uint64_t seed = 0;

  friend bool operator==(const SplitSpec&, const SplitSpec&) = default;
};

/// Disjoint train/val index lists of exactly the requested sizes, drawn
/// uniformly without replacement from the usable pool. The pool is shuffled
/// with a generator keyed by hash64(seed, dataset_id); both lists are returned
/// ascending.
SplitSpec sample_split(const DatasetManifest& manifest, std::size_t n_train, std::size_t n_val,
                       std::uint64_t seed);

/// k pairwise-disjoint pseudo-datasets drawn without replacement from one
/// source. Each gets n_per_set training indices and n_val_per_set held-out
/// indices; dataset ids are "<source>#pseudo<i>".
std::vector<SplitSpec> build_pseudo_datasets(const DatasetManifest& manifest, std::size_t k,
                                             std::size_t n_per_set, std::uint64_t seed,
                                             std::size_t n_val_per_set = 0);

nlohmann::json split_to_json(const SplitSpec& split);
SplitSpec split_from_json(const nlohmann::json& j);
void save_split(const SplitSpec& split, const std::filesystem::path& path);
SplitSpec load_split(const std::filesystem::path& path);

}  // namespace biasaudit::dataset
