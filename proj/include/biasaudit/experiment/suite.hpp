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
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/experiment/config.hpp"
#include "biasaudit/experiment/store.hpp"

namespace biasaudit::experiment {

enum class SuiteKind { combinations, model_size, data_scale, augmentation, corruption, pseudo, probe };
std::string_view to_string(SuiteKind kind);
SuiteKind suite_kind_from_string(std::string_view name);

/// Grid axes. Every non-empty axis multiplies the cell count; cells are
/// ordered by dataset set first, then by the axes in declaration order.
struct SuiteGrid {
  std::vector<std::size_t> train_per_dataset;
  std::vector<double> width_multiplier;
  std::vector<double> depth_multiplier;
  std::vector<transform::AugLevel> aug_level;
  std::vector<transform::CorruptionSpec> corruption;
};

struct SuiteSpec {
  std::string name;
  SuiteKind kind = SuiteKind::combinations;
  std::uint64_t seed = 0;
  std::vector<DatasetSource> pool;
  /// Subset sizes to enumerate over the pool; empty means the whole pool.
  std::vector<std::size_t> k;
  std::optional<PseudoSpec> pseudo;
  /// Template for every cell: sizes, model, training, policy, corruption, probe.
  ExperimentConfig base;
  SuiteGrid grid;

  void validate() const;
};

/// Accepts the YAML (or JSON) suite format documented in docs/suite_spec.md.
SuiteSpec suite_from_json(const nlohmann::json& j);
SuiteSpec load_suite_spec(const std::filesystem::path& path);
SuiteSpec parse_suite_yaml(const std::string& text);
nlohmann::json yaml_to_json(const std::string& text);

struct SuiteCell {
  std::int64_t ordinal = 0;
  ExperimentConfig config;
  std::string hash;
};

/// Cell seed = hash64(suite seed, ordinal).
std::vector<SuiteCell> expand_suite(const SuiteSpec& suite);

struct CellOutcome {
  train::RunRecord record;
  nlohmann::json extra = nlohmann::json::object();
};

/// Runs one experiment: sampling, training, evaluation and optional transfer
/// probing. Artifacts go to run_dir when given.
CellOutcome execute_experiment(const ExperimentConfig& config,
                               const std::optional<std::filesystem::path>& run_dir = std::nullopt,
                               const std::optional<std::filesystem::path>& image_cache = std::nullopt);

using CellExecutor = std::function<CellOutcome(const ExperimentConfig&, const std::optional<std::filesystem::path>&)>;

struct RunOptions {
  bool force = false;
  std::size_t parallelism = 1;
  /// Per-cell run directories are created under this root when set.
  std::optional<std::filesystem::path> runs_dir;
  std::optional<std::filesystem::path> image_cache;
  /// Defaults to execute_experiment.
  CellExecutor executor;
  std::function<void(const SuiteCell&, const ResultRow&)> on_cell_done;
};

struct SuiteSummary {
  std::size_t total = 0;
  std::size_t executed = 0;
  std::size_t skipped = 0;
  std::size_t failed = 0;
};

/// Executes missing cells in order. Completed cells are skipped unless
/// force is set; a failing cell is recorded with status "error" and the
/// suite continues.
SuiteSummary run_suite(const SuiteSpec& suite, ResultsStore& store, const RunOptions& options = {});

}  // namespace biasaudit::experiment
