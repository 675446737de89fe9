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
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

namespace biasaudit::experiment {

/// One line of the results log.
struct ResultRow {
  std::string config_hash;
  std::string suite;
  std::string kind;
  std::int64_t ordinal = 0;
  nlohmann::json config;
  /// "ok" or "error".
  std::string status = "ok";
  std::string error;
  /// Serialized RunRecord (empty object for errors).
  nlohmann::json record = nlohmann::json::object();
  /// Additional metrics, e.g. probe accuracies.
  nlohmann::json extra = nlohmann::json::object();
  std::string finished_at;

  bool ok() const { return status == "ok"; }
};

nlohmann::json result_row_to_json(const ResultRow& r);
ResultRow result_row_from_json(const nlohmann::json& j);

/// Append-only line-delimited JSON log of results keyed by config hash, with
/// an in-memory index derived on load. A torn final line (interrupted write)
/// is ignored. Appends are serialized through one writer.
class ResultsStore {
 public:
  /// In-memory store (nothing persisted).
  ResultsStore() = default;
  explicit ResultsStore(std::filesystem::path path);

  /// True when a successful row exists for this hash.
  bool completed(const std::string& config_hash) const;
  std::optional<ResultRow> find(const std::string& config_hash) const;
  void append(ResultRow row);

  /// Latest row per config hash, in order of first appearance.
  std::vector<ResultRow> rows() const;
  /// Every appended row, oldest first.
  std::vector<ResultRow> log() const;
  const std::optional<std::filesystem::path>& path() const { return path_; }

 private:
  void index_row(const ResultRow& row);

  std::optional<std::filesystem::path> path_;
  std::vector<ResultRow> log_;
  std::vector<std::string> order_;
  std::map<std::string, std::size_t> latest_;
  mutable std::mutex mu_;
};

}  // namespace biasaudit::experiment
