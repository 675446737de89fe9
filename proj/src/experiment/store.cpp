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

#include "biasaudit/experiment/store.hpp"

#include <fstream>

#include "biasaudit/core/error.hpp"

namespace biasaudit::experiment {

using nlohmann::json;

json result_row_to_json(const ResultRow& r) {
  json j = {{"config_hash", r.config_hash}, {"suite", r.suite},   {"kind", r.kind},
            {"ordinal", r.ordinal},         {"config", r.config}, {"status", r.status},
            {"record", r.record},           {"extra", r.extra},   {"finished_at", r.finished_at}};
  if (!r.error.empty()) j["error"] = r.error;
  return j;
}

ResultRow result_row_from_json(const json& j) {
  ResultRow r;
  r.config_hash = j.at("config_hash").get<std::string>();
  r.suite = j.value("suite", std::string{});
  r.kind = j.value("kind", std::string{});
  r.ordinal = j.value("ordinal", std::int64_t{0});
  r.config = j.value("config", json::object());
  r.status = j.value("status", std::string("ok"));
  r.error = j.value("error", std::string{});
  r.record = j.value("record", json::object());
  r.extra = j.value("extra", json::object());
  r.finished_at = j.value("finished_at", std::string{});
  return r;
}

ResultsStore::ResultsStore(std::filesystem::path path) : path_(std::move(path)) {
  std::ifstream in(*path_);
  if (!in) return;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      // Only the last line may be torn by an interrupted append.
      if (in.peek() == std::char_traits<char>::eof()) break;
      throw Error("corrupt results store " + path_->string() + " at line " + std::to_string(lineno));
    }
    index_row(result_row_from_json(j));
  }
}

void ResultsStore::index_row(const ResultRow& row) {
  if (!latest_.contains(row.config_hash)) order_.push_back(row.config_hash);
  log_.push_back(row);
  latest_[row.config_hash] = log_.size() - 1;
}

bool ResultsStore::completed(const std::string& config_hash) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find(config_hash);
  return it != latest_.end() && log_[it->second].ok();
}

std::optional<ResultRow> ResultsStore::find(const std::string& config_hash) const {
  std::lock_guard lock(mu_);
  auto it = latest_.find(config_hash);
  if (it == latest_.end()) return std::nullopt;
  return log_[it->second];
}

void ResultsStore::append(ResultRow row) {
  std::lock_guard lock(mu_);
  if (path_) {
    if (path_->has_parent_path()) std::filesystem::create_directories(path_->parent_path());
    std::ofstream out(*path_, std::ios::app);
    if (!out) throw Error("cannot append to results store: " + path_->string());
    out << result_row_to_json(row).dump() << '\n';
    out.flush();
    if (!out) throw Error("cannot append to results store: " + path_->string());
  }
  index_row(row);
}

std::vector<ResultRow> ResultsStore::rows() const {
  std::lock_guard lock(mu_);
  std::vector<ResultRow> out;
  out.reserve(order_.size());
  for (const auto& h : order_) out.push_back(log_[latest_.at(h)]);
  return out;
}

std::vector<ResultRow> ResultsStore::log() const {
  std::lock_guard lock(mu_);
  return log_;
}

}  // namespace biasaudit::experiment
