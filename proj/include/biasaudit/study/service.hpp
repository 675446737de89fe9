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
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "biasaudit/dataset/image_store.hpp"
#include "biasaudit/dataset/manifest.hpp"
#include "biasaudit/study/histogram.hpp"

namespace biasaudit::study {

struct StudyDataset {
  std::string id;
  std::string manifest;
};

struct StudyConfig {
  std::vector<StudyDataset> datasets;
  /// Labeled images per dataset available for browsing.
  std::size_t browse_per_dataset = 500;
  /// Held-out images per dataset that questions are drawn from.
  std::size_t question_pool_per_dataset = 500;
  std::size_t questions_per_session = 100;
  std::size_t page_size = 24;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json study_config_to_json(const StudyConfig& c);
StudyConfig study_config_from_json(const nlohmann::json& j);

enum class SessionStatus { active, completed };

struct Question {
  std::string token;
  int dataset = 0;        // ground truth, never sent before answering
  std::size_t index = 0;  // manifest index
};

struct Answer {
  std::string token;
  int choice = 0;
  std::string timestamp;
};

struct StudySession {
  std::string id;
  std::string user_id;
  std::vector<Question> questions;
  std::vector<Answer> answers;
  std::optional<nlohmann::json> questionnaire;
  SessionStatus status = SessionStatus::active;
};

struct SessionAccuracy {
  double accuracy = 0.0;
  std::int64_t correct = 0;
  std::int64_t total = 0;
  /// Per true dataset: (correct, total).
  std::vector<std::pair<std::int64_t, std::int64_t>> per_dataset;
};

/// Per-dataset question counts: equal shares with the remainder assigned by
/// largest fractional part, ties broken towards later datasets.
std::vector<std::size_t> balanced_quotas(std::size_t total, std::size_t k);

/// Human "name that dataset" study state. Every mutation is appended to an
/// event log (when a path is given) and replayed on construction.
class StudyService {
 public:
  explicit StudyService(StudyConfig config, std::optional<std::filesystem::path> log_path = std::nullopt,
                        dataset::ImageStore store = {});

  const StudyConfig& config() const { return config_; }
  std::vector<std::string> dataset_ids() const;

  /// user_id may be empty; an opaque one is issued then.
  StudySession create_session(const std::string& user_id);
  StudySession session(const std::string& session_id) const;
  /// Next unanswered question token, or nullopt when all are answered.
  std::optional<std::string> next_question(const std::string& session_id) const;
  StudySession submit_answer(const std::string& session_id, const std::string& token, const std::string& dataset_id);
  StudySession submit_questionnaire(const std::string& session_id, const nlohmann::json& questionnaire);
  SessionAccuracy session_accuracy(const std::string& session_id) const;
  std::vector<double> completed_accuracies() const;
  Histogram histogram(double bin_width = 5.0) const;

  struct BrowsePage {
    std::string dataset;
    std::size_t page = 0;
    std::size_t pages = 0;
    std::vector<std::string> tokens;
  };
  BrowsePage browse(const std::string& dataset_id, std::size_t page) const;

  /// PNG bytes for a question or browse token.
  std::vector<std::uint8_t> image_png(const std::string& token) const;

  /// Public view of a session: no ground truth for any question, and
  /// correctness only once the session is completed.
  nlohmann::json session_view(const StudySession& s) const;
  nlohmann::json result_view(const std::string& session_id) const;

 private:
  struct ImageRef {
    int dataset = 0;
    std::size_t index = 0;
  };
  int dataset_index(const std::string& id) const;
  std::string image_token(std::string_view kind, std::string_view scope, int dataset, std::size_t index) const;
  StudySession& mutable_session(const std::string& session_id);
  const StudySession& find_session(const std::string& session_id) const;
  void log_event(const nlohmann::json& event);
  void apply_event(const nlohmann::json& event);
  StudySession build_session(const std::string& session_id, const std::string& user_id) const;

  StudyConfig config_;
  std::vector<std::shared_ptr<const dataset::DatasetManifest>> manifests_;
  std::vector<std::vector<std::size_t>> browse_pool_;
  std::vector<std::vector<std::size_t>> question_pool_;
  std::map<std::string, ImageRef> images_;
  std::map<std::string, StudySession> sessions_;
  std::vector<std::string> session_order_;
  std::optional<std::filesystem::path> log_path_;
  dataset::ImageStore store_;
  std::uint64_t secret_;
  mutable std::mutex mu_;
};

}  // namespace biasaudit::study
