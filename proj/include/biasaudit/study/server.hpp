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

#include <filesystem>
#include <memory>
#include <optional>
#include <string>

#include "biasaudit/study/service.hpp"

namespace biasaudit::study {

/// JSON-over-HTTP front end for a StudyService.
///
///   POST /sessions                      {"user_id"?}
///   GET  /sessions/{id}
///   GET  /sessions/{id}/next
///   POST /sessions/{id}/answers         {"token", "dataset"}
///   POST /sessions/{id}/questionnaire   {"expected_model_accuracy"?, "difficulty"?, "patterns"?}
///   GET  /sessions/{id}/result
///   GET  /browse?dataset=&page=
///   GET  /stats/histogram?bin_width=
///   GET  /images/{token}
class StudyServer {
 public:
  explicit StudyServer(StudyService& service, std::optional<std::filesystem::path> static_dir = std::nullopt);
  ~StudyServer();
  StudyServer(const StudyServer&) = delete;
  StudyServer& operator=(const StudyServer&) = delete;

  /// Binds to an ephemeral port and returns it.
  int bind_any_port(const std::string& host = "127.0.0.1");
  bool bind(const std::string& host, int port);
  /// Serves on the bound socket until stop().
  void listen();
  void start();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace biasaudit::study
