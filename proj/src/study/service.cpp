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

#include "biasaudit/study/service.hpp"

#include <algorithm>
#include <chrono>
#include <ctime>
#include <fstream>

#include "biasaudit/core/error.hpp"
#include "biasaudit/core/hash.hpp"
#include "biasaudit/core/rng.hpp"
#include "biasaudit/dataset/image_io.hpp"
#include "biasaudit/dataset/sampling.hpp"

namespace biasaudit::study {

using nlohmann::json;

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const auto t = std::chrono::system_clock::to_time_t(now);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[40];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%S", &tm);
  char out[48];
  std::snprintf(out, sizeof out, "%s.%03lldZ", buf, static_cast<long long>(ms));
  return out;
}

std::string_view status_name(SessionStatus s) { return s == SessionStatus::active ? "active" : "completed"; }

}  // namespace

void StudyConfig::validate() const {
  if (datasets.size() < 2) throw Error("a study needs at least two datasets");
  for (std::size_t i = 0; i < datasets.size(); ++i) {
    for (std::size_t j = i + 1; j < datasets.size(); ++j) {
      if (datasets[i].id == datasets[j].id) throw Error("duplicate dataset in study: " + datasets[i].id);
    }
  }
  if (questions_per_session == 0) throw Error("questions_per_session must be positive");
  if (page_size == 0) throw Error("page_size must be positive");
}

json study_config_to_json(const StudyConfig& c) {
  json ds = json::array();
  for (const auto& d : c.datasets) ds.push_back({{"id", d.id}, {"manifest", d.manifest}});
  return {{"datasets", ds},
          {"browse_per_dataset", c.browse_per_dataset},
          {"question_pool_per_dataset", c.question_pool_per_dataset},
          {"questions_per_session", c.questions_per_session},
          {"page_size", c.page_size},
          {"seed", c.seed}};
}

StudyConfig study_config_from_json(const json& j) {
  StudyConfig c;
  for (const auto& d : j.at("datasets")) c.datasets.push_back({d.at("id").get<std::string>(), d.at("manifest").get<std::string>()});
  c.browse_per_dataset = j.value("browse_per_dataset", c.browse_per_dataset);
  c.question_pool_per_dataset = j.value("question_pool_per_dataset", c.question_pool_per_dataset);
  c.questions_per_session = j.value("questions_per_session", c.questions_per_session);
  c.page_size = j.value("page_size", c.page_size);
  c.seed = j.value("seed", c.seed);
  c.validate();
  return c;
}

std::vector<std::size_t> balanced_quotas(std::size_t total, std::size_t k) {
  if (k == 0) throw Error("no datasets");
  std::vector<std::size_t> quota(k, total / k);
  std::size_t left = total % k;
  // Every share has the same fractional part, so the tie-break decides.
  for (std::size_t i = k; i-- > 0 && left > 0; --left) ++quota[i];
  return quota;
}

StudyService::StudyService(StudyConfig config, std::optional<std::filesystem::path> log_path, dataset::ImageStore store)
    : config_(std::move(config)), log_path_(std::move(log_path)), store_(std::move(store)) {
  config_.validate();
  secret_ = hash64(config_.seed, std::string_view("study"));
  const auto k = config_.datasets.size();
  const auto quotas = balanced_quotas(config_.questions_per_session, k);
  for (std::size_t d = 0; d < k; ++d) {
    auto m = std::make_shared<const dataset::DatasetManifest>(dataset::register_dataset(config_.datasets[d].manifest));
    // Browse images and question images come from disjoint halves of one split.
    const auto split = dataset::sample_split(*m, config_.browse_per_dataset, config_.question_pool_per_dataset,
                                             hash64(config_.seed, std::string_view("split")));
    if (split.val_indices.size() < quotas[d]) {
      throw Error("insufficient validation images for " + config_.datasets[d].id);
    }
    manifests_.push_back(m);
    browse_pool_.push_back(split.train_indices);
    question_pool_.push_back(split.val_indices);
    for (auto idx : split.train_indices) {
      images_[image_token("browse", "", static_cast<int>(d), idx)] = {static_cast<int>(d), idx};
    }
  }
  if (log_path_) {
    std::ifstream in(*log_path_);
    std::string line;
    while (in && std::getline(in, line)) {
      if (line.empty()) continue;
      json e;
      try {
        e = json::parse(line);
      } catch (const json::parse_error&) {
        break;  // torn final write
      }
      apply_event(e);
    }
  }
}

std::vector<std::string> StudyService::dataset_ids() const {
  std::vector<std::string> ids;
  for (const auto& d : config_.datasets) ids.push_back(d.id);
  return ids;
}

int StudyService::dataset_index(const std::string& id) const {
  for (std::size_t i = 0; i < config_.datasets.size(); ++i) {
    if (config_.datasets[i].id == id) return static_cast<int>(i);
  }
  return -1;
}

std::string StudyService::image_token(std::string_view kind, std::string_view scope, int dataset,
                                      std::size_t index) const {
  std::uint64_t h = hash64(secret_, kind);
  h = hash64(h, scope);
  h = hash64(h, static_cast<std::uint64_t>(dataset));
  h = hash64(h, static_cast<std::uint64_t>(index));
  return hex64(h);
}

StudySession StudyService::build_session(const std::string& session_id, const std::string& user_id) const {
  StudySession s;
  s.id = session_id;
  s.user_id = user_id;
  const auto quotas = balanced_quotas(config_.questions_per_session, config_.datasets.size());
  const std::uint64_t key = hash64(hash64(secret_, std::string_view("questions")), std::string_view(user_id));
  for (std::size_t d = 0; d < quotas.size(); ++d) {
    auto pool = question_pool_[d];
    CounterRng rng(hash64(key, static_cast<std::uint64_t>(d)));
    rng.shuffle(std::span<std::size_t>(pool));
    for (std::size_t q = 0; q < quotas[d]; ++q) {
      s.questions.push_back({image_token("question", session_id, static_cast<int>(d), pool[q]), static_cast<int>(d), pool[q]});
    }
  }
  CounterRng order(hash64(key, std::string_view("order")));
  order.shuffle(std::span<Question>(s.questions));
  return s;
}

void StudyService::log_event(const json& event) {
  if (!log_path_) return;
  if (log_path_->has_parent_path()) std::filesystem::create_directories(log_path_->parent_path());
  std::ofstream out(*log_path_, std::ios::app);
  out << event.dump() << '\n';
  out.flush();
  if (!out) throw Error("cannot write study log: " + log_path_->string());
}

void StudyService::apply_event(const json& e) {
  const auto type = e.at("type").get<std::string>();
  if (type == "session_created") {
    StudySession s;
    s.id = e.at("session_id").get<std::string>();
    s.user_id = e.at("user_id").get<std::string>();
    for (const auto& q : e.at("questions")) {
      s.questions.push_back({q.at("token").get<std::string>(), q.at("dataset").get<int>(), q.at("index").get<std::size_t>()});
    }
    for (const auto& q : s.questions) images_[q.token] = {q.dataset, q.index};
    session_order_.push_back(s.id);
    sessions_[s.id] = std::move(s);
  } else if (type == "answer") {
    auto& s = sessions_.at(e.at("session_id").get<std::string>());
    s.answers.push_back({e.at("token").get<std::string>(), e.at("choice").get<int>(), e.value("timestamp", std::string{})});
    if (s.answers.size() == s.questions.size()) s.status = SessionStatus::completed;
  } else if (type == "questionnaire") {
    sessions_.at(e.at("session_id").get<std::string>()).questionnaire = e.at("questionnaire");
  } else {
    throw Error("unknown study event: " + type);
  }
}

StudySession StudyService::create_session(const std::string& user_id) {
  std::lock_guard lock(mu_);
  const auto n = static_cast<std::uint64_t>(session_order_.size());
  const std::string uid =
      user_id.empty() ? "u_" + hex64(hash64(hash64(secret_, std::string_view("user")), n)) : user_id;
  std::string sid;
  for (std::uint64_t attempt = 0;; ++attempt) {
    sid = "s_" + hex64(hash64(hash64(hash64(secret_, std::string_view("session")), std::string_view(uid)), n + attempt));
    if (!sessions_.contains(sid)) break;
  }
  auto s = build_session(sid, uid);
  json qs = json::array();
  for (const auto& q : s.questions) qs.push_back({{"token", q.token}, {"dataset", q.dataset}, {"index", q.index}});
  const json event = {{"type", "session_created"}, {"session_id", sid}, {"user_id", uid}, {"questions", qs},
                      {"timestamp", utc_now()}};
  log_event(event);
  apply_event(event);
  return sessions_.at(sid);
}

const StudySession& StudyService::find_session(const std::string& session_id) const {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown session: " + session_id);
  return it->second;
}

StudySession& StudyService::mutable_session(const std::string& session_id) {
  auto it = sessions_.find(session_id);
  if (it == sessions_.end()) throw Error("unknown session: " + session_id);
  return it->second;
}

StudySession StudyService::session(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  return find_session(session_id);
}

std::optional<std::string> StudyService::next_question(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto& s = find_session(session_id);
  for (const auto& q : s.questions) {
    const bool answered =
        std::any_of(s.answers.begin(), s.answers.end(), [&](const Answer& a) { return a.token == q.token; });
    if (!answered) return q.token;
  }
  return std::nullopt;
}

StudySession StudyService::submit_answer(const std::string& session_id, const std::string& token,
                                         const std::string& dataset_id) {
  std::lock_guard lock(mu_);
  auto& s = mutable_session(session_id);
  if (s.status != SessionStatus::active) throw Error("session is completed");
  const bool known = std::any_of(s.questions.begin(), s.questions.end(), [&](const Question& q) { return q.token == token; });
  if (!known) throw Error("unknown image: " + token);
  if (std::any_of(s.answers.begin(), s.answers.end(), [&](const Answer& a) { return a.token == token; })) {
    throw Error("duplicate answer: " + token);
  }
  const int choice = dataset_index(dataset_id);
  if (choice < 0) throw Error("invalid choice: " + dataset_id);
  const json event = {{"type", "answer"}, {"session_id", session_id}, {"token", token}, {"choice", choice},
                      {"timestamp", utc_now()}};
  log_event(event);
  apply_event(event);
  return s;
}

StudySession StudyService::submit_questionnaire(const std::string& session_id, const json& questionnaire) {
  std::lock_guard lock(mu_);
  auto& s = mutable_session(session_id);
  if (!questionnaire.is_object()) throw Error("questionnaire must be an object");
  json q = json::object();
  if (questionnaire.contains("expected_model_accuracy")) {
    const auto& v = questionnaire["expected_model_accuracy"];
    if (!v.is_number() || v.get<double>() < 0.0 || v.get<double>() > 100.0) {
      throw Error("expected_model_accuracy must be a number in [0, 100]");
    }
    q["expected_model_accuracy"] = v;
  }
  if (questionnaire.contains("difficulty")) {
    const auto& v = questionnaire["difficulty"];
    if (!v.is_number_integer() || v.get<int>() < 1 || v.get<int>() > 5) throw Error("difficulty must be an integer 1-5");
    q["difficulty"] = v;
  }
  if (questionnaire.contains("patterns")) {
    if (!questionnaire["patterns"].is_string()) throw Error("patterns must be text");
    q["patterns"] = questionnaire["patterns"];
  }
  const json event = {{"type", "questionnaire"}, {"session_id", session_id}, {"questionnaire", q},
                      {"timestamp", utc_now()}};
  log_event(event);
  apply_event(event);
  return s;
}

SessionAccuracy StudyService::session_accuracy(const std::string& session_id) const {
  std::lock_guard lock(mu_);
  const auto& s = find_session(session_id);
  if (s.status != SessionStatus::completed) throw Error("session is not completed");
  SessionAccuracy acc;
  acc.per_dataset.assign(config_.datasets.size(), {0, 0});
  for (const auto& a : s.answers) {
    const auto& q = *std::find_if(s.questions.begin(), s.questions.end(), [&](const Question& x) { return x.token == a.token; });
    auto& slot = acc.per_dataset[static_cast<std::size_t>(q.dataset)];
    ++slot.second;
    ++acc.total;
    if (a.choice == q.dataset) {
      ++slot.first;
      ++acc.correct;
    }
  }
  acc.accuracy = 100.0 * static_cast<double>(acc.correct) / static_cast<double>(acc.total);
  return acc;
}

std::vector<double> StudyService::completed_accuracies() const {
  std::vector<std::string> ids;
  {
    std::lock_guard lock(mu_);
    for (const auto& id : session_order_) {
      if (sessions_.at(id).status == SessionStatus::completed) ids.push_back(id);
    }
  }
  std::vector<double> out;
  for (const auto& id : ids) out.push_back(session_accuracy(id).accuracy);
  return out;
}

Histogram StudyService::histogram(double bin_width) const { return aggregate_histogram(completed_accuracies(), bin_width); }

StudyService::BrowsePage StudyService::browse(const std::string& dataset_id, std::size_t page) const {
  const int d = dataset_index(dataset_id);
  if (d < 0) throw Error("unknown dataset: " + dataset_id);
  const auto& pool = browse_pool_[static_cast<std::size_t>(d)];
  BrowsePage out;
  out.dataset = dataset_id;
  out.page = page;
  out.pages = (pool.size() + config_.page_size - 1) / config_.page_size;
  const std::size_t begin = page * config_.page_size;
  for (std::size_t i = begin; i < std::min(pool.size(), begin + config_.page_size); ++i) {
    out.tokens.push_back(image_token("browse", "", d, pool[i]));
  }
  return out;
}

std::vector<std::uint8_t> StudyService::image_png(const std::string& token) const {
  ImageRef ref;
  {
    std::lock_guard lock(mu_);
    auto it = images_.find(token);
    if (it == images_.end()) throw Error("unknown image: " + token);
    ref = it->second;
  }
  return dataset::encode_png(store_.load(*manifests_[static_cast<std::size_t>(ref.dataset)], ref.index));
}

json StudyService::session_view(const StudySession& s) const {
  json answered = json::array();
  for (const auto& a : s.answers) {
    answered.push_back({{"token", a.token}, {"choice", config_.datasets[static_cast<std::size_t>(a.choice)].id},
                        {"timestamp", a.timestamp}});
  }
  return {{"session_id", s.id},
          {"user_id", s.user_id},
          {"datasets", dataset_ids()},
          {"status", std::string(status_name(s.status))},
          {"total", s.questions.size()},
          {"answered", s.answers.size()},
          {"answers", answered},
          {"questionnaire", s.questionnaire ? *s.questionnaire : json(nullptr)}};
}

json StudyService::result_view(const std::string& session_id) const {
  const auto acc = session_accuracy(session_id);
  const auto s = session(session_id);
  json per = json::object();
  for (std::size_t d = 0; d < acc.per_dataset.size(); ++d) {
    per[config_.datasets[d].id] = {{"correct", acc.per_dataset[d].first}, {"total", acc.per_dataset[d].second}};
  }
  json questions = json::array();
  for (const auto& a : s.answers) {
    const auto& q = *std::find_if(s.questions.begin(), s.questions.end(), [&](const Question& x) { return x.token == a.token; });
    questions.push_back({{"token", q.token},
                         {"truth", config_.datasets[static_cast<std::size_t>(q.dataset)].id},
                         {"choice", config_.datasets[static_cast<std::size_t>(a.choice)].id}});
  }
  return {{"session_id", s.id},   {"accuracy", acc.accuracy}, {"correct", acc.correct},
          {"total", acc.total},   {"per_dataset", per},       {"questions", questions}};
}

}  // namespace biasaudit::study
