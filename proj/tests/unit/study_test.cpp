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

#include <gtest/gtest.h>

#include <fstream>
#include <set>

#include <httplib.h>
#include <json.hpp>

#include "biasaudit/core/error.hpp"
#include "biasaudit/dataset/synthetic.hpp"
#include "biasaudit/study/histogram.hpp"
#include "biasaudit/study/server.hpp"
#include "biasaudit/study/service.hpp"
#include "test_util.hpp"

using namespace biasaudit;
using namespace biasaudit::study;
namespace bt = biasaudit::testing;
using nlohmann::json;

namespace {

StudyConfig make_config(const bt::TempDir& dir, std::size_t per_dataset = 50) {
  StudyConfig cfg;
  for (const char* id : {"yfcc", "cc", "datacomp"}) {
    dataset::SyntheticStyle style;
    style.seed = static_cast<std::uint64_t>(id[0]) * 7 + static_cast<std::uint64_t>(id[1]);
    const auto path = dir / (std::string(id) + ".jsonl");
    dataset::write_manifest(dataset::make_synthetic_manifest(id, per_dataset, style), path);
    cfg.datasets.push_back({id, path.string()});
  }
  cfg.browse_per_dataset = 10;
  cfg.question_pool_per_dataset = 40;
  cfg.questions_per_session = 100;
  cfg.page_size = 4;
  cfg.seed = 5;
  return cfg;
}

std::string error_of(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.what();
  }
  return {};
}

// Answers every question, correctly for the first `correct` of them.
void answer_all(StudyService& svc, const std::string& sid, std::size_t correct) {
  const auto s = svc.session(sid);
  const auto ids = svc.dataset_ids();
  for (std::size_t i = 0; i < s.questions.size(); ++i) {
    const auto& q = s.questions[i];
    const int choice = i < correct ? q.dataset : (q.dataset + 1) % 3;
    svc.submit_answer(sid, q.token, ids[static_cast<std::size_t>(choice)]);
  }
}

}  // namespace

TEST(Quotas, BalancedWithRemainderToLaterDatasets) {
  EXPECT_EQ(balanced_quotas(100, 3), (std::vector<std::size_t>{33, 33, 34}));
  EXPECT_EQ(balanced_quotas(99, 3), (std::vector<std::size_t>{33, 33, 33}));
  EXPECT_EQ(balanced_quotas(101, 3), (std::vector<std::size_t>{33, 34, 34}));
  EXPECT_EQ(balanced_quotas(10, 4), (std::vector<std::size_t>{2, 2, 3, 3}));
}

TEST(Study, SessionHasBalancedQuestions) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto s = svc.create_session("alice");
  ASSERT_EQ(s.questions.size(), 100u);
  std::vector<int> counts(3, 0);
  std::set<std::string> tokens;
  for (const auto& q : s.questions) {
    ++counts[static_cast<std::size_t>(q.dataset)];
    tokens.insert(q.token);
  }
  EXPECT_EQ(counts, (std::vector<int>{33, 33, 34}));
  EXPECT_EQ(tokens.size(), 100u);
  EXPECT_EQ(s.user_id, "alice");
  EXPECT_EQ(s.status, SessionStatus::active);
}

TEST(Study, DifferentUsersGetDifferentQuestions) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto a = svc.create_session("alice");
  const auto b = svc.create_session("bob");
  std::vector<std::size_t> ia, ib;
  for (const auto& q : a.questions) ia.push_back(q.index);
  for (const auto& q : b.questions) ib.push_back(q.index);
  EXPECT_NE(ia, ib);
  EXPECT_NE(a.id, b.id);
  const auto anon = svc.create_session("");
  EXPECT_FALSE(anon.user_id.empty());
}

TEST(Study, QuestionsNeverOverlapBrowseImages) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  std::set<std::vector<std::uint8_t>> browse_pixels;
  std::set<std::string> browse_tokens;
  for (const auto& id : svc.dataset_ids()) {
    const auto first = svc.browse(id, 0);
    EXPECT_EQ(first.pages, 3u);
    for (std::size_t p = 0; p < first.pages; ++p) {
      for (const auto& t : svc.browse(id, p).tokens) {
        browse_tokens.insert(t);
        browse_pixels.insert(svc.image_png(t));
      }
    }
  }
  EXPECT_EQ(browse_tokens.size(), 30u);
  const auto s = svc.create_session("carol");
  for (const auto& q : s.questions) {
    EXPECT_FALSE(browse_tokens.contains(q.token));
    EXPECT_FALSE(browse_pixels.contains(svc.image_png(q.token)));
  }
}

TEST(Study, AnswerErrors) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto s = svc.create_session("dave");
  const auto& q = s.questions[0];
  EXPECT_NE(error_of([&] { svc.submit_answer(s.id, q.token, "laion"); }).find("invalid choice"), std::string::npos);
  EXPECT_NE(error_of([&] { svc.submit_answer(s.id, "deadbeef", "cc"); }).find("unknown image"), std::string::npos);
  // A browse token is a real image but not one of this session's questions.
  const auto browse_token = svc.browse("cc", 0).tokens[0];
  EXPECT_NE(error_of([&] { svc.submit_answer(s.id, browse_token, "cc"); }).find("unknown image"), std::string::npos);
  svc.submit_answer(s.id, q.token, "cc");
  EXPECT_NE(error_of([&] { svc.submit_answer(s.id, q.token, "cc"); }).find("duplicate answer"), std::string::npos);
  EXPECT_NE(error_of([&] { svc.session("s_missing"); }).find("unknown session"), std::string::npos);
  EXPECT_NE(error_of([&] { svc.result_view(s.id); }).find("not completed"), std::string::npos);
}

TEST(Study, HundredAnswersCompleteAndScore) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto s = svc.create_session("erin");
  EXPECT_EQ(svc.next_question(s.id), s.questions[0].token);
  answer_all(svc, s.id, 44);
  const auto done = svc.session(s.id);
  EXPECT_EQ(done.status, SessionStatus::completed);
  EXPECT_FALSE(svc.next_question(s.id));
  const auto acc = svc.session_accuracy(s.id);
  EXPECT_EQ(acc.correct, 44);
  EXPECT_EQ(acc.total, 100);
  EXPECT_DOUBLE_EQ(acc.accuracy, 44.0);
  EXPECT_NE(error_of([&] { svc.submit_answer(s.id, s.questions[0].token, "cc"); }).find("session is completed"),
            std::string::npos);
  EXPECT_EQ(svc.completed_accuracies(), (std::vector<double>{44.0}));
  const auto h = svc.histogram();
  EXPECT_EQ(h.n, 1);
  EXPECT_EQ(h.count_in(40, 45), 1);
  int populated = 0;
  for (const auto& b : h.bins) populated += b.count > 0;
  EXPECT_EQ(populated, 1);
  EXPECT_EQ(svc.result_view(s.id)["accuracy"], 44.0);
}

TEST(Study, QuestionnaireValidation) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto s = svc.create_session("frank");
  EXPECT_THROW(svc.submit_questionnaire(s.id, {{"difficulty", 9}}), Error);
  EXPECT_THROW(svc.submit_questionnaire(s.id, {{"expected_model_accuracy", 120}}), Error);
  const auto after = svc.submit_questionnaire(s.id, {{"expected_model_accuracy", 60}, {"difficulty", 4}, {"patterns", "colors"}});
  ASSERT_TRUE(after.questionnaire);
  EXPECT_EQ((*after.questionnaire)["difficulty"], 4);
}

TEST(Study, LogReplayRestoresState) {
  bt::TempDir dir;
  const auto cfg = make_config(dir);
  std::string sid;
  {
    StudyService svc(cfg, dir / "events.jsonl");
    sid = svc.create_session("gina").id;
    answer_all(svc, sid, 60);
    svc.submit_questionnaire(sid, {{"difficulty", 3}});
    svc.create_session("hank");
  }
  StudyService replayed(cfg, dir / "events.jsonl");
  EXPECT_EQ(replayed.session(sid).status, SessionStatus::completed);
  EXPECT_EQ(replayed.session_accuracy(sid).correct, 60);
  EXPECT_EQ(replayed.completed_accuracies(), (std::vector<double>{60.0}));
  EXPECT_TRUE(replayed.session(sid).questionnaire);
}

TEST(Study, PublicViewHidesGroundTruth) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  const auto s = svc.create_session("ivy");
  const auto view = svc.session_view(s).dump();
  EXPECT_EQ(view.find("truth"), std::string::npos);
  EXPECT_EQ(view.find("\"index\""), std::string::npos);
}

TEST(Study, InsufficientImagesRejected) {
  bt::TempDir dir;
  auto cfg = make_config(dir, 20);
  EXPECT_THROW(StudyService{cfg}, Error);
}

TEST(Histogram, FixtureDistribution) {
  std::ifstream in(std::filesystem::path(BIASAUDIT_FIXTURES) / "human_accuracies.json");
  const auto fixture = json::parse(in);
  const auto accs = fixture["accuracies"].get<std::vector<double>>();
  ASSERT_EQ(accs.size(), 20u);
  const auto h = aggregate_histogram(accs, fixture["bin_width"].get<double>());
  EXPECT_EQ(h.count_in(40, 45), 11);
  EXPECT_EQ(h.count_in(45, 50), 7);
  EXPECT_EQ(h.count_in(50, 101), 2);
  EXPECT_EQ(h.n, 20);
  EXPECT_NEAR(h.mean, 45.4, 1e-9);
  EXPECT_DOUBLE_EQ(h.median, 44.0);
  const auto md = render_histogram(h);
  EXPECT_NE(md.find("| 40-45 | 11 |"), std::string::npos) << md;
  EXPECT_NE(md.find("| 45-50 | 7 |"), std::string::npos) << md;
  EXPECT_EQ(render_histogram(aggregate_histogram(accs, 5)), md);
}

TEST(Histogram, TrivialMeanMedianAndEdges) {
  const auto h = aggregate_histogram({40, 50, 60});
  EXPECT_DOUBLE_EQ(h.mean, 50.0);
  EXPECT_DOUBLE_EQ(h.median, 50.0);
  const auto edges = aggregate_histogram({0, 100, 45});
  EXPECT_EQ(edges.count_in(95, 100.5), 1);
  EXPECT_EQ(edges.count_in(45, 50), 1);
  EXPECT_EQ(edges.count_in(0, 5), 1);
  EXPECT_THROW(aggregate_histogram({}), Error);
  const auto j = histogram_to_json(h);
  EXPECT_EQ(j["n"], 3);
}

TEST(StudyHttp, EndToEndSessionOverHttp) {
  bt::TempDir dir;
  StudyService svc(make_config(dir));
  StudyServer server(svc);
  const int port = server.bind_any_port();
  server.start();
  httplib::Client cli("127.0.0.1", port);

  auto res = cli.Post("/sessions", json{{"user_id", "jo"}}.dump(), "application/json");
  ASSERT_TRUE(res);
  ASSERT_EQ(res->status, 201);
  const auto created = json::parse(res->body);
  const std::string sid = created["session_id"];
  EXPECT_EQ(created["total"], 100);
  EXPECT_EQ(res->body.find("truth"), std::string::npos);

  res = cli.Get("/sessions/" + sid + "/result");
  ASSERT_TRUE(res);
  EXPECT_EQ(res->status, 409);

  const auto truth = svc.session(sid).questions;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    res = cli.Get("/sessions/" + sid + "/next");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200);
    const auto next = json::parse(res->body);
    ASSERT_FALSE(next["done"].get<bool>());
    ASSERT_EQ(next["token"], truth[i].token);
    EXPECT_FALSE(next.contains("dataset"));
    if (i == 0) {
      auto img = cli.Get(next["image_url"].get<std::string>());
      ASSERT_TRUE(img);
      EXPECT_EQ(img->status, 200);
      EXPECT_EQ(img->body.substr(1, 3), "PNG");
    }
    const std::string choice = svc.dataset_ids()[static_cast<std::size_t>(truth[i].dataset)];
    res = cli.Post("/sessions/" + sid + "/answers", json{{"token", truth[i].token}, {"dataset", choice}}.dump(),
                   "application/json");
    ASSERT_TRUE(res);
    ASSERT_EQ(res->status, 200) << res->body;
  }
  res = cli.Post("/sessions/" + sid + "/answers", json{{"token", truth[0].token}, {"dataset", "cc"}}.dump(),
                 "application/json");
  EXPECT_EQ(res->status, 409);

  res = cli.Get("/sessions/" + sid + "/result");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["accuracy"], 100.0);
  res = cli.Get("/stats/histogram");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["n"], 1);
  res = cli.Get("/browse?dataset=cc&page=1");
  ASSERT_EQ(res->status, 200);
  EXPECT_EQ(json::parse(res->body)["items"].size(), 4u);
  EXPECT_EQ(cli.Get("/browse?dataset=laion")->status, 404);
  EXPECT_EQ(cli.Get("/sessions/s_nope")->status, 404);
  EXPECT_EQ(cli.Get("/images/00ff")->status, 404);
  EXPECT_EQ(cli.Post("/sessions/" + sid + "/answers", "{bad", "application/json")->status, 400);
  server.stop();
}
