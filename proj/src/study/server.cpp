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

#include "biasaudit/study/server.hpp"

#include <thread>

#include <httplib.h>
#include <json.hpp>

#include "biasaudit/core/error.hpp"

namespace biasaudit::study {

using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_header("Cache-Control", "no-store");
  res.set_content(body.dump(), "application/json");
}

int status_for(const std::string& message) {
  auto starts = [&](std::string_view p) { return message.rfind(p, 0) == 0; };
  if (starts("unknown session") || starts("unknown dataset") || starts("unknown image")) return 404;
  if (starts("session is") || starts("duplicate answer") || starts("no completed sessions")) return 409;
  return 400;
}

template <typename Fn>
httplib::Server::Handler guarded(Fn fn) {
  return [fn](const httplib::Request& req, httplib::Response& res) {
    try {
      fn(req, res);
    } catch (const json::exception& e) {
      send_json(res, {{"error", std::string("malformed request: ") + e.what()}}, 400);
    } catch (const std::exception& e) {
      send_json(res, {{"error", e.what()}}, status_for(e.what()));
    }
  };
}

json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  return json::parse(req.body);
}

}  // namespace

struct StudyServer::Impl {
  StudyService& service;
  httplib::Server server;
  std::thread thread;
  explicit Impl(StudyService& s) : service(s) {}
};

StudyServer::StudyServer(StudyService& service, std::optional<std::filesystem::path> static_dir)
    : impl_(std::make_unique<Impl>(service)) {
  auto& svc = impl_->service;
  auto& srv = impl_->server;

  srv.Post("/sessions", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto s = svc.create_session(body.value("user_id", std::string{}));
             send_json(res, svc.session_view(s), 201);
           }));
  srv.Get(R"(/sessions/([^/]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, svc.session_view(svc.session(req.matches[1])));
          }));
  srv.Get(R"(/sessions/([^/]+)/next)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const std::string id = req.matches[1];
            const auto s = svc.session(id);
            const auto token = svc.next_question(id);
            json body = {{"session_id", id}, {"answered", s.answers.size()}, {"total", s.questions.size()}};
            if (token) {
              body["done"] = false;
              body["token"] = *token;
              body["image_url"] = "/images/" + *token;
            } else {
              body["done"] = true;
            }
            send_json(res, body);
          }));
  srv.Post(R"(/sessions/([^/]+)/answers)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const auto body = parse_body(req);
             const auto s = svc.submit_answer(req.matches[1], body.at("token").get<std::string>(),
                                              body.at("dataset").get<std::string>());
             send_json(res, svc.session_view(s));
           }));
  srv.Post(R"(/sessions/([^/]+)/questionnaire)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
             const auto s = svc.submit_questionnaire(req.matches[1], parse_body(req));
             send_json(res, svc.session_view(s));
           }));
  srv.Get(R"(/sessions/([^/]+)/result)", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            send_json(res, svc.result_view(req.matches[1]));
          }));
  srv.Get("/browse", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            if (!req.has_param("dataset")) throw Error("missing dataset parameter");
            const std::size_t page = req.has_param("page") ? std::stoul(req.get_param_value("page")) : 0;
            const auto p = svc.browse(req.get_param_value("dataset"), page);
            json items = json::array();
            for (const auto& t : p.tokens) items.push_back({{"token", t}, {"image_url", "/images/" + t}, {"dataset", p.dataset}});
            send_json(res, {{"dataset", p.dataset}, {"page", p.page}, {"pages", p.pages}, {"items", items}});
          }));
  srv.Get("/stats/histogram", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const double width = req.has_param("bin_width") ? std::stod(req.get_param_value("bin_width")) : 5.0;
            send_json(res, histogram_to_json(svc.histogram(width)));
          }));
  srv.Get(R"(/images/([0-9a-f]+))", guarded([&svc](const httplib::Request& req, httplib::Response& res) {
            const auto png = svc.image_png(req.matches[1]);
            res.set_header("Cache-Control", "private, max-age=3600");
            res.set_content(std::string(png.begin(), png.end()), "image/png");
          }));
  srv.Get("/datasets", guarded([&svc](const httplib::Request&, httplib::Response& res) {
            send_json(res, {{"datasets", svc.dataset_ids()}, {"questions_per_session", svc.config().questions_per_session}});
          }));
  if (static_dir) srv.set_mount_point("/", static_dir->string());
}

StudyServer::~StudyServer() { stop(); }

int StudyServer::bind_any_port(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool StudyServer::bind(const std::string& host, int port) { return impl_->server.bind_to_port(host, port); }

void StudyServer::listen() { impl_->server.listen_after_bind(); }

void StudyServer::start() {
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
}

void StudyServer::stop() {
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace biasaudit::study
