// Copyright 2026 The Sciex Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "httplib.h"
#include "sciex/review.h"

namespace sciex {

struct ReviewServer::Impl {
  httplib::Server server;
};

namespace {

void Send(httplib::Response& res, const ApiResponse& api) {
  res.status = api.status;
  res.set_content(api.body.dump(), "application/json");
}

}  // namespace

ReviewServer::ReviewServer(ReviewService* service, std::string ui_dir)
    : impl_(std::make_unique<Impl>()) {
  auto& s = impl_->server;
  s.Get("/api/docs", [service](const httplib::Request& req, httplib::Response& res) {
    int page = 1;
    if (req.has_param("page")) {
      try {
        page = std::stoi(req.get_param_value("page"));
      } catch (const std::exception&) {
        page = 0;
      }
    }
    Send(res, service->ListDocs(req.get_param_value("status"), page));
  });
  s.Post("/api/docs", [service](const httplib::Request& req, httplib::Response& res) {
    Send(res, service->CreateDoc(req.body));
  });
  s.Get(R"(/api/docs/([^/]+))", [service](const httplib::Request& req, httplib::Response& res) {
    Send(res, service->GetDoc(req.matches[1]));
  });
  s.Put(R"(/api/docs/([^/]+)/annotations)",
        [service](const httplib::Request& req, httplib::Response& res) {
          Send(res, service->PutAnnotations(req.matches[1], req.body,
                                            req.get_header_value("X-Reviewer")));
        });
  s.Post("/api/retrain", [service](const httplib::Request&, httplib::Response& res) {
    Send(res, service->StartRetrain());
  });
  s.Get("/api/jobs", [service](const httplib::Request&, httplib::Response& res) {
    Send(res, service->ListJobs());
  });
  s.Get(R"(/api/jobs/([^/]+))", [service](const httplib::Request& req, httplib::Response& res) {
    Send(res, service->GetJob(req.matches[1]));
  });
  s.Get("/api/models", [service](const httplib::Request&, httplib::Response& res) {
    Send(res, service->ListModels());
  });
  s.Get("/api/schema", [service](const httplib::Request&, httplib::Response& res) {
    Send(res, service->GetSchema());
  });
  s.set_exception_handler([](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
    std::string what = "internal error";
    try {
      std::rethrow_exception(ep);
    } catch (const std::exception& e) {
      what = e.what();
    } catch (...) {
    }
    res.status = 500;
    res.set_content(nlohmann::json{{"error", what}}.dump(), "application/json");
  });
  if (!ui_dir.empty()) s.set_mount_point("/", ui_dir);
}

ReviewServer::~ReviewServer() { Stop(); }

bool ReviewServer::Listen(const std::string& host, int port) {
  return impl_->server.listen(host, port);
}

int ReviewServer::BindAny(const std::string& host) { return impl_->server.bind_to_any_port(host); }

bool ReviewServer::ListenAfterBind() { return impl_->server.listen_after_bind(); }

void ReviewServer::Stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace sciex
