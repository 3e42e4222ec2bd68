#include "fake_openai_server.hpp"

#include <httplib.h>

namespace sasc::test {

using nlohmann::json;

FakeOpenAiServer::FakeOpenAiServer(Responder responder)
    : responder_(std::move(responder)), server_(std::make_unique<httplib::Server>()) {
  auto handler = [this](const httplib::Request& req, httplib::Response& res) {
    ++requests_;
    json body = json::parse(req.body, nullptr, false);
    {
      std::lock_guard lock(mu_);
      last_body_ = body;
      last_path_ = req.path;
      last_auth_ = req.get_header_value("Authorization");
    }
    if (fail_remaining_.load() > 0) {
      --fail_remaining_;
      res.status = fail_status_.load();
      res.set_content(R"({"error":{"message":"injected"}})", "application/json");
      return;
    }
    const bool chat = req.path.find("/chat/") != std::string::npos;
    const std::string prompt =
        chat ? body.at("messages").at(0).at("content").get<std::string>()
             : body.at("prompt").get<std::string>();
    const auto text = responder_(prompt);
    json choice = chat ? json{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}
                       : json{{"index", 0}, {"text", text}};
    res.set_content(json{{"id", "cmpl-test"}, {"choices", json::array({choice})}}.dump(),
                    "application/json");
  };
  server_->Post("/v1/completions", handler);
  server_->Post("/v1/chat/completions", handler);
  port_ = server_->bind_to_any_port("127.0.0.1");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

FakeOpenAiServer::~FakeOpenAiServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

std::string FakeOpenAiServer::url() const { return "http://127.0.0.1:" + std::to_string(port_); }

void FakeOpenAiServer::fail_next(int n, int status) {
  fail_status_ = status;
  fail_remaining_ = n;
}

json FakeOpenAiServer::last_body() const {
  std::lock_guard lock(mu_);
  return last_body_;
}

std::string FakeOpenAiServer::last_path() const {
  std::lock_guard lock(mu_);
  return last_path_;
}

std::string FakeOpenAiServer::last_authorization() const {
  std::lock_guard lock(mu_);
  return last_auth_;
}

}  // namespace sasc::test
