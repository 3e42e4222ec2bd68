#pragma once

// Minimal OpenAI-compatible completions endpoint for client tests. Replies
// are produced by a caller-supplied function of the prompt text.

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <nlohmann/json.hpp>
#include <string>
#include <thread>

namespace httplib {
class Server;
}

namespace sasc::test {

class FakeOpenAiServer {
 public:
  using Responder = std::function<std::string(const std::string& prompt)>;

  explicit FakeOpenAiServer(Responder responder);
  ~FakeOpenAiServer();
  FakeOpenAiServer(const FakeOpenAiServer&) = delete;
  FakeOpenAiServer& operator=(const FakeOpenAiServer&) = delete;

  std::string url() const;

  // The next n requests get this status before normal service resumes.
  void fail_next(int n, int status);

  int requests() const { return requests_.load(); }
  nlohmann::json last_body() const;
  std::string last_path() const;
  std::string last_authorization() const;

 private:
  Responder responder_;
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
  std::atomic<int> requests_{0};
  std::atomic<int> fail_remaining_{0};
  std::atomic<int> fail_status_{500};
  mutable std::mutex mu_;
  nlohmann::json last_body_;
  std::string last_path_;
  std::string last_auth_;
};

}  // namespace sasc::test
