#include "sasc/remote_module.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <future>

#include "http_util.hpp"
#include "sasc/errors.hpp"

namespace sasc {
namespace {

using nlohmann::json;

httplib::Client make_client(const detail::UrlParts& url, const RemoteOptions& opt) {
  httplib::Client cli(url.origin);
  const auto secs = static_cast<time_t>(opt.timeout_s);
  cli.set_connection_timeout(secs > 0 ? secs : 1);
  cli.set_read_timeout(secs > 0 ? secs : 1);
  cli.set_write_timeout(secs > 0 ? secs : 1);
  if (!opt.bearer_token.empty()) cli.set_bearer_token_auth(opt.bearer_token);
  return cli;
}

bool is_json_content(const httplib::Response& res) {
  return res.get_header_value("Content-Type").rfind("application/json", 0) == 0;
}

std::string truncate_body(const std::string& body) {
  return body.size() > 512 ? body.substr(0, 512) + "..." : body;
}

// Returns values, or throws ProtocolError / NonFiniteResponse.
std::vector<double> decode_values(const httplib::Response& res,
                                  const std::vector<std::string>& texts) {
  if (!is_json_content(res))
    throw ProtocolError("wrong content type '" + res.get_header_value("Content-Type") +
                        "'; body: " + truncate_body(res.body));
  json doc;
  try {
    doc = json::parse(detail::nullify_non_finite(res.body));
  } catch (const json::exception&) {
    throw ProtocolError("malformed JSON body: " + truncate_body(res.body));
  }
  if (!doc.is_object() || !doc.contains("values") || !doc["values"].is_array())
    throw ProtocolError("missing \"values\" array; body: " + truncate_body(res.body));
  const auto& arr = doc["values"];
  if (arr.size() != texts.size())
    throw ProtocolError("expected " + std::to_string(texts.size()) + " values, got " +
                        std::to_string(arr.size()) + "; body: " + truncate_body(res.body));
  std::vector<double> values;
  values.reserve(arr.size());
  for (std::size_t i = 0; i < arr.size(); ++i) {
    if (arr[i].is_null()) throw NonFiniteResponse(texts[i], std::nan(""));
    if (!arr[i].is_number())
      throw ProtocolError("non-numeric value at index " + std::to_string(i) +
                          "; body: " + truncate_body(res.body));
    const double v = arr[i].get<double>();
    if (!std::isfinite(v)) throw NonFiniteResponse(texts[i], v);
    values.push_back(v);
  }
  return values;
}

class RemoteModule final : public TextModule {
 public:
  RemoteModule(std::string base_url, std::string name, RemoteOptions opt)
      : base_url_(std::move(base_url)),
        name_(std::move(name)),
        opt_(std::move(opt)),
        url_(detail::split_url(base_url_)) {
    if (opt_.batch_size == 0) opt_.batch_size = 1;
    if (opt_.max_inflight == 0) opt_.max_inflight = 1;
    id_ = "remote:" + url_.origin + url_.prefix + "#" + name_;
  }

  const std::string& id() const override { return id_; }
  ModuleKind kind() const override { return ModuleKind::RemoteHttp; }
  nlohmann::json descriptor() const override {
    return {{"base_url", base_url_}, {"module", name_}};
  }

  std::vector<double> evaluate(std::span<const std::string> texts) const override {
    std::vector<std::vector<std::string>> batches;
    for (std::size_t i = 0; i < texts.size(); i += opt_.batch_size) {
      const auto end = std::min(texts.size(), i + opt_.batch_size);
      batches.emplace_back(texts.begin() + static_cast<std::ptrdiff_t>(i),
                           texts.begin() + static_cast<std::ptrdiff_t>(end));
    }
    std::vector<double> out;
    out.reserve(texts.size());
    // Waves of at most max_inflight concurrent requests.
    for (std::size_t w = 0; w < batches.size(); w += opt_.max_inflight) {
      const auto wave_end = std::min(batches.size(), w + opt_.max_inflight);
      std::vector<std::future<std::vector<double>>> wave;
      for (std::size_t b = w; b < wave_end; ++b) {
        wave.push_back(std::async(std::launch::async,
                                  [this, &batch = batches[b]] { return score_batch(batch); }));
      }
      for (auto& f : wave) {
        auto v = f.get();
        out.insert(out.end(), v.begin(), v.end());
      }
    }
    return out;
  }

 private:
  std::vector<double> score_batch(const std::vector<std::string>& texts) const {
    const std::string body = json{{"module", name_}, {"texts", texts}}.dump();
    std::string last_error;
    for (int attempt = 0; attempt <= opt_.retries; ++attempt) {
      if (attempt > 0) detail::backoff_sleep(opt_.backoff_base_s, attempt - 1);
      auto cli = make_client(url_, opt_);
      auto res = cli.Post(url_.prefix + "/score", body, "application/json");
      if (!res) {
        last_error = "transport error: " + httplib::to_string(res.error());
        continue;
      }
      if (res->status != 200) {
        last_error = "HTTP " + std::to_string(res->status) + ": " + truncate_body(res->body);
        continue;
      }
      return decode_values(*res, texts);
    }
    throw RemoteUnavailable("module server " + base_url_ + " unavailable after " +
                            std::to_string(opt_.retries) + " retries (" + last_error + ")");
  }

  std::string base_url_;
  std::string name_;
  RemoteOptions opt_;
  detail::UrlParts url_;
  std::string id_;
};

double ms_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

ModuleHandle make_remote_module(const std::string& base_url, const std::string& name,
                                RemoteOptions options) {
  if (name.empty()) throw ConfigError("remote module name must be non-empty");
  return ModuleHandle(std::make_shared<RemoteModule>(base_url, name, std::move(options)));
}

std::vector<std::string> list_remote_modules(const std::string& base_url,
                                             const RemoteOptions& options) {
  const auto url = detail::split_url(base_url);
  std::string last_error;
  for (int attempt = 0; attempt <= options.retries; ++attempt) {
    if (attempt > 0) detail::backoff_sleep(options.backoff_base_s, attempt - 1);
    auto cli = make_client(url, options);
    auto res = cli.Get(url.prefix + "/modules");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status != 200) {
      last_error = "HTTP " + std::to_string(res->status);
      continue;
    }
    if (!is_json_content(*res))
      throw ProtocolError("wrong content type '" + res->get_header_value("Content-Type") +
                          "' from /modules; body: " + truncate_body(res->body));
    try {
      const auto doc = json::parse(res->body);
      return doc.at("modules").get<std::vector<std::string>>();
    } catch (const json::exception&) {
      throw ProtocolError("malformed /modules body: " + truncate_body(res->body));
    }
  }
  throw RemoteUnavailable("module server " + base_url + " unavailable (" + last_error + ")");
}

ProbeResult probe_server(const std::string& base_url, const std::optional<std::string>& module,
                         const RemoteOptions& options) {
  ProbeResult result;
  auto t0 = std::chrono::steady_clock::now();
  result.modules = list_remote_modules(base_url, options);
  result.list_latency_ms = ms_since(t0);
  if (result.modules.empty()) throw ProtocolError("server lists no modules");

  result.probed_module = module.value_or(result.modules.front());
  const std::vector<std::string> canary = {"the sports team won the game",
                                           "quarterly tax filing deadline",
                                           "a quiet afternoon by the lake"};
  const auto url = detail::split_url(base_url);
  auto cli = make_client(url, options);
  t0 = std::chrono::steady_clock::now();
  auto res = cli.Post(url.prefix + "/score",
                      json{{"module", result.probed_module}, {"texts", canary}}.dump(),
                      "application/json");
  result.score_latency_ms = ms_since(t0);
  if (!res) throw RemoteUnavailable("transport error: " + httplib::to_string(res.error()));
  if (res->status != 200)
    throw ProtocolError("HTTP " + std::to_string(res->status) + " from /score; body: " +
                        truncate_body(res->body));
  try {
    result.canary_values = decode_values(*res, canary);
  } catch (const NonFiniteResponse& e) {
    throw ProtocolError(std::string("non-finite value in /score response; body: ") +
                        truncate_body(res->body));
  }
  return result;
}

}  // namespace sasc
