#pragma once

// Client side of the module wire protocol:
//   POST {base}/score   {"module": name, "texts": [...]} -> {"values": [...]}
//   GET  {base}/modules -> {"modules": [...]}

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "sasc/module.hpp"

namespace sasc {

struct RemoteOptions {
  std::size_t batch_size = 256;
  int retries = 3;
  double backoff_base_s = 0.5;
  std::size_t max_inflight = 4;
  std::string bearer_token;     // sent as "Authorization: Bearer ..." when set
  double timeout_s = 60.0;
};

// Transport failures are retried with exponential backoff and then surface as
// RemoteUnavailable. Non-finite values throw NonFiniteResponse at once.
ModuleHandle make_remote_module(const std::string& base_url, const std::string& name,
                                RemoteOptions options = {});

std::vector<std::string> list_remote_modules(const std::string& base_url,
                                             const RemoteOptions& options = {});

struct ProbeResult {
  std::vector<std::string> modules;
  std::string probed_module;
  std::vector<double> canary_values;
  double list_latency_ms = 0.0;
  double score_latency_ms = 0.0;
};

// Checks protocol conformance of a module server: module listing, JSON
// content type, one value per canary text, finiteness. Throws ProtocolError
// (message carries the offending body) or RemoteUnavailable.
ProbeResult probe_server(const std::string& base_url,
                         const std::optional<std::string>& module = std::nullopt,
                         const RemoteOptions& options = {});

}  // namespace sasc
