// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>
#include <optional>
#include <string>
#include <string_view>

namespace serval {

/// Connection and retry settings shared by the VLM and encoder clients.
struct EndpointSettings {
  std::string base_url;
  std::optional<std::string> api_key;
  double request_timeout_s = 120.0;
  int max_retries = 3;
  int max_concurrency = 4;
  /// First backoff delay; doubles per retry, scaled by a jitter in [0.5, 1.5).
  double retry_backoff_s = 1.0;
};

/// Throws ConfigError for non-positive timeout/concurrency, negative
/// retries or an unparsable base_url.
void check_endpoint_settings(const EndpointSettings& settings,
                             std::string_view what);

/// POSTs JSON to {base_url}{route}. Safe to call from several threads.
///
/// Transport failures and HTTP 429/5xx are retried up to max_retries times.
/// Exhausted retries raise TransportError (no response) or EndpointError
/// (last status); any other non-2xx raises EndpointError immediately; a body
/// that is not JSON raises ProtocolError.
class JsonEndpoint {
 public:
  explicit JsonEndpoint(EndpointSettings settings);

  /// `attempt_seconds`, when given, receives the wall time of the
  /// successful attempt alone.
  nlohmann::json post(std::string_view route, const nlohmann::json& body,
                      double* attempt_seconds = nullptr) const;

  const EndpointSettings& settings() const { return settings_; }

 private:
  EndpointSettings settings_;
  std::string scheme_host_port_;
  std::string path_prefix_;
};

}  // namespace serval
