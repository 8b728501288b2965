// SPDX-License-Identifier: Apache-2.0
#include "serval/http.hpp"

#include <httplib.h>

#include <chrono>
#include <cmath>
#include <random>
#include <thread>

#include "serval/errors.hpp"

namespace serval {
namespace {

struct SplitUrl {
  std::string scheme_host_port;
  std::string path_prefix;
};

SplitUrl split_base_url(const std::string& url) {
  auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw ConfigError("base_url '" + url + "' must start with http:// or https://");
  }
  const std::string scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw ConfigError("unsupported scheme in base_url '" + url + "'");
  }
  auto path_start = url.find('/', scheme_end + 3);
  SplitUrl out;
  if (path_start == std::string::npos) {
    out.scheme_host_port = url;
  } else {
    out.scheme_host_port = url.substr(0, path_start);
    out.path_prefix = url.substr(path_start);
  }
  if (out.scheme_host_port.size() <= scheme_end + 3) {
    throw ConfigError("base_url '" + url + "' has no host");
  }
  while (!out.path_prefix.empty() && out.path_prefix.back() == '/') {
    out.path_prefix.pop_back();
  }
  return out;
}

double jitter() {
  thread_local std::mt19937_64 rng{std::random_device{}()};
  return std::uniform_real_distribution<double>(0.5, 1.5)(rng);
}

bool retryable_status(int status) { return status == 429 || status >= 500; }

}  // namespace

void check_endpoint_settings(const EndpointSettings& settings,
                             std::string_view what) {
  const std::string prefix = std::string(what) + ": ";
  if (settings.base_url.empty()) throw ConfigError(prefix + "base_url is required");
  split_base_url(settings.base_url);
  if (!(settings.request_timeout_s > 0.0)) {
    throw ConfigError(prefix + "request_timeout_s must be > 0");
  }
  if (settings.max_retries < 0) throw ConfigError(prefix + "max_retries must be >= 0");
  if (settings.max_concurrency <= 0) {
    throw ConfigError(prefix + "max_concurrency must be > 0");
  }
  if (settings.retry_backoff_s < 0.0) {
    throw ConfigError(prefix + "retry_backoff_s must be >= 0");
  }
}

JsonEndpoint::JsonEndpoint(EndpointSettings settings)
    : settings_(std::move(settings)) {
  auto split = split_base_url(settings_.base_url);
  scheme_host_port_ = std::move(split.scheme_host_port);
  path_prefix_ = std::move(split.path_prefix);
}

nlohmann::json JsonEndpoint::post(std::string_view route,
                                  const nlohmann::json& body,
                                  double* attempt_seconds) const {
  const std::string path = path_prefix_ + std::string(route);
  const std::string payload = body.dump();
  const auto timeout = std::chrono::duration<double>(settings_.request_timeout_s);

  httplib::Headers headers;
  if (settings_.api_key && !settings_.api_key->empty()) {
    headers.emplace("Authorization", "Bearer " + *settings_.api_key);
  }

  std::string last_failure;
  std::optional<std::pair<int, std::string>> last_status;
  for (int attempt = 0; attempt <= settings_.max_retries; ++attempt) {
    if (attempt > 0) {
      const double delay =
          settings_.retry_backoff_s * std::pow(2.0, attempt - 1) * jitter();
      std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    }
    httplib::Client client(scheme_host_port_);
    client.set_connection_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_read_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));
    client.set_write_timeout(
        std::chrono::duration_cast<std::chrono::microseconds>(timeout));

    const auto started = std::chrono::steady_clock::now();
    auto res = client.Post(path, headers, payload, "application/json");
    const std::chrono::duration<double> elapsed =
        std::chrono::steady_clock::now() - started;
    if (!res) {
      last_failure = httplib::to_string(res.error());
      last_status.reset();
      continue;
    }
    if (res->status >= 200 && res->status < 300) {
      if (attempt_seconds) *attempt_seconds = elapsed.count();
      try {
        return nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ProtocolError("response from " + path + " is not JSON: " + e.what());
      }
    }
    if (!retryable_status(res->status)) {
      throw EndpointError(res->status, res->body);
    }
    last_status.emplace(res->status, res->body);
  }
  if (last_status) throw EndpointError(last_status->first, last_status->second);
  throw TransportError("POST " + scheme_host_port_ + path + " failed after " +
                       std::to_string(settings_.max_retries + 1) +
                       " attempt(s): " + last_failure);
}

}  // namespace serval
