// SPDX-License-Identifier: Apache-2.0
#include "mock_endpoints.hpp"

#include <httplib.h>
#include <openssl/evp.h>

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "serval/hashing.hpp"

namespace serval::testing {

using nlohmann::json;

std::string base64_decode(const std::string& text) {
  if (text.empty()) return {};
  std::string out(3 * (text.size() / 4) + 3, '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw std::runtime_error("invalid base64");
  std::size_t len = static_cast<std::size_t>(n);
  // EVP_DecodeBlock keeps the zero bytes that stand for '=' padding.
  if (text.size() >= 1 && text[text.size() - 1] == '=') --len;
  if (text.size() >= 2 && text[text.size() - 2] == '=') --len;
  out.resize(len);
  return out;
}

MockEndpoints::MockEndpoints() { start(0); }
MockEndpoints::MockEndpoints(int port) { start(port); }

MockEndpoints::~MockEndpoints() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

void MockEndpoints::start(int port) {
  server_ = std::make_unique<httplib::Server>();
  auto handle = [this](const std::string& route) {
    return [this, route](const httplib::Request& req, httplib::Response& res) {
      json body = json::parse(req.body, nullptr, false);
      if (body.is_discarded()) {
        res.status = 400;
        res.set_content(R"({"error":"body is not JSON"})", "application/json");
        return;
      }
      int status = enter(route, body);
      json answer;
      if (status == 200) {
        try {
          if (route == kChatRoute) {
            answer = chat(body, status);
          } else if (route == kDenseRoute) {
            answer = dense(body);
          } else {
            answer = sparse(body);
          }
        } catch (const std::exception& e) {
          status = 400;
          answer = {{"error", e.what()}};
        }
      } else {
        answer = {{"error", "scripted failure"}};
      }
      leave(route);
      res.status = status;
      res.set_content(answer.dump(), "application/json");
    };
  };
  server_->Post(kChatRoute, handle(kChatRoute));
  server_->Post(kDenseRoute, handle(kDenseRoute));
  server_->Post(kSparseRoute, handle(kSparseRoute));

  if (port == 0) {
    port_ = server_->bind_to_any_port("127.0.0.1");
  } else {
    port_ = server_->bind_to_port("127.0.0.1", port) ? port : -1;
  }
  if (port_ <= 0) throw std::runtime_error("mock endpoints: cannot bind");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

std::string MockEndpoints::base_url() const {
  return "http://127.0.0.1:" + std::to_string(port_);
}

void MockEndpoints::set_description(const std::string& image_sha256, const std::string& text) {
  std::lock_guard lock(mutex_);
  descriptions_[image_sha256] = text;
}

void MockEndpoints::set_dense(const std::string& text, std::vector<double> vector) {
  std::lock_guard lock(mutex_);
  dense_[text] = std::move(vector);
}

void MockEndpoints::set_sparse(const std::string& text, std::map<std::string, double> weights) {
  std::lock_guard lock(mutex_);
  sparse_[text] = std::move(weights);
}

void MockEndpoints::load_script(const std::filesystem::path& script,
                                const std::filesystem::path& base_dir) {
  std::ifstream in(script);
  if (!in) throw std::runtime_error("cannot open " + script.string());
  const json j = json::parse(in);
  if (auto it = j.find("descriptions"); it != j.end()) {
    for (const auto& [rel, text] : it->items()) {
      set_description(sha256_hex(read_file_bytes(base_dir / rel)), text.get<std::string>());
    }
  }
  if (auto it = j.find("dense"); it != j.end()) {
    for (const auto& [text, vec] : it->items()) set_dense(text, vec.get<std::vector<double>>());
  }
  if (auto it = j.find("sparse"); it != j.end()) {
    for (const auto& [text, w] : it->items()) {
      set_sparse(text, w.get<std::map<std::string, double>>());
    }
  }
}

void MockEndpoints::set_completion_tokens(std::optional<long> tokens) {
  std::lock_guard lock(mutex_);
  completion_tokens_ = tokens;
}

void MockEndpoints::set_default_dim(std::size_t dim) {
  std::lock_guard lock(mutex_);
  default_dim_ = dim;
}

void MockEndpoints::set_delay(std::chrono::milliseconds delay) {
  std::lock_guard lock(mutex_);
  delay_ = delay;
}

void MockEndpoints::fail_image(const std::string& image_sha256, int status) {
  std::lock_guard lock(mutex_);
  image_failures_[image_sha256] = status;
}

void MockEndpoints::fail_next(const std::string& route, int count, int status) {
  std::lock_guard lock(mutex_);
  pending_failures_[route] = {count, status};
}

std::size_t MockEndpoints::requests(const std::string& route) const {
  std::lock_guard lock(mutex_);
  auto it = stats_.find(route);
  return it == stats_.end() ? 0 : it->second.requests;
}

std::size_t MockEndpoints::total_requests() const {
  std::lock_guard lock(mutex_);
  std::size_t n = 0;
  for (const auto& [route, s] : stats_) n += s.requests;
  return n;
}

std::size_t MockEndpoints::peak_in_flight(const std::string& route) const {
  std::lock_guard lock(mutex_);
  auto it = stats_.find(route);
  return it == stats_.end() ? 0 : it->second.peak;
}

std::vector<json> MockEndpoints::bodies(const std::string& route) const {
  std::lock_guard lock(mutex_);
  auto it = stats_.find(route);
  return it == stats_.end() ? std::vector<json>{} : it->second.bodies;
}

void MockEndpoints::reset_counters() {
  std::lock_guard lock(mutex_);
  stats_.clear();
}

int MockEndpoints::enter(const std::string& route, const json& body) {
  std::chrono::milliseconds delay;
  int status = 200;
  {
    std::lock_guard lock(mutex_);
    RouteStats& s = stats_[route];
    ++s.requests;
    ++s.in_flight;
    s.peak = std::max(s.peak, s.in_flight);
    s.bodies.push_back(body);
    delay = delay_;
    if (auto it = pending_failures_.find(route); it != pending_failures_.end() && it->second.first > 0) {
      --it->second.first;
      status = it->second.second;
    }
  }
  if (delay.count() > 0) std::this_thread::sleep_for(delay);
  return status;
}

void MockEndpoints::leave(const std::string& route) {
  std::lock_guard lock(mutex_);
  --stats_[route].in_flight;
}

json MockEndpoints::chat(const json& body, int& status) {
  std::string url;
  for (const auto& part : body.at("messages").at(0).at("content")) {
    if (part.at("type") == "image_url") url = part.at("image_url").at("url").get<std::string>();
  }
  const auto comma = url.find(',');
  if (url.rfind("data:image/", 0) != 0 || comma == std::string::npos) {
    throw std::runtime_error("missing image data URI");
  }
  const std::string sha = sha256_hex(base64_decode(url.substr(comma + 1)));

  std::string text;
  std::optional<long> tokens;
  {
    std::lock_guard lock(mutex_);
    if (auto it = image_failures_.find(sha); it != image_failures_.end()) {
      status = it->second;
      return {{"error", "scripted failure"}};
    }
    auto it = descriptions_.find(sha);
    text = it != descriptions_.end() ? it->second : "Document " + sha.substr(0, 12) + ".";
    tokens = completion_tokens_;
  }
  json answer = {{"object", "chat.completion"},
                 {"model", body.value("model", "")},
                 {"choices", json::array({{{"index", 0},
                                           {"message", {{"role", "assistant"}, {"content", text}}},
                                           {"finish_reason", "stop"}}})}};
  if (tokens) answer["usage"] = {{"completion_tokens", *tokens}};
  return answer;
}

json MockEndpoints::dense(const json& body) {
  json data = json::array();
  std::size_t i = 0;
  for (const auto& input : body.at("input")) {
    const std::string text = input.get<std::string>();
    std::vector<double> vec;
    {
      std::lock_guard lock(mutex_);
      if (auto it = dense_.find(text); it != dense_.end()) {
        vec = it->second;
      } else {
        const std::string h = sha256_hex(text);
        for (std::size_t d = 0; d < default_dim_; ++d) {
          const int byte = std::stoi(h.substr((2 * d) % 64, 2), nullptr, 16);
          vec.push_back(0.05 + byte / 255.0);
        }
      }
    }
    data.push_back({{"object", "embedding"}, {"index", i++}, {"embedding", vec}});
  }
  // Reversed on purpose: clients must place vectors by "index".
  std::reverse(data.begin(), data.end());
  return {{"object", "list"}, {"data", data}};
}

json MockEndpoints::sparse(const json& body) {
  json out = json::array();
  for (const auto& input : body.at("input")) {
    const std::string text = input.get<std::string>();
    std::map<std::string, double> weights;
    bool scripted = false;
    {
      std::lock_guard lock(mutex_);
      if (auto it = sparse_.find(text); it != sparse_.end()) {
        weights = it->second;
        scripted = true;
      }
    }
    if (!scripted) {
      std::istringstream words(text);
      std::string w;
      while (words >> w) weights[w] += 1.0;
    }
    out.push_back(weights.empty() ? json::object() : json(weights));
  }
  return {{"sparse", out}};
}

}  // namespace serval::testing
