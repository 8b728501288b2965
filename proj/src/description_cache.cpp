// SPDX-License-Identifier: Apache-2.0
#include "serval/description_cache.hpp"

#include <nlohmann/json.hpp>

#include "serval/errors.hpp"

namespace serval {
namespace {

using nlohmann::json;

json to_json(const Description& d) {
  return json{{"doc_id", d.doc_id},
              {"model_id", d.model_id},
              {"prompt_hash", d.prompt_hash},
              {"content_hash", d.content_hash},
              {"text", d.text},
              {"token_count", d.token_count},
              {"gen_latency_s", d.gen_latency_s},
              {"tokenizer", d.tokenizer}};
}

Description from_json(const json& j) {
  Description d;
  d.doc_id = j.at("doc_id").get<std::string>();
  d.model_id = j.at("model_id").get<std::string>();
  d.prompt_hash = j.at("prompt_hash").get<std::string>();
  d.content_hash = j.at("content_hash").get<std::string>();
  d.text = j.at("text").get<std::string>();
  d.token_count = j.at("token_count").get<std::int64_t>();
  d.gen_latency_s = j.at("gen_latency_s").get<double>();
  d.tokenizer = j.value("tokenizer", std::string{});
  if (d.token_count < 0 || d.gen_latency_s < 0.0) {
    throw ParseError("negative token_count or gen_latency_s");
  }
  return d;
}

}  // namespace

std::string DescriptionKey::str() const {
  return model_id + '\n' + prompt_hash + '\n' + content_hash;
}

DescriptionKey key_of(const Description& d) {
  return {d.model_id, d.prompt_hash, d.content_hash};
}

DescriptionCache::DescriptionCache(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::size_t valid_bytes = 0;
  bool torn_tail = false;
  if (std::ifstream in{path, std::ios::binary}) {
    std::string line;
    std::size_t line_no = 0;
    std::size_t offset = 0;
    while (std::getline(in, line)) {
      ++line_no;
      const bool terminated = !in.eof();
      offset += line.size() + (terminated ? 1 : 0);
      if (line.empty()) {
        valid_bytes = offset;
        continue;
      }
      try {
        Description d = from_json(json::parse(line));
        auto key = key_of(d).str();
        if (index_.emplace(key, std::move(d)).second) order_.push_back(key);
        valid_bytes = offset;
      } catch (const std::exception& e) {
        if (!terminated) {
          torn_tail = true;
          break;
        }
        throw ParseError("description cache '" + path.string() + "' line " +
                         std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (torn_tail) std::filesystem::resize_file(path, valid_bytes);
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw ParseError("cannot open description cache '" + path.string() + "'");
}

std::optional<Description> DescriptionCache::find(const DescriptionKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key.str());
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

void DescriptionCache::put(const Description& description) {
  std::lock_guard lock(mutex_);
  auto key = key_of(description).str();
  if (!index_.emplace(key, description).second) return;
  order_.push_back(key);
  if (out_.is_open()) {
    out_ << to_json(description).dump() << '\n';
    out_.flush();
    if (!out_) throw Error("failed to append to description cache");
  }
}

std::size_t DescriptionCache::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

std::vector<Description> DescriptionCache::entries() const {
  std::lock_guard lock(mutex_);
  std::vector<Description> out;
  out.reserve(order_.size());
  for (const auto& key : order_) out.push_back(index_.at(key));
  return out;
}

}  // namespace serval
