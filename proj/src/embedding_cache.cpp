// SPDX-License-Identifier: Apache-2.0
#include "serval/embedding_cache.hpp"

#include <nlohmann/json.hpp>

#include "serval/errors.hpp"
#include "serval/hashing.hpp"

namespace serval {
namespace {

using nlohmann::json;

}  // namespace

EmbeddingKey EmbeddingKey::make(const std::string& text, Role role,
                                const EncoderConfig& cfg) {
  const auto& instruction =
      role == Role::query ? cfg.query_instruction : cfg.doc_instruction;
  return {cfg.model_id, role, sha256_hex(instruction.value_or("")), sha256_hex(text)};
}

std::string EmbeddingKey::str() const {
  return model_id + '\n' + to_string(role) + '\n' + instruction_hash + '\n' + text_hash;
}

EmbeddingCache::EmbeddingCache(const std::filesystem::path& path) {
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
        const json j = json::parse(line);
        EmbeddingKey key{j.at("model_id").get<std::string>(),
                         parse_role(j.at("role").get<std::string>()),
                         j.at("instruction_hash").get<std::string>(),
                         j.at("text_hash").get<std::string>()};
        Entry& entry = index_[key.str()];
        if (auto d = j.find("dense"); d != j.end()) {
          entry.dense = DenseVector{d->get<std::vector<double>>()};
        } else {
          SparseVector v;
          for (const auto& [term, weight] : j.at("sparse").items()) {
            v.set(term, weight.get<double>());
          }
          entry.sparse = std::move(v);
        }
        valid_bytes = offset;
      } catch (const std::exception& e) {
        if (!terminated) {
          torn_tail = true;
          break;
        }
        throw ParseError("embedding cache '" + path.string() + "' line " +
                         std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (torn_tail) std::filesystem::resize_file(path, valid_bytes);
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw ParseError("cannot open embedding cache '" + path.string() + "'");
}

std::optional<DenseVector> EmbeddingCache::find_dense(const EmbeddingKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key.str());
  if (it == index_.end()) return std::nullopt;
  return it->second.dense;
}

std::optional<SparseVector> EmbeddingCache::find_sparse(const EmbeddingKey& key) const {
  std::lock_guard lock(mutex_);
  auto it = index_.find(key.str());
  if (it == index_.end()) return std::nullopt;
  return it->second.sparse;
}

void EmbeddingCache::put(const EmbeddingKey& key, const DenseVector& v) {
  append(key, Entry{v, std::nullopt});
}

void EmbeddingCache::put(const EmbeddingKey& key, const SparseVector& v) {
  append(key, Entry{std::nullopt, v});
}

void EmbeddingCache::append(const EmbeddingKey& key, Entry entry) {
  std::lock_guard lock(mutex_);
  // One entry may hold a dense and a sparse vector for the same text.
  Entry& slot = index_[key.str()];
  if ((entry.dense && slot.dense) || (entry.sparse && slot.sparse)) return;
  if (out_.is_open()) {
    json j = {{"model_id", key.model_id},
              {"role", to_string(key.role)},
              {"instruction_hash", key.instruction_hash},
              {"text_hash", key.text_hash}};
    if (entry.dense) {
      j["dense"] = entry.dense->values;
    } else {
      j["sparse"] = entry.sparse->entries;
    }
    out_ << j.dump() << '\n';
    out_.flush();
    if (!out_) throw Error("failed to append to embedding cache");
  }
  if (entry.dense) slot.dense = std::move(entry.dense);
  if (entry.sparse) slot.sparse = std::move(entry.sparse);
}

std::size_t EmbeddingCache::size() const {
  std::lock_guard lock(mutex_);
  return index_.size();
}

}  // namespace serval
