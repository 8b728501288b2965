// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>

#include "serval/encoder.hpp"
#include "serval/types.hpp"

namespace serval {

/// (model_id, role, SHA-256 of instruction, SHA-256 of text).
struct EmbeddingKey {
  std::string model_id;
  Role role = Role::query;
  std::string instruction_hash;
  std::string text_hash;

  static EmbeddingKey make(const std::string& text, Role role, const EncoderConfig& cfg);
  std::string str() const;
};

/// Append-only JSONL store of raw endpoint vectors (before any client-side
/// normalization). Same file discipline as DescriptionCache.
class EmbeddingCache {
 public:
  EmbeddingCache() = default;
  explicit EmbeddingCache(const std::filesystem::path& path);

  EmbeddingCache(const EmbeddingCache&) = delete;
  EmbeddingCache& operator=(const EmbeddingCache&) = delete;

  std::optional<DenseVector> find_dense(const EmbeddingKey& key) const;
  std::optional<SparseVector> find_sparse(const EmbeddingKey& key) const;
  void put(const EmbeddingKey& key, const DenseVector& v);
  void put(const EmbeddingKey& key, const SparseVector& v);

  std::size_t size() const;

 private:
  struct Entry {
    std::optional<DenseVector> dense;
    std::optional<SparseVector> sparse;
  };
  void append(const EmbeddingKey& key, Entry entry);

  mutable std::mutex mutex_;
  std::unordered_map<std::string, Entry> index_;
  std::ofstream out_;
};

}  // namespace serval
