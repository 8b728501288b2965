// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

#include "serval/types.hpp"

namespace serval {

struct DescriptionKey {
  std::string model_id;
  std::string prompt_hash;
  std::string content_hash;

  std::string str() const;
  bool operator==(const DescriptionKey&) const = default;
};

DescriptionKey key_of(const Description& d);

/// Append-only JSONL store of Descriptions, one object per line. The
/// in-memory key index is rebuilt on open; puts are serialized and flushed
/// line by line, so the file stays readable if the process dies. A torn
/// final line is ignored on open.
class DescriptionCache {
 public:
  /// In-memory only.
  DescriptionCache() = default;
  /// Opens (or creates) the JSONL file at `path`.
  explicit DescriptionCache(const std::filesystem::path& path);

  DescriptionCache(const DescriptionCache&) = delete;
  DescriptionCache& operator=(const DescriptionCache&) = delete;

  std::optional<Description> find(const DescriptionKey& key) const;
  /// Appends unless the key is already present. Thread-safe.
  void put(const Description& description);

  std::size_t size() const;
  std::vector<Description> entries() const;

 private:
  mutable std::mutex mutex_;
  std::unordered_map<std::string, Description> index_;
  std::vector<std::string> order_;
  std::ofstream out_;
};

}  // namespace serval
