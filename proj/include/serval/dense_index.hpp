// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "serval/types.hpp"

namespace serval {

enum class Similarity : std::uint8_t { cosine = 0, dot = 1 };

std::string to_string(Similarity similarity);
/// Throws ConfigError on anything but "cosine" / "dot".
Similarity parse_similarity(const std::string& name);

/// Exhaustive dense index. Rows are stored as f32 (normalized first in
/// cosine mode); scores accumulate in double.
///
/// File layout (little-endian):
///   "SRVD" | u32 version | u32 dim | u64 count | u8 similarity
///   | count*dim f32 row-major | JSON array of doc ids | u32 CRC32
/// where the CRC covers every preceding byte.
class DenseIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Throws ValidationError on empty input, size or dimension mismatch,
  /// duplicate ids, non-finite values or zero rows in cosine mode.
  static DenseIndex build(std::vector<DocId> doc_ids, const std::vector<DenseVector>& vectors,
                          Similarity similarity);

  /// Top-min(k, size()) docs ordered by ranks_before(). Every doc is scored;
  /// the query is renormalized in cosine mode.
  std::vector<ScoredDoc> search(const DenseVector& query, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  /// Throws IndexFormatError on truncation, checksum or version mismatch.
  static DenseIndex load(const std::filesystem::path& path);

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return doc_ids_.size(); }
  Similarity similarity() const { return similarity_; }
  const std::vector<DocId>& doc_ids() const { return doc_ids_; }
  std::span<const float> row(std::size_t i) const {
    return {matrix_.data() + i * dim_, dim_};
  }

  bool operator==(const DenseIndex&) const = default;

 private:
  std::size_t dim_ = 0;
  Similarity similarity_ = Similarity::cosine;
  std::vector<DocId> doc_ids_;
  std::vector<float> matrix_;
};

}  // namespace serval
