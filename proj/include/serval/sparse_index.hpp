// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "serval/types.hpp"

namespace serval {

struct Posting {
  std::uint32_t ordinal = 0;
  double weight = 0.0;
  bool operator==(const Posting&) const = default;
};

/// Term -> postings inverted index scored by the dot product of term
/// weights. Documents with no matching term are unreachable and never
/// ranked.
///
/// File layout: "SRVS" | u32 version (LE) | JSON {"doc_ids": [...],
/// "postings": {term: [[ordinal, weight], ...]}} | u32 CRC32 (LE).
class SparseIndex {
 public:
  static constexpr std::uint32_t kFormatVersion = 1;

  /// Throws ValidationError on size mismatch or duplicate ids. Documents
  /// with empty vectors keep their ordinal but appear in no posting list.
  static SparseIndex build(std::vector<DocId> doc_ids, const std::vector<SparseVector>& vectors);

  /// Top-min(k, matches) docs with score > 0, ordered by ranks_before().
  /// Query terms are accumulated in ascending term order.
  std::vector<ScoredDoc> search(const SparseVector& query, std::size_t k) const;

  void save(const std::filesystem::path& path) const;
  static SparseIndex load(const std::filesystem::path& path);

  std::size_t size() const { return doc_ids_.size(); }
  const std::vector<DocId>& doc_ids() const { return doc_ids_; }
  const std::map<std::string, std::vector<Posting>>& postings() const { return postings_; }

  bool operator==(const SparseIndex&) const = default;

 private:
  std::vector<DocId> doc_ids_;
  std::map<std::string, std::vector<Posting>> postings_;
};

}  // namespace serval
