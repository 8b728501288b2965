// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace serval {

using DocId = std::string;
using QueryId = std::string;

struct ImageSource {
  std::filesystem::path path;
  bool operator==(const ImageSource&) const = default;
};

struct TextSource {
  std::string body;
  bool operator==(const TextSource&) const = default;
};

struct DocRef {
  DocId doc_id;
  std::variant<ImageSource, TextSource> source;

  bool is_image() const { return std::holds_alternative<ImageSource>(source); }
  bool operator==(const DocRef&) const = default;
};

struct Query {
  QueryId query_id;
  std::string text;
  bool operator==(const Query&) const = default;
};

/// Graded judgments. A document is relevant iff its grade is > 0.
struct Qrels {
  std::map<QueryId, std::map<DocId, int>> judgments;

  /// Judgments for one query, or an empty map.
  const std::map<DocId, int>& for_query(const QueryId& query_id) const;
  bool operator==(const Qrels&) const = default;
};

struct Description {
  DocId doc_id;
  std::string model_id;
  std::string prompt_hash;
  std::string content_hash;
  std::string text;
  std::int64_t token_count = 0;
  double gen_latency_s = 0.0;
  // Which tokenizer produced token_count ("server" when the endpoint
  // reported usage.completion_tokens).
  std::string tokenizer;

  bool operator==(const Description&) const = default;
};

struct DenseVector {
  std::vector<double> values;

  std::size_t dim() const { return values.size(); }
  bool operator==(const DenseVector&) const = default;
};

/// Term -> weight, only strictly positive weights are stored.
struct SparseVector {
  std::map<std::string, double> entries;

  /// Inserts a weight, dropping zero, negative and non-finite values.
  void set(const std::string& term, double weight);
  bool empty() const { return entries.empty(); }
  bool operator==(const SparseVector&) const = default;
};

struct ScoredDoc {
  DocId doc_id;
  double score = 0.0;
  bool operator==(const ScoredDoc&) const = default;
};

/// Strict ranking order: score descending, then doc_id ascending.
inline bool ranks_before(const ScoredDoc& a, const ScoredDoc& b) {
  if (a.score != b.score) return a.score > b.score;
  return a.doc_id < b.doc_id;
}

/// One query's ranking. Constructed through make(), which sorts and checks
/// the invariants, so every instance is ordered by ranks_before().
class RunList {
 public:
  RunList() = default;

  /// Throws ValidationError on duplicate doc ids or non-finite scores.
  static RunList make(QueryId query_id, std::vector<ScoredDoc> ranking);

  const QueryId& query_id() const { return query_id_; }
  const std::vector<ScoredDoc>& ranking() const { return ranking_; }
  std::size_t size() const { return ranking_.size(); }

  bool operator==(const RunList&) const = default;

 private:
  QueryId query_id_;
  std::vector<ScoredDoc> ranking_;
};

class MetricSpec {
 public:
  /// Defaults to k in {1, 5, 10}.
  MetricSpec();
  /// Throws ConfigError when empty or holding a non-positive cutoff.
  explicit MetricSpec(std::set<int> cutoffs);

  const std::set<int>& cutoffs() const { return cutoffs_; }
  int max_cutoff() const { return *cutoffs_.rbegin(); }
  /// "ndcg@1", "ndcg@5", ..., "recall@1", ...
  std::vector<std::string> metric_names() const;

 private:
  std::set<int> cutoffs_;
};

}  // namespace serval
