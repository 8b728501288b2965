// SPDX-License-Identifier: Apache-2.0
#include "serval/types.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_set>

#include "serval/errors.hpp"

namespace serval {

const std::map<DocId, int>& Qrels::for_query(const QueryId& query_id) const {
  static const std::map<DocId, int> kEmpty;
  auto it = judgments.find(query_id);
  return it == judgments.end() ? kEmpty : it->second;
}

void SparseVector::set(const std::string& term, double weight) {
  if (!std::isfinite(weight) || weight <= 0.0) {
    entries.erase(term);
    return;
  }
  entries[term] = weight;
}

RunList RunList::make(QueryId query_id, std::vector<ScoredDoc> ranking) {
  std::unordered_set<std::string_view> seen;
  seen.reserve(ranking.size());
  for (const auto& entry : ranking) {
    if (!std::isfinite(entry.score)) {
      throw ValidationError("non-finite score for doc '" + entry.doc_id +
                            "' in ranking of query '" + query_id + "'");
    }
    if (!seen.insert(entry.doc_id).second) {
      throw ValidationError("duplicate doc '" + entry.doc_id +
                            "' in ranking of query '" + query_id + "'");
    }
  }
  std::sort(ranking.begin(), ranking.end(), ranks_before);
  RunList run;
  run.query_id_ = std::move(query_id);
  run.ranking_ = std::move(ranking);
  return run;
}

MetricSpec::MetricSpec() : cutoffs_{1, 5, 10} {}

MetricSpec::MetricSpec(std::set<int> cutoffs) : cutoffs_(std::move(cutoffs)) {
  if (cutoffs_.empty()) throw ConfigError("metric cutoffs must not be empty");
  if (*cutoffs_.begin() <= 0) {
    throw ConfigError("metric cutoffs must be positive");
  }
}

std::vector<std::string> MetricSpec::metric_names() const {
  std::vector<std::string> names;
  for (int k : cutoffs_) names.push_back("ndcg@" + std::to_string(k));
  for (int k : cutoffs_) names.push_back("recall@" + std::to_string(k));
  return names;
}

}  // namespace serval
