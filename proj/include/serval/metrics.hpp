// SPDX-License-Identifier: Apache-2.0
//
// nDCG@k and Recall@k with trec_eval `ndcg_cut` conventions:
//   DCG@k  = sum_{i=1..min(k,|ranking|)} rel(doc_i) / log2(i + 1)
//   IDCG@k = the same sum over judged grades sorted descending
//   Recall@k = |relevant in top k| / |relevant|,  relevant <=> rel > 0
// Unjudged documents have rel 0.
#pragma once

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "serval/types.hpp"

namespace serval {

/// 0 when the judgments hold no positive grade.
double ndcg_at_k(const RunList& ranking, const std::map<DocId, int>& judgments, int k);
double recall_at_k(const RunList& ranking, const std::map<DocId, int>& judgments, int k);

/// What to do with a judged query that has no ranking in the run.
enum class MissingQueryPolicy {
  zero,  ///< scores 0 on every metric (default)
  skip,  ///< excluded from the mean like unjudged queries
};

struct PerQueryMetrics {
  QueryId query_id;
  std::map<std::string, double> values;
};

struct DatasetMetrics {
  /// Arithmetic mean over evaluated queries.
  std::map<std::string, double> values;
  std::vector<PerQueryMetrics> per_query;
  /// Queries with no positive judgment, plus missing ones under skip.
  std::size_t skipped_queries = 0;
};

/// Evaluates every query in `qrels` that has at least one positive
/// judgment. Throws EmptyInputError if none remain.
DatasetMetrics evaluate_run(const std::vector<RunList>& run, const Qrels& qrels,
                            const MetricSpec& spec,
                            MissingQueryPolicy missing = MissingQueryPolicy::zero);

/// Unweighted mean across datasets. Throws EmptyInputError on an empty map.
double macro_average(const std::map<std::string, double>& per_dataset);

/// Half-up rounding of value*100 to one decimal, e.g. 0.63433 -> 63.4.
double display_percent(double value);
/// display_percent() rendered with exactly one decimal.
std::string format_percent(double value);

}  // namespace serval
