// SPDX-License-Identifier: Apache-2.0
#include "serval/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <unordered_map>

#include "serval/errors.hpp"

namespace serval {
namespace {

int grade_of(const std::map<DocId, int>& judgments, const DocId& doc) {
  auto it = judgments.find(doc);
  return it == judgments.end() ? 0 : it->second;
}

bool has_positive(const std::map<DocId, int>& judgments) {
  return std::any_of(judgments.begin(), judgments.end(),
                     [](const auto& j) { return j.second > 0; });
}

}  // namespace

double ndcg_at_k(const RunList& ranking, const std::map<DocId, int>& judgments, int k) {
  if (k <= 0) return 0.0;
  std::vector<int> ideal;
  for (const auto& [doc, grade] : judgments) {
    if (grade > 0) ideal.push_back(grade);
  }
  if (ideal.empty()) return 0.0;
  std::sort(ideal.begin(), ideal.end(), std::greater<>());

  const auto cutoff = static_cast<std::size_t>(k);
  double idcg = 0.0;
  for (std::size_t i = 0; i < std::min(cutoff, ideal.size()); ++i) {
    idcg += ideal[i] / std::log2(static_cast<double>(i) + 2.0);
  }
  double dcg = 0.0;
  const auto& docs = ranking.ranking();
  for (std::size_t i = 0; i < std::min(cutoff, docs.size()); ++i) {
    const int grade = grade_of(judgments, docs[i].doc_id);
    if (grade > 0) dcg += grade / std::log2(static_cast<double>(i) + 2.0);
  }
  return dcg / idcg;
}

double recall_at_k(const RunList& ranking, const std::map<DocId, int>& judgments, int k) {
  if (k <= 0) return 0.0;
  std::size_t relevant = 0;
  for (const auto& [doc, grade] : judgments) {
    if (grade > 0) ++relevant;
  }
  if (relevant == 0) return 0.0;
  std::size_t found = 0;
  const auto& docs = ranking.ranking();
  for (std::size_t i = 0; i < std::min(static_cast<std::size_t>(k), docs.size()); ++i) {
    if (grade_of(judgments, docs[i].doc_id) > 0) ++found;
  }
  return static_cast<double>(found) / static_cast<double>(relevant);
}

DatasetMetrics evaluate_run(const std::vector<RunList>& run, const Qrels& qrels,
                            const MetricSpec& spec, MissingQueryPolicy missing) {
  std::unordered_map<std::string_view, const RunList*> by_query;
  for (const auto& ranking : run) by_query.emplace(ranking.query_id(), &ranking);

  const RunList empty_ranking;
  const auto names = spec.metric_names();
  DatasetMetrics out;
  for (const auto& [qid, judgments] : qrels.judgments) {
    if (!has_positive(judgments)) {
      ++out.skipped_queries;
      continue;
    }
    auto it = by_query.find(qid);
    if (it == by_query.end() && missing == MissingQueryPolicy::skip) {
      ++out.skipped_queries;
      continue;
    }
    const RunList& ranking = it == by_query.end() ? empty_ranking : *it->second;
    PerQueryMetrics pq{qid, {}};
    for (int k : spec.cutoffs()) {
      pq.values["ndcg@" + std::to_string(k)] = ndcg_at_k(ranking, judgments, k);
      pq.values["recall@" + std::to_string(k)] = recall_at_k(ranking, judgments, k);
    }
    out.per_query.push_back(std::move(pq));
  }
  if (out.per_query.empty()) {
    throw EmptyInputError("no evaluable queries: every judged query lacks a positive judgment");
  }
  for (const auto& name : names) {
    double sum = 0.0;
    for (const auto& pq : out.per_query) sum += pq.values.at(name);
    out.values[name] = sum / static_cast<double>(out.per_query.size());
  }
  return out;
}

double macro_average(const std::map<std::string, double>& per_dataset) {
  if (per_dataset.empty()) throw EmptyInputError("macro_average: no datasets");
  double sum = 0.0;
  for (const auto& [name, value] : per_dataset) sum += value;
  return sum / static_cast<double>(per_dataset.size());
}

double display_percent(double value) {
  // The epsilon keeps exact halves like 0.6345 from rounding down through
  // binary representation error.
  return std::floor(value * 1000.0 + 0.5 + 1e-9) / 10.0;
}

std::string format_percent(double value) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", display_percent(value));
  return buf;
}

}  // namespace serval
