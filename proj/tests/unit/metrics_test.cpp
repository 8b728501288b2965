// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "serval/errors.hpp"
#include "serval/metrics.hpp"

namespace serval {
namespace {

// Ranking with descending synthetic scores so RunList keeps the given order.
RunList ranked(const std::vector<std::string>& ids, const QueryId& qid = "q") {
  std::vector<ScoredDoc> docs;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    docs.push_back({ids[i], static_cast<double>(ids.size() - i)});
  }
  return RunList::make(qid, docs);
}

TEST(Ndcg, PerfectSingleRelevant) {
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked({"d1", "d2"}), {{"d1", 1}}, 5), 1.0);
}

TEST(Ndcg, SingleRelevantSecond) {
  const double expected = oracle::ndcg({"d2", "d1"}, {{"d1", 1}}, 5);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked({"d2", "d1"}), {{"d1", 1}}, 5), expected);
  EXPECT_NEAR(expected, 0.63093, 5e-6);
}

TEST(Ndcg, GradedSwap) {
  const std::map<DocId, int> judged = {{"d1", 3}, {"d2", 1}};
  const double expected = oracle::ndcg({"d2", "d1"}, judged, 2);
  EXPECT_DOUBLE_EQ(ndcg_at_k(ranked({"d2", "d1"}), judged, 2), expected);
  EXPECT_NEAR(expected, 0.79671, 5e-6);
}

TEST(Ndcg, NoPositiveJudgmentIsZero) {
  EXPECT_EQ(ndcg_at_k(ranked({"d1"}), {{"d1", 0}}, 5), 0.0);
}

TEST(Recall, Examples) {
  EXPECT_DOUBLE_EQ(recall_at_k(ranked({"d1", "d2"}), {{"d1", 1}}, 1), 1.0);
  EXPECT_DOUBLE_EQ(
      recall_at_k(ranked({"d1", "x1", "x2", "x3", "x4", "d2"}), {{"d1", 1}, {"d2", 1}}, 5), 0.5);
}

TEST(Recall, FourRelevantMatchesSetOracle) {
  std::mt19937_64 rng(41);
  std::vector<std::string> ids;
  for (int i = 0; i < 15; ++i) ids.push_back("d" + std::to_string(i));
  const std::map<DocId, int> judged = {{"d1", 1}, {"d4", 2}, {"d9", 1}, {"d13", 3}};
  for (int t = 0; t < 50; ++t) {
    std::shuffle(ids.begin(), ids.end(), rng);
    for (int k : {1, 5, 10}) {
      EXPECT_DOUBLE_EQ(recall_at_k(ranked(ids), judged, k), oracle::recall(ids, judged, k));
    }
  }
}

struct Instance {
  std::vector<std::string> ranking;
  std::map<DocId, int> judged;
};

Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> n_docs(1, 20), grade(0, 3), coin(0, 2);
  const int n = n_docs(rng);
  Instance inst;
  for (int i = 0; i < n; ++i) {
    const std::string id = "d" + std::to_string(i);
    if (coin(rng) != 0) inst.ranking.push_back(id);
    if (coin(rng) != 0) inst.judged[id] = grade(rng);
  }
  std::shuffle(inst.ranking.begin(), inst.ranking.end(), rng);
  return inst;
}

TEST(Metrics, RandomInstancesMatchBruteForce) {
  std::mt19937_64 rng(1234);
  for (int t = 0; t < 1000; ++t) {
    const Instance inst = random_instance(rng);
    const RunList run = ranked(inst.ranking);
    for (int k : {1, 5, 10}) {
      const double n = ndcg_at_k(run, inst.judged, k);
      const double r = recall_at_k(run, inst.judged, k);
      EXPECT_NEAR(n, oracle::ndcg(inst.ranking, inst.judged, k), 1e-12);
      EXPECT_NEAR(r, oracle::recall(inst.ranking, inst.judged, k), 1e-12);
      EXPECT_GE(n, 0.0);
      EXPECT_LE(n, 1.0 + 1e-12);
      EXPECT_GE(r, 0.0);
      EXPECT_LE(r, 1.0);
    }
  }
}

TEST(Metrics, SwappingRelevantUpwardNeverHurts) {
  std::mt19937_64 rng(99);
  for (int t = 0; t < 500; ++t) {
    Instance inst = random_instance(rng);
    for (std::size_t i = 1; i < inst.ranking.size(); ++i) {
      const int below = inst.judged.count(inst.ranking[i]) ? inst.judged[inst.ranking[i]] : 0;
      const int above =
          inst.judged.count(inst.ranking[i - 1]) ? inst.judged[inst.ranking[i - 1]] : 0;
      if (below <= above) continue;
      auto better = inst.ranking;
      std::swap(better[i], better[i - 1]);
      for (int k : {1, 5, 10}) {
        EXPECT_GE(ndcg_at_k(ranked(better), inst.judged, k) + 1e-15,
                  ndcg_at_k(ranked(inst.ranking), inst.judged, k));
        EXPECT_GE(recall_at_k(ranked(better), inst.judged, k),
                  recall_at_k(ranked(inst.ranking), inst.judged, k));
      }
    }
  }
}

TEST(Metrics, RecallNonDecreasingInK) {
  std::mt19937_64 rng(77);
  for (int t = 0; t < 300; ++t) {
    const Instance inst = random_instance(rng);
    double prev = 0.0;
    for (int k = 1; k <= 21; ++k) {
      const double r = recall_at_k(ranked(inst.ranking), inst.judged, k);
      EXPECT_GE(r, prev);
      prev = r;
    }
  }
}

TEST(Metrics, IdealIsIndependentOfJudgmentOrder) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 200; ++t) {
    const Instance inst = random_instance(rng);
    std::vector<std::pair<DocId, int>> entries(inst.judged.begin(), inst.judged.end());
    std::shuffle(entries.begin(), entries.end(), rng);
    std::map<DocId, int> rebuilt;
    for (const auto& [d, g] : entries) rebuilt.emplace(d, g);
    for (int k : {1, 5, 10}) {
      EXPECT_EQ(ndcg_at_k(ranked(inst.ranking), rebuilt, k),
                ndcg_at_k(ranked(inst.ranking), inst.judged, k));
    }
  }
}

TEST(EvaluateRun, MeanOverQueries) {
  Qrels qrels;
  qrels.judgments["q1"] = {{"d1", 1}};
  qrels.judgments["q2"] = {{"d9", 1}};
  const std::vector<RunList> run = {ranked({"d1"}, "q1"), ranked({"d1"}, "q2")};
  const auto m = evaluate_run(run, qrels, MetricSpec({5}));
  EXPECT_DOUBLE_EQ(m.values.at("ndcg@5"), 0.5);
  EXPECT_EQ(m.per_query.size(), 2u);
}

TEST(EvaluateRun, MissingQueryPolicy) {
  Qrels qrels;
  qrels.judgments["q1"] = {{"d1", 1}};
  qrels.judgments["q2"] = {{"d1", 1}};
  qrels.judgments["q3"] = {{"d1", 0}};
  const std::vector<RunList> run = {ranked({"d1"}, "q1")};
  const auto zero = evaluate_run(run, qrels, MetricSpec({1}));
  EXPECT_DOUBLE_EQ(zero.values.at("recall@1"), 0.5);
  EXPECT_EQ(zero.skipped_queries, 1u);
  const auto skip = evaluate_run(run, qrels, MetricSpec({1}), MissingQueryPolicy::skip);
  EXPECT_DOUBLE_EQ(skip.values.at("recall@1"), 1.0);
  EXPECT_EQ(skip.skipped_queries, 2u);
}

TEST(EvaluateRun, NothingEvaluableIsAnError) {
  Qrels qrels;
  qrels.judgments["q1"] = {{"d1", 0}};
  EXPECT_THROW(evaluate_run({ranked({"d1"}, "q1")}, qrels, MetricSpec()), EmptyInputError);
}

TEST(MacroAverage, Examples) {
  EXPECT_DOUBLE_EQ(macro_average({{"A", 0.6}, {"B", 0.8}}), 0.7);
  EXPECT_DOUBLE_EQ(macro_average({{"A", 0.42}}), 0.42);
  EXPECT_THROW(macro_average({}), EmptyInputError);
}

TEST(MacroAverage, ReproducesPublishedAverage) {
  const std::vector<double> row = {70.7, 69.7, 69.4, 59.0, 65.1, 63.0, 59.0, 59.5, 55.5};
  std::map<std::string, double> per_dataset;
  for (std::size_t i = 0; i < row.size(); ++i) per_dataset["ds" + std::to_string(i)] = row[i] / 100;
  EXPECT_EQ(display_percent(macro_average(per_dataset)), 63.4);
  EXPECT_EQ(format_percent(macro_average(per_dataset)), "63.4");
}

TEST(DisplayPercent, RoundsHalfUp) {
  EXPECT_EQ(format_percent(0.63449), "63.4");
  EXPECT_EQ(format_percent(0.6345), "63.5");
  EXPECT_EQ(format_percent(1.0), "100.0");
  EXPECT_EQ(format_percent(0.0), "0.0");
}

TEST(MetricSpec, Validates) {
  EXPECT_EQ(MetricSpec().metric_names(),
            (std::vector<std::string>{"ndcg@1", "ndcg@5", "ndcg@10", "recall@1", "recall@5",
                                      "recall@10"}));
  EXPECT_THROW(MetricSpec(std::set<int>{}), ConfigError);
  EXPECT_THROW(MetricSpec({0, 5}), ConfigError);
}

}  // namespace
}  // namespace serval
