// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "serval/errors.hpp"
#include "serval/report.hpp"

namespace serval {
namespace {

RunReport row(const std::string& vlm, const std::string& enc,
              const std::vector<std::pair<std::string, double>>& ndcg5) {
  std::vector<std::pair<std::string, DatasetMetrics>> datasets;
  for (const auto& [name, value] : ndcg5) {
    DatasetMetrics m;
    m.values["ndcg@5"] = value;
    datasets.emplace_back(name, m);
  }
  return make_run_report(vlm, enc, datasets);
}

TEST(Report, SingleRow) {
  const auto table = render_table({row("Qwen", "inf-7B", {{"ESG", 0.707}, {"Bio", 0.6945}})}, "ndcg@5");
  EXPECT_EQ(table,
            "ndcg@5\n"
            "VLM   Text Encoder   ESG   Bio   AVG\n"
            "------------------------------------\n"
            "Qwen  inf-7B        70.7  69.5  70.1\n");
}

TEST(Report, RowsAreSortedByVlmThenEncoder) {
  const auto table = render_table({row("b", "x", {{"D", 0.5}}), row("a", "y", {{"D", 0.25}}),
                                   row("a", "x", {{"D", 1.0}})},
                                  "ndcg@5");
  EXPECT_EQ(table,
            "ndcg@5\n"
            "VLM  Text Encoder      D    AVG\n"
            "-------------------------------\n"
            "a    x             100.0  100.0\n"
            "a    y              25.0   25.0\n"
            "b    x              50.0   50.0\n");
}

TEST(Report, MissingCellIsDash) {
  const auto table =
      render_table({row("v", "e1", {{"A", 0.1}, {"B", 0.2}}), row("v", "e2", {{"A", 0.3}})}, "ndcg@5");
  EXPECT_EQ(table,
            "ndcg@5\n"
            "VLM  Text Encoder     A     B   AVG\n"
            "-----------------------------------\n"
            "v    e1            10.0  20.0  15.0\n"
            "v    e2            30.0     -     -\n");
}

TEST(Report, MacroIsUnweightedMean) {
  const auto r = row("v", "e", {{"A", 0.6}, {"B", 0.8}});
  EXPECT_DOUBLE_EQ(r.macro.at("ndcg@5"), 0.7);
}

TEST(Report, JsonRoundTripAndKeyOrder) {
  DatasetMetrics m;
  m.values = {{"recall@10", 0.9}, {"ndcg@10", 0.5}, {"ndcg@5", 0.4}, {"recall@1", 0.2}};
  m.skipped_queries = 2;
  const auto r = make_run_report("v", "e", {{"A", m}});
  const auto j = to_json(r);
  std::vector<std::string> keys;
  for (const auto& [k, v] : j["datasets"]["A"].items()) keys.push_back(k);
  EXPECT_EQ(keys, (std::vector<std::string>{"ndcg@5", "ndcg@10", "recall@1", "recall@10",
                                            "skipped_queries"}));
  const auto back = run_report_from_json(nlohmann::json::parse(j.dump()));
  EXPECT_EQ(back.vlm, "v");
  EXPECT_EQ(back.datasets.at(0).values, m.values);
  EXPECT_EQ(back.datasets.at(0).skipped_queries, 2u);
  EXPECT_EQ(back.macro, r.macro);
}

TEST(Report, DuplicateDatasetIsRejected) {
  DatasetMetrics m;
  m.values["ndcg@5"] = 0.1;
  EXPECT_THROW(make_run_report("v", "e", {{"A", m}, {"A", m}}), ValidationError);
}

TEST(Report, TablesCoverEveryMetricInOrder) {
  DatasetMetrics m;
  m.values = {{"recall@5", 0.9}, {"ndcg@5", 0.5}, {"ndcg@1", 0.4}};
  const auto text = render_tables({make_run_report("v", "e", {{"A", m}})});
  const auto a = text.find("ndcg@1\n"), b = text.find("ndcg@5\n"), c = text.find("recall@5\n");
  ASSERT_NE(a, std::string::npos);
  EXPECT_LT(a, b);
  EXPECT_LT(b, c);
}

}  // namespace
}  // namespace serval
