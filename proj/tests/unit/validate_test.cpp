// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include "serval/errors.hpp"
#include "serval/validate.hpp"
#include "test_util.hpp"

namespace serval {
namespace {

TEST(Validate, WellFormedInputGivesEmptyReport) {
  const std::vector<DocRef> docs = {{"d1", TextSource{"a"}}, {"d2", TextSource{"b"}}};
  const std::vector<Query> queries = {{"q1", "x"}};
  Qrels qrels;
  qrels.judgments["q1"] = {{"d1", 1}, {"d2", 0}};
  EXPECT_TRUE(validate_corpus(docs, queries, qrels).empty());
}

TEST(Validate, DuplicateDocIdIsAnError) {
  const std::vector<DocRef> docs = {{"d1", TextSource{"a"}}, {"d1", TextSource{"b"}}};
  EXPECT_THROW(validate_corpus(docs, {}, {}), ValidationError);
}

TEST(Validate, DuplicateQueryIdIsAnError) {
  const std::vector<Query> queries = {{"q1", "x"}, {"q1", "y"}};
  EXPECT_THROW(validate_corpus({}, queries, {}), ValidationError);
}

TEST(Validate, UnknownJudgedDocIsAWarning) {
  const std::vector<DocRef> docs = {{"d1", TextSource{"a"}}};
  const std::vector<Query> queries = {{"q1", "x"}};
  Qrels qrels;
  qrels.judgments["q1"] = {{"d1", 1}, {"d9", 1}};
  const auto report = validate_corpus(docs, queries, qrels);
  ASSERT_EQ(report.unknown_judgments.size(), 1u);
  EXPECT_EQ(report.unknown_judgments[0], std::make_pair(QueryId("q1"), DocId("d9")));
}

TEST(Validate, UnreadableImageIsReported) {
  testing::TempDir tmp;
  const std::vector<DocRef> docs = {{"d1", ImageSource{tmp / "missing.png"}}};
  const auto report = validate_corpus(docs, {}, {});
  ASSERT_EQ(report.unreadable_images.size(), 1u);
  EXPECT_EQ(report.unreadable_images[0].first, "d1");
}

}  // namespace
}  // namespace serval
