// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <random>

#include "oracles.hpp"
#include "serval/errors.hpp"
#include "serval/sparse_index.hpp"
#include "test_util.hpp"

namespace serval {
namespace {

SparseVector sv(std::map<std::string, double> m) {
  SparseVector v;
  for (const auto& [t, w] : m) v.set(t, w);
  return v;
}

SparseVector random_vector(std::mt19937_64& rng, int vocab, int max_terms) {
  std::uniform_int_distribution<int> term(0, vocab - 1), count(0, max_terms);
  std::uniform_real_distribution<double> weight(0.01, 3.0);
  SparseVector v;
  for (int i = count(rng); i > 0; --i) v.set("t" + std::to_string(term(rng)), weight(rng));
  return v;
}

TEST(SparseIndex, SingleDocPostings) {
  const auto index = SparseIndex::build({"d0"}, {sv({{"a", 2.0}})});
  ASSERT_EQ(index.postings().size(), 1u);
  EXPECT_EQ(index.postings().at("a"), (std::vector<Posting>{{0, 2.0}}));
}

TEST(SparseIndex, EmptyVectorKeepsOrdinal) {
  const auto index = SparseIndex::build({"d0", "d1", "d2"}, {sv({{"a", 1}}), sv({}), sv({{"a", 3}})});
  EXPECT_EQ(index.size(), 3u);
  EXPECT_EQ(index.postings().at("a"), (std::vector<Posting>{{0, 1.0}, {2, 3.0}}));
}

TEST(SparseIndex, NonMatchingDocsAreExcluded) {
  const auto index = SparseIndex::build({"doc0", "doc1"}, {sv({{"a", 2.0}}), sv({{"b", 5.0}})});
  EXPECT_EQ(index.search(sv({{"a", 1.0}}), 2), (std::vector<ScoredDoc>{{"doc0", 2.0}}));
  EXPECT_TRUE(index.search(sv({}), 2).empty());
}

TEST(SparseIndex, RejectsDuplicatesAndSizeMismatch) {
  EXPECT_THROW(SparseIndex::build({"a", "a"}, {sv({}), sv({})}), ValidationError);
  EXPECT_THROW(SparseIndex::build({"a"}, {}), ValidationError);
}

TEST(SparseIndex, MatchesMaterializedOracle) {
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<std::string> ids;
    std::vector<SparseVector> docs;
    for (int i = 0; i < 40; ++i) {
      ids.push_back("d" + std::to_string(i));
      docs.push_back(random_vector(rng, 30, 8));
    }
    const auto index = SparseIndex::build(ids, docs);
    for (int q = 0; q < 5; ++q) {
      const SparseVector query = random_vector(rng, 30, 5);
      EXPECT_EQ(index.search(query, 10), oracle::sparse_search(ids, docs, query, 10));
    }
  }
}

TEST(SparseIndex, RandomRoundTrip) {
  testing::TempDir tmp;
  std::mt19937_64 rng(29);
  std::vector<std::string> ids;
  std::vector<SparseVector> docs;
  for (int i = 0; i < 20; ++i) {
    ids.push_back("doc-" + std::to_string(i));
    docs.push_back(random_vector(rng, 30, 6));
  }
  const auto index = SparseIndex::build(ids, docs);
  index.save(tmp / "s.srvs");
  const auto loaded = SparseIndex::load(tmp / "s.srvs");
  EXPECT_EQ(loaded, index);
  const SparseVector q = random_vector(rng, 30, 6);
  EXPECT_EQ(loaded.search(q, 20), index.search(q, 20));
}

TEST(SparseIndex, CorruptionIsDetected) {
  testing::TempDir tmp;
  SparseIndex::build({"a", "b"}, {sv({{"x", 1}}), sv({{"y", 2}})}).save(tmp / "s.srvs");
  const std::string good = testing::slurp(tmp / "s.srvs");
  for (std::size_t pos = 0; pos < good.size(); ++pos) {
    std::string bad = good;
    bad[pos] = static_cast<char>(bad[pos] ^ 0x01);
    testing::write_text(tmp / "bad.srvs", bad);
    EXPECT_THROW(SparseIndex::load(tmp / "bad.srvs"), IndexFormatError) << "byte " << pos;
  }
}

}  // namespace
}  // namespace serval
