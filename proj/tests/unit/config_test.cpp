// SPDX-License-Identifier: Apache-2.0
#include <gtest/gtest.h>

#include <cstdlib>

#include "serval/config.hpp"
#include "serval/errors.hpp"

namespace serval {
namespace {

const char* kMinimal = R"(
[vlm]
base_url = "http://vlm:8000"
model_id = "Qwen/Qwen2.5-VL-32B-Instruct-AWQ"

[encoder]
base_url = "http://enc:8000"
model_id = "infly/inf-retriever-v1"

[datasets.SAXA]
corpus = "saxa/corpus.jsonl"
queries = "saxa/queries.jsonl"
qrels = "saxa/qrels.tsv"
)";

TEST(Config, DefaultsAndPaths) {
  const auto cfg = parse_config(kMinimal, "/work");
  EXPECT_EQ(cfg.top_k_retrieve, 100);
  EXPECT_EQ(cfg.metrics.cutoffs(), (std::set<int>{1, 5, 10}));
  EXPECT_EQ(cfg.similarity, Similarity::cosine);
  EXPECT_EQ(cfg.vlm.temperature, 0.0);
  EXPECT_EQ(cfg.prompt.text, std::string(kDefaultDescriptionPrompt));
  EXPECT_EQ(cfg.cache_dir, std::filesystem::path("/work/cache"));
  const auto& ds = cfg.dataset("SAXA");
  EXPECT_EQ(ds.corpus_path, std::filesystem::path("/work/saxa/corpus.jsonl"));
  EXPECT_EQ(ds.hf_path, vidore_v2_registry().at("SAXA"));
  EXPECT_THROW(cfg.dataset("nope"), ConfigError);
}

TEST(Config, RunTagAndIndexPath) {
  const auto cfg = parse_config(kMinimal, "/work");
  EXPECT_EQ(cfg.run_tag(), "Qwen_Qwen2.5-VL-32B-Instruct-AWQ+infly_inf-retriever-v1");
  EXPECT_EQ(cfg.index_path("SAXA"),
            std::filesystem::path(
                "/work/index/SAXA__Qwen_Qwen2.5-VL-32B-Instruct-AWQ__infly_inf-retriever-v1.srvd"));
}

TEST(Config, RejectsTopKBelowLargestCutoff) {
  EXPECT_THROW(parse_config(std::string("top_k_retrieve = 5\n") + kMinimal), ConfigError);
  EXPECT_NO_THROW(parse_config(std::string("top_k_retrieve = 10\n") + kMinimal));
  EXPECT_NO_THROW(parse_config(std::string("top_k_retrieve = 5\ncutoffs = [1, 5]\n") + kMinimal));
}

TEST(Config, RejectsUnknownKeysAndBadTypes) {
  EXPECT_THROW(parse_config(std::string("colour = 1\n") + kMinimal), ConfigError);
  EXPECT_THROW(parse_config(std::string("top_k_retrieve = \"many\"\n") + kMinimal), ConfigError);
  EXPECT_THROW(parse_config(std::string("similarity = \"l2\"\n") + kMinimal), ConfigError);
  EXPECT_THROW(parse_config("[vlm]\ntokenizer = \"bpe\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[vlm]\nmax_concurrency = 0\n"), ConfigError);
  EXPECT_THROW(parse_config("[encoder]\ndocument_vectors = \"v.jsonl\"\n"), ConfigError);
  EXPECT_THROW(parse_config("[datasets.x]\ncorpus = \"c\"\n"), ConfigError);
  EXPECT_THROW(parse_config("not toml ="), ConfigError);
}

TEST(Config, OverridesApplyOnTop) {
  const auto cfg = parse_config(kMinimal, "/work",
                                {"vlm.base_url=http://other:1", "top_k_retrieve=50",
                                 "encoder.kind=sparse", "prompt.text=Describe it."});
  EXPECT_EQ(cfg.vlm.endpoint.base_url, "http://other:1");
  EXPECT_EQ(cfg.top_k_retrieve, 50);
  EXPECT_EQ(cfg.encoder.kind, EncoderKind::sparse);
  EXPECT_EQ(cfg.prompt.text, "Describe it.");
  EXPECT_EQ(cfg.index_path("SAXA").extension(), ".srvs");
  EXPECT_THROW(parse_config(kMinimal, "", {"no-equals-sign"}), ConfigError);
}

TEST(Config, ApiKeysComeFromEnvironment) {
  ::setenv(kVlmApiKeyEnv, "secret", 1);
  const auto cfg = parse_config(kMinimal);
  ::unsetenv(kVlmApiKeyEnv);
  EXPECT_EQ(cfg.vlm.endpoint.api_key, std::optional<std::string>("secret"));
  EXPECT_FALSE(cfg.encoder.endpoint.api_key.has_value());
}

TEST(Registry, ListsNineTasks) {
  const auto& reg = vidore_v2_registry();
  EXPECT_EQ(reg.size(), 9u);
  for (const char* name : {"RERB", "SAXA", "SAXAM", "SEME", "SEMEM", "SMBTI", "SMBTIM", "SRS", "SRSM"}) {
    EXPECT_TRUE(reg.count(name)) << name;
  }
}

TEST(Slug, ReplacesUnsafeCharacters) {
  EXPECT_EQ(slug("a/b+c d.e_f-g"), "a_b_c_d.e_f-g");
}

}  // namespace
}  // namespace serval
