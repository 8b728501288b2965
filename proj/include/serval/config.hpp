// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "serval/dense_index.hpp"
#include "serval/encoder.hpp"
#include "serval/types.hpp"
#include "serval/vlm.hpp"

namespace serval {

struct DatasetEntry {
  std::string name;
  std::filesystem::path corpus_path;
  std::filesystem::path queries_path;
  std::filesystem::path qrels_path;
  /// Hub path of the original benchmark split, informational.
  std::string hf_path;
};

/// Short names of the ViDoRe-v2 tasks and their hub paths.
const std::map<std::string, std::string>& vidore_v2_registry();

struct PipelineConfig {
  std::map<std::string, DatasetEntry> datasets;
  VlmEndpointConfig vlm;
  EncoderConfig encoder;
  PromptTemplate prompt;
  Similarity similarity = Similarity::cosine;
  /// Precomputed sparse vectors ({"_id", "sparse"} JSONL) used instead of
  /// the sparse endpoint for the matching role.
  std::optional<std::filesystem::path> document_vectors;
  std::optional<std::filesystem::path> query_vectors;
  std::filesystem::path cache_dir = "cache";
  std::filesystem::path index_dir = "index";
  MetricSpec metrics;
  int top_k_retrieve = 100;

  /// Throws ConfigError for unknown names.
  const DatasetEntry& dataset(const std::string& name) const;
  /// "<vlm model>+<encoder model>" with characters outside [A-Za-z0-9._-]
  /// (including '/' and '+') replaced by '_'.
  std::string run_tag() const;
  std::filesystem::path description_cache_path() const;
  std::filesystem::path embedding_cache_path() const;
  std::filesystem::path index_path(const std::string& dataset) const;
};

/// Parses a TOML document. Relative paths resolve against `base_dir`.
/// `overrides` are "dotted.key=value" strings applied on top of the file,
/// with value read as a TOML value when it parses as one and as a string
/// otherwise. SERVAL_VLM_API_KEY / SERVAL_ENCODER_API_KEY override the
/// api keys. Throws ConfigError on bad types, unknown enum values or
/// top_k_retrieve below the largest cutoff.
PipelineConfig parse_config(const std::string& toml_text,
                            const std::filesystem::path& base_dir = {},
                            const std::vector<std::string>& overrides = {});
PipelineConfig load_config(const std::filesystem::path& path,
                           const std::vector<std::string>& overrides = {});

/// Replaces characters outside [A-Za-z0-9._-] with '_'.
std::string slug(const std::string& text);

}  // namespace serval
