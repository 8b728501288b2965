// SPDX-License-Identifier: Apache-2.0
//
// Document image -> text description through an OpenAI-compatible
// chat-completion endpoint (vLLM, LMDeploy, ...).
#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "serval/description_cache.hpp"
#include "serval/http.hpp"
#include "serval/types.hpp"

namespace serval {

inline constexpr std::string_view kDefaultDescriptionPrompt =
    "Provide a comprehensive description of the document in the image in "
    "English. Begin with a summary, then follow with details. Extract all "
    "visible text and numerical values from the document.";

inline constexpr const char* kVlmApiKeyEnv = "SERVAL_VLM_API_KEY";

struct PromptTemplate {
  std::string text{kDefaultDescriptionPrompt};

  /// SHA-256 of the prompt text, part of every description cache key.
  std::string hash() const;
};

struct VlmEndpointConfig {
  EndpointSettings endpoint;
  std::string model_id;
  int max_tokens = 2048;
  double temperature = 0.0;
  /// Local counter used when the response carries no usage block.
  std::string tokenizer = "whitespace";
};

void check_vlm_config(const VlmEndpointConfig& cfg);

/// "png", "jpeg", ... sniffed from magic bytes, falling back to the file
/// extension. Throws ValidationError if neither is recognised.
std::string image_format(std::string_view bytes, const std::filesystem::path& path);

/// The chat-completion body: one user message holding the image as a
/// base64 data URI followed by the prompt text.
nlohmann::json build_chat_request(std::string_view image_bytes,
                                  std::string_view format,
                                  const PromptTemplate& prompt,
                                  const VlmEndpointConfig& cfg);

/// Content hash of a document: SHA-256 of the image bytes or source text.
std::string content_hash(const DocRef& doc);

/// Cached description on (model_id, prompt_hash, content_hash) hit; else one
/// logical request (plus retries). Text sources skip the endpoint and use
/// their body. Empty completions throw EmptyDescriptionError and are not
/// cached.
Description describe_document(const DocRef& doc, const VlmEndpointConfig& cfg,
                              const PromptTemplate& prompt,
                              DescriptionCache& cache);

struct DescribeOptions {
  /// Only the first `limit` documents are processed.
  std::optional<std::size_t> limit;
  /// Ignore cached entries and do not store results (latency benchmarking).
  bool fresh = false;
};

enum class FailureKind { endpoint, data };

struct DescribeFailure {
  DocId doc_id;
  FailureKind kind = FailureKind::endpoint;
  std::string message;
};

struct DescribeOutcome {
  Description description;
  bool from_cache = false;
};

struct CorpusDescribeResult {
  /// Successful outcomes in input order.
  std::vector<DescribeOutcome> outcomes;
  std::size_t generated = 0;
  std::size_t cached = 0;
  std::vector<DescribeFailure> failures;

  bool ok() const { return failures.empty(); }
  /// "G generated, C cached, F failed"
  std::string summary() const;
};

/// Describes every document with at most cfg.endpoint.max_concurrency
/// requests in flight. Failures are collected, successes cached, so a
/// rerun only retries what is missing.
CorpusDescribeResult describe_corpus(const std::vector<DocRef>& docs,
                                     const VlmEndpointConfig& cfg,
                                     const PromptTemplate& prompt,
                                     DescriptionCache& cache,
                                     const DescribeOptions& options = {});

struct TokenStats {
  std::size_t count = 0;
  double mean = 0.0;
  std::int64_t min = 0;
  std::int64_t max = 0;
};

/// Throws EmptyInputError on an empty list.
TokenStats token_stats(const std::vector<Description>& descriptions);

struct LatencyStats {
  std::size_t count = 0;
  double mean_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
};

/// Throws EmptyInputError on an empty list.
LatencyStats bench_latency(const std::vector<Description>& descriptions);

}  // namespace serval
