// SPDX-License-Identifier: Apache-2.0
//
// Query/description embedding through external encoder endpoints.
//
//   dense   POST {base_url}/v1/embeddings     {"model", "input": [...]}
//           -> {"data": [{"index": i, "embedding": [...]}, ...]}
//   sparse  POST {base_url}/encode_sparse     {"model", "input": [...]}
//           -> {"sparse": [{term: weight, ...}, ...]}
#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "serval/http.hpp"
#include "serval/types.hpp"

namespace serval {

class EmbeddingCache;

inline constexpr const char* kEncoderApiKeyEnv = "SERVAL_ENCODER_API_KEY";

enum class EncoderKind { dense, sparse };
enum class Role { query, document };

std::string to_string(EncoderKind kind);
std::string to_string(Role role);
/// Throws ConfigError on unknown names.
EncoderKind parse_encoder_kind(const std::string& name);
Role parse_role(const std::string& name);

struct EncoderConfig {
  EndpointSettings endpoint;
  std::string model_id;
  EncoderKind kind = EncoderKind::dense;
  /// Prepended verbatim, no separator added.
  std::optional<std::string> query_instruction;
  std::optional<std::string> doc_instruction;
  int batch_size = 32;
  /// Dense only: client-side L2 renormalization.
  bool normalize = true;
};

void check_encoder_config(const EncoderConfig& cfg);

/// The instruction for `role` prepended to `text`.
std::string apply_instruction(const std::string& text, Role role,
                              const EncoderConfig& cfg);

/// Throws ValidationError for a zero or non-finite vector.
DenseVector l2_normalize(const DenseVector& v);

/// Order-preserving. Vectors are renormalized when cfg.normalize is set.
/// Throws ProtocolError when the endpoint returns mismatched dimensions or
/// counts. `cache`, when given, is consulted first and fed with new vectors.
std::vector<DenseVector> encode_dense(std::span<const std::string> texts, Role role,
                                      const EncoderConfig& cfg,
                                      EmbeddingCache* cache = nullptr);

/// Order-preserving; zero and negative weights are dropped.
std::vector<SparseVector> encode_sparse(std::span<const std::string> texts, Role role,
                                        const EncoderConfig& cfg,
                                        EmbeddingCache* cache = nullptr);

/// Precomputed sparse vectors, one {"_id": ..., "sparse": {term: weight}}
/// object per line.
std::map<std::string, SparseVector> load_sparse_vectors(const std::filesystem::path& path);

}  // namespace serval
