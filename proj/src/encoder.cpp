// SPDX-License-Identifier: Apache-2.0
#include "serval/encoder.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <nlohmann/json.hpp>
#include <thread>

#include "serval/embedding_cache.hpp"
#include "serval/errors.hpp"

namespace serval {
namespace {

using nlohmann::json;

constexpr std::string_view kDenseRoute = "/v1/embeddings";
constexpr std::string_view kSparseRoute = "/encode_sparse";

// Splits `inputs` into batches and runs `fetch` on each with at most
// `max_concurrency` batches in flight. The first failure is rethrown after
// all workers finish.
template <typename Vec, typename Fetch>
std::vector<Vec> run_batches(const std::vector<std::string>& inputs, const EncoderConfig& cfg,
                             Fetch fetch) {
  std::vector<Vec> out(inputs.size());
  if (inputs.empty()) return out;
  const std::size_t batch = static_cast<std::size_t>(cfg.batch_size);
  const std::size_t batches = (inputs.size() + batch - 1) / batch;

  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr first_error;
  auto worker = [&] {
    for (std::size_t b = next++; b < batches; b = next++) {
      {
        std::lock_guard lock(error_mutex);
        if (first_error) return;
      }
      const std::size_t begin = b * batch;
      const std::size_t end = std::min(inputs.size(), begin + batch);
      try {
        std::vector<Vec> got =
            fetch(std::span<const std::string>(inputs.data() + begin, end - begin));
        if (got.size() != end - begin) {
          throw ProtocolError("encoder returned " + std::to_string(got.size()) +
                              " vectors for " + std::to_string(end - begin) + " inputs");
        }
        std::move(got.begin(), got.end(), out.begin() + static_cast<std::ptrdiff_t>(begin));
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!first_error) first_error = std::current_exception();
      }
    }
  };
  const std::size_t workers =
      std::min<std::size_t>(static_cast<std::size_t>(cfg.endpoint.max_concurrency), batches);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }
  if (first_error) std::rethrow_exception(first_error);
  return out;
}

std::vector<DenseVector> fetch_dense(const JsonEndpoint& endpoint, const std::string& model,
                                     std::span<const std::string> batch) {
  const json response =
      endpoint.post(kDenseRoute, json{{"model", model}, {"input", std::vector<std::string>(batch.begin(), batch.end())}});
  try {
    const json& data = response.at("data");
    if (!data.is_array() || data.size() != batch.size()) {
      throw ProtocolError("embeddings response has " +
                          std::to_string(data.is_array() ? data.size() : 0) + " items for " +
                          std::to_string(batch.size()) + " inputs");
    }
    std::vector<std::optional<DenseVector>> slots(batch.size());
    for (std::size_t pos = 0; pos < data.size(); ++pos) {
      const json& item = data[pos];
      const std::size_t index =
          item.contains("index") ? item.at("index").get<std::size_t>() : pos;
      if (index >= slots.size() || slots[index]) {
        throw ProtocolError("embeddings response has bad or repeated index " +
                            std::to_string(index));
      }
      DenseVector v{item.at("embedding").get<std::vector<double>>()};
      for (double x : v.values) {
        if (!std::isfinite(x)) throw ProtocolError("non-finite embedding value");
      }
      slots[index] = std::move(v);
    }
    std::vector<DenseVector> out;
    out.reserve(slots.size());
    for (auto& slot : slots) out.push_back(std::move(*slot));
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed embeddings response: ") + e.what());
  }
}

std::vector<SparseVector> fetch_sparse(const JsonEndpoint& endpoint, const std::string& model,
                                       std::span<const std::string> batch) {
  const json response =
      endpoint.post(kSparseRoute, json{{"model", model}, {"input", std::vector<std::string>(batch.begin(), batch.end())}});
  try {
    const json& items = response.at("sparse");
    if (!items.is_array()) throw ProtocolError("'sparse' is not an array");
    std::vector<SparseVector> out;
    out.reserve(items.size());
    for (const json& item : items) {
      SparseVector v;
      for (const auto& [term, weight] : item.items()) v.set(term, weight.get<double>());
      out.push_back(std::move(v));
    }
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed sparse response: ") + e.what());
  }
}

// Looks every text up in the cache, fetches the misses with instructions
// applied and stores them.
template <typename Vec, typename Find, typename Fetch>
std::vector<Vec> encode_with_cache(std::span<const std::string> texts, Role role,
                                   const EncoderConfig& cfg, EmbeddingCache* cache,
                                   Find find, Fetch fetch) {
  std::vector<Vec> out(texts.size());
  std::vector<std::size_t> missing;
  std::vector<std::string> inputs;
  std::vector<EmbeddingKey> keys;
  for (std::size_t i = 0; i < texts.size(); ++i) {
    if (texts[i].empty()) throw ValidationError("cannot encode an empty text");
    if (cache) {
      auto key = EmbeddingKey::make(texts[i], role, cfg);
      if (auto hit = find(*cache, key)) {
        out[i] = std::move(*hit);
        continue;
      }
      keys.push_back(std::move(key));
    }
    missing.push_back(i);
    inputs.push_back(apply_instruction(texts[i], role, cfg));
  }
  if (!inputs.empty()) {
    const JsonEndpoint endpoint(cfg.endpoint);
    auto fetched = run_batches<Vec>(inputs, cfg, [&](std::span<const std::string> batch) {
      return fetch(endpoint, cfg.model_id, batch);
    });
    for (std::size_t j = 0; j < missing.size(); ++j) {
      if (cache) cache->put(keys[j], fetched[j]);
      out[missing[j]] = std::move(fetched[j]);
    }
  }
  return out;
}

}  // namespace

std::string to_string(EncoderKind kind) {
  return kind == EncoderKind::dense ? "dense" : "sparse";
}

std::string to_string(Role role) { return role == Role::query ? "query" : "document"; }

EncoderKind parse_encoder_kind(const std::string& name) {
  if (name == "dense") return EncoderKind::dense;
  if (name == "sparse") return EncoderKind::sparse;
  throw ConfigError("unknown encoder kind '" + name + "' (expected dense or sparse)");
}

Role parse_role(const std::string& name) {
  if (name == "query") return Role::query;
  if (name == "document") return Role::document;
  throw ConfigError("unknown role '" + name + "' (expected query or document)");
}

void check_encoder_config(const EncoderConfig& cfg) {
  check_endpoint_settings(cfg.endpoint, "encoder");
  if (cfg.model_id.empty()) throw ConfigError("encoder: model_id is required");
  if (cfg.batch_size <= 0) throw ConfigError("encoder: batch_size must be > 0");
}

std::string apply_instruction(const std::string& text, Role role, const EncoderConfig& cfg) {
  const auto& instruction = role == Role::query ? cfg.query_instruction : cfg.doc_instruction;
  return instruction ? *instruction + text : text;
}

DenseVector l2_normalize(const DenseVector& v) {
  double sq = 0.0;
  for (double x : v.values) sq += x * x;
  const double norm = std::sqrt(sq);
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw ValidationError("cannot normalize a zero or non-finite vector");
  }
  DenseVector out;
  out.values.reserve(v.values.size());
  for (double x : v.values) out.values.push_back(x / norm);
  return out;
}

std::vector<DenseVector> encode_dense(std::span<const std::string> texts, Role role,
                                      const EncoderConfig& cfg, EmbeddingCache* cache) {
  if (cfg.kind != EncoderKind::dense) throw ConfigError("encode_dense needs a dense encoder");
  auto vectors = encode_with_cache<DenseVector>(
      texts, role, cfg, cache,
      [](const EmbeddingCache& c, const EmbeddingKey& k) { return c.find_dense(k); },
      fetch_dense);
  for (const auto& v : vectors) {
    if (v.dim() == 0) throw ProtocolError("encoder returned an empty embedding");
    if (v.dim() != vectors.front().dim()) {
      throw ProtocolError("encoder returned mixed dimensions " +
                          std::to_string(vectors.front().dim()) + " and " +
                          std::to_string(v.dim()));
    }
  }
  if (cfg.normalize) {
    for (auto& v : vectors) v = l2_normalize(v);
  }
  return vectors;
}

std::vector<SparseVector> encode_sparse(std::span<const std::string> texts, Role role,
                                        const EncoderConfig& cfg, EmbeddingCache* cache) {
  if (cfg.kind != EncoderKind::sparse) {
    throw ConfigError("encode_sparse needs a sparse encoder");
  }
  return encode_with_cache<SparseVector>(
      texts, role, cfg, cache,
      [](const EmbeddingCache& c, const EmbeddingKey& k) { return c.find_sparse(k); },
      fetch_sparse);
}

std::map<std::string, SparseVector> load_sparse_vectors(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open sparse vector file '" + path.string() + "'");
  std::map<std::string, SparseVector> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const json j = json::parse(line);
      const auto id = j.at("_id").get<std::string>();
      SparseVector v;
      for (const auto& [term, weight] : j.at("sparse").items()) {
        v.set(term, weight.get<double>());
      }
      if (!out.emplace(id, std::move(v)).second) {
        throw ParseError("duplicate _id '" + id + "'");
      }
    } catch (const std::exception& e) {
      throw ParseError("sparse vector file '" + path.string() + "' line " +
                       std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

}  // namespace serval
