// SPDX-License-Identifier: Apache-2.0
#include "serval/dense_index.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <unordered_set>

#include "index_common.hpp"
#include "serval/encoder.hpp"
#include "serval/errors.hpp"

namespace serval {

std::string to_string(Similarity similarity) {
  return similarity == Similarity::cosine ? "cosine" : "dot";
}

Similarity parse_similarity(const std::string& name) {
  if (name == "cosine") return Similarity::cosine;
  if (name == "dot") return Similarity::dot;
  throw ConfigError("unknown similarity '" + name + "' (expected cosine or dot)");
}

DenseIndex DenseIndex::build(std::vector<DocId> doc_ids, const std::vector<DenseVector>& vectors,
                             Similarity similarity) {
  if (doc_ids.empty()) throw ValidationError("cannot build a dense index over zero documents");
  if (doc_ids.size() != vectors.size()) {
    throw ValidationError("dense index: " + std::to_string(doc_ids.size()) + " ids but " +
                          std::to_string(vectors.size()) + " vectors");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (id.empty()) throw ValidationError("dense index: empty doc id");
    if (!seen.insert(id).second) throw ValidationError("dense index: duplicate doc id '" + id + "'");
  }
  const std::size_t dim = vectors.front().dim();
  if (dim == 0) throw ValidationError("dense index: zero-dimensional vectors");

  DenseIndex index;
  index.dim_ = dim;
  index.similarity_ = similarity;
  index.matrix_.reserve(dim * vectors.size());
  for (std::size_t i = 0; i < vectors.size(); ++i) {
    const DenseVector& v = vectors[i];
    if (v.dim() != dim) {
      throw ValidationError("dense index: doc '" + doc_ids[i] + "' has dimension " +
                            std::to_string(v.dim()) + ", expected " + std::to_string(dim));
    }
    for (double x : v.values) {
      if (!std::isfinite(x)) throw ValidationError("dense index: non-finite value in '" + doc_ids[i] + "'");
    }
    const DenseVector stored = similarity == Similarity::cosine ? l2_normalize(v) : v;
    for (double x : stored.values) index.matrix_.push_back(static_cast<float>(x));
  }
  index.doc_ids_ = std::move(doc_ids);
  return index;
}

std::vector<ScoredDoc> DenseIndex::search(const DenseVector& query, std::size_t k) const {
  if (query.dim() != dim_) {
    throw ValidationError("query dimension " + std::to_string(query.dim()) +
                          " does not match index dimension " + std::to_string(dim_));
  }
  const DenseVector q = similarity_ == Similarity::cosine ? l2_normalize(query) : query;
  detail::TopK top(k);
  for (std::size_t r = 0; r < doc_ids_.size(); ++r) {
    const float* row = matrix_.data() + r * dim_;
    double score = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) score += static_cast<double>(row[i]) * q.values[i];
    top.offer(doc_ids_[r], score);
  }
  return top.take();
}

void DenseIndex::save(const std::filesystem::path& path) const {
  detail::ByteWriter w;
  w.put_bytes("SRVD");
  w.put<std::uint32_t>(kFormatVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(dim_));
  w.put<std::uint64_t>(doc_ids_.size());
  w.put<std::uint8_t>(static_cast<std::uint8_t>(similarity_));
  for (float x : matrix_) w.put<float>(x);
  w.put_bytes(nlohmann::json(doc_ids_).dump());
  w.finish(path);
}

DenseIndex DenseIndex::load(const std::filesystem::path& path) {
  const std::string payload = detail::read_checked(path, "SRVD", 4 + 4 + 8 + 1);
  detail::ByteReader r(payload);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw IndexFormatError("dense index version " + std::to_string(version) +
                           " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  const auto dim = r.get<std::uint32_t>("dim");
  const auto count = r.get<std::uint64_t>("count");
  const auto similarity = r.get<std::uint8_t>("similarity");
  if (similarity > 1) throw IndexFormatError("unknown similarity code " + std::to_string(similarity));
  if (dim == 0 || count == 0) throw IndexFormatError("empty dense index");
  if (count > r.remaining() / (sizeof(float) * dim)) {
    throw IndexFormatError("truncated dense index matrix");
  }

  DenseIndex index;
  index.dim_ = dim;
  index.similarity_ = static_cast<Similarity>(similarity);
  index.matrix_.resize(static_cast<std::size_t>(count) * dim);
  auto raw = r.get_bytes(index.matrix_.size() * sizeof(float), "matrix");
  std::memcpy(index.matrix_.data(), raw.data(), raw.size());
  try {
    index.doc_ids_ = nlohmann::json::parse(r.rest()).get<std::vector<DocId>>();
  } catch (const nlohmann::json::exception& e) {
    throw IndexFormatError(std::string("bad doc id list in dense index: ") + e.what());
  }
  if (index.doc_ids_.size() != count) {
    throw IndexFormatError("dense index holds " + std::to_string(count) + " rows but " +
                           std::to_string(index.doc_ids_.size()) + " doc ids");
  }
  return index;
}

}  // namespace serval
