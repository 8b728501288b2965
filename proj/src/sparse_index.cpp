// SPDX-License-Identifier: Apache-2.0
#include "serval/sparse_index.hpp"

#include <nlohmann/json.hpp>
#include <unordered_set>

#include "index_common.hpp"
#include "serval/errors.hpp"

namespace serval {

SparseIndex SparseIndex::build(std::vector<DocId> doc_ids, const std::vector<SparseVector>& vectors) {
  if (doc_ids.size() != vectors.size()) {
    throw ValidationError("sparse index: " + std::to_string(doc_ids.size()) + " ids but " +
                          std::to_string(vectors.size()) + " vectors");
  }
  if (doc_ids.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("sparse index: too many documents");
  }
  std::unordered_set<std::string_view> seen;
  for (const auto& id : doc_ids) {
    if (id.empty()) throw ValidationError("sparse index: empty doc id");
    if (!seen.insert(id).second) throw ValidationError("sparse index: duplicate doc id '" + id + "'");
  }
  SparseIndex index;
  for (std::uint32_t ord = 0; ord < vectors.size(); ++ord) {
    for (const auto& [term, weight] : vectors[ord].entries) {
      if (!(weight > 0.0)) continue;
      index.postings_[term].push_back({ord, weight});
    }
  }
  index.doc_ids_ = std::move(doc_ids);
  return index;
}

std::vector<ScoredDoc> SparseIndex::search(const SparseVector& query, std::size_t k) const {
  std::vector<double> scores(doc_ids_.size(), 0.0);
  std::vector<std::uint32_t> touched;
  for (const auto& [term, qweight] : query.entries) {
    auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    for (const Posting& p : it->second) {
      if (scores[p.ordinal] == 0.0) touched.push_back(p.ordinal);
      scores[p.ordinal] += qweight * p.weight;
    }
  }
  detail::TopK top(k);
  for (std::uint32_t ord : touched) {
    if (scores[ord] > 0.0) top.offer(doc_ids_[ord], scores[ord]);
    scores[ord] = 0.0;
  }
  return top.take();
}

void SparseIndex::save(const std::filesystem::path& path) const {
  nlohmann::json postings = nlohmann::json::object();
  for (const auto& [term, list] : postings_) {
    nlohmann::json arr = nlohmann::json::array();
    for (const Posting& p : list) arr.push_back({p.ordinal, p.weight});
    postings[term] = std::move(arr);
  }
  nlohmann::json body = {{"doc_ids", doc_ids_}, {"postings", std::move(postings)}};

  detail::ByteWriter w;
  w.put_bytes("SRVS");
  w.put<std::uint32_t>(kFormatVersion);
  w.put_bytes(body.dump());
  w.finish(path);
}

SparseIndex SparseIndex::load(const std::filesystem::path& path) {
  const std::string payload = detail::read_checked(path, "SRVS", 4);
  detail::ByteReader r(payload);
  const auto version = r.get<std::uint32_t>("version");
  if (version != kFormatVersion) {
    throw IndexFormatError("sparse index version " + std::to_string(version) +
                           " is not supported (expected " + std::to_string(kFormatVersion) + ")");
  }
  SparseIndex index;
  try {
    const auto body = nlohmann::json::parse(r.rest());
    index.doc_ids_ = body.at("doc_ids").get<std::vector<DocId>>();
    for (const auto& [term, arr] : body.at("postings").items()) {
      auto& list = index.postings_[term];
      for (const auto& entry : arr) {
        Posting p{entry.at(0).get<std::uint32_t>(), entry.at(1).get<double>()};
        if (p.ordinal >= index.doc_ids_.size() || !(p.weight > 0.0) ||
            (!list.empty() && list.back().ordinal >= p.ordinal)) {
          throw IndexFormatError("invalid posting for term '" + term + "'");
        }
        list.push_back(p);
      }
    }
  } catch (const nlohmann::json::exception& e) {
    throw IndexFormatError(std::string("bad sparse index body: ") + e.what());
  }
  return index;
}

}  // namespace serval
