// SPDX-License-Identifier: Apache-2.0
#include "serval/validate.hpp"

#include <fstream>
#include <set>

#include "serval/errors.hpp"

namespace serval {
namespace {

template <typename Items, typename GetId>
std::set<std::string> collect_ids(const Items& items, GetId get_id,
                                  std::set<std::string>& duplicates) {
  std::set<std::string> ids;
  for (const auto& item : items) {
    if (!ids.insert(get_id(item)).second) duplicates.insert(get_id(item));
  }
  return ids;
}

std::string join(const std::set<std::string>& values) {
  std::string out;
  for (const auto& v : values) {
    if (!out.empty()) out += ", ";
    out += "'" + v + "'";
  }
  return out;
}

}  // namespace

ValidationReport validate_corpus(const std::vector<DocRef>& docs,
                                 const std::vector<Query>& queries,
                                 const Qrels& qrels) {
  std::set<std::string> dup_docs, dup_queries;
  auto doc_ids =
      collect_ids(docs, [](const DocRef& d) { return d.doc_id; }, dup_docs);
  auto query_ids = collect_ids(
      queries, [](const Query& q) { return q.query_id; }, dup_queries);

  std::string problems;
  if (!dup_docs.empty()) problems += "duplicate doc_id " + join(dup_docs);
  if (!dup_queries.empty()) {
    if (!problems.empty()) problems += "; ";
    problems += "duplicate query_id " + join(dup_queries);
  }
  for (const auto& doc : docs) {
    if (doc.doc_id.empty()) {
      if (!problems.empty()) problems += "; ";
      problems += "empty doc_id";
      break;
    }
  }
  if (!problems.empty()) throw ValidationError(problems);

  ValidationReport report;
  for (const auto& [qid, judged] : qrels.judgments) {
    const bool query_known = query_ids.count(qid) > 0;
    for (const auto& [docid, grade] : judged) {
      if (!query_known || doc_ids.count(docid) == 0) {
        report.unknown_judgments.emplace_back(qid, docid);
      }
    }
  }
  for (const auto& doc : docs) {
    if (const auto* image = std::get_if<ImageSource>(&doc.source)) {
      std::ifstream probe(image->path, std::ios::binary);
      if (!probe) report.unreadable_images.emplace_back(doc.doc_id, image->path);
    }
  }
  return report;
}

}  // namespace serval
