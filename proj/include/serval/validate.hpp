// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "serval/types.hpp"

namespace serval {

struct ValidationReport {
  /// (query_id, doc_id) judgments whose query or doc is not in the inputs.
  /// Warnings only: qrels routinely cover more than a sampled corpus.
  std::vector<std::pair<QueryId, DocId>> unknown_judgments;
  std::vector<std::pair<DocId, std::filesystem::path>> unreadable_images;

  bool empty() const {
    return unknown_judgments.empty() && unreadable_images.empty();
  }
};

/// Throws ValidationError listing every duplicated doc or query id.
ValidationReport validate_corpus(const std::vector<DocRef>& docs,
                                 const std::vector<Query>& queries,
                                 const Qrels& qrels);

}  // namespace serval
