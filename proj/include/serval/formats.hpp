// SPDX-License-Identifier: Apache-2.0
//
// BEIR-style corpus/queries/qrels files and TREC run files.
//
//   corpus JSONL   {"_id": "...", "image_path": "..."} or {"_id": "...", "text": "..."}
//   queries JSONL  {"_id": "...", "text": "..."}
//   qrels          "query-id<TAB>corpus-id<TAB>score" (BEIR, optional header)
//                  or "qid 0 docid rel" (TREC), detected by column count
//   run            "qid Q0 docid rank score tag", rank starting at 1
#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "serval/types.hpp"

namespace serval {

/// Relative image paths are resolved against `base_dir`.
std::vector<DocRef> parse_corpus(std::istream& in,
                                 const std::filesystem::path& base_dir = {});
std::vector<DocRef> load_corpus(const std::filesystem::path& path);
/// Image paths are written as stored (no relativisation).
void write_corpus(std::ostream& out, const std::vector<DocRef>& docs);

std::vector<Query> parse_queries(std::istream& in);
std::vector<Query> load_queries(const std::filesystem::path& path);
void write_queries(std::ostream& out, const std::vector<Query>& queries);

Qrels parse_qrels(std::istream& in);
Qrels load_qrels(const std::filesystem::path& path);
/// BEIR 3-column layout with header.
void write_qrels(std::ostream& out, const Qrels& qrels);

struct Run {
  std::string tag;
  std::vector<RunList> rankings;
  bool operator==(const Run&) const = default;
};

/// Rankings come back sorted by query id, each re-sorted by rank order.
/// Mixed tags in one file are rejected.
Run parse_run(std::istream& in);
Run load_run(const std::filesystem::path& path);
void write_run(std::ostream& out, const Run& run);
void save_run(const std::filesystem::path& path, const Run& run);

/// Shortest round-trip decimal form, padded to at least six significant
/// digits.
std::string format_score(double score);

/// Splits the "<vlm>+<encoder>" tag written by the search stage. Returns
/// {tag, ""} when no '+' is present.
std::pair<std::string, std::string> split_run_tag(const std::string& tag);

}  // namespace serval
