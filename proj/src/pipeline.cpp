// SPDX-License-Identifier: Apache-2.0
#include "serval/pipeline.hpp"

#include <cstdio>
#include <fstream>
#include <iostream>
#include <set>

#include "serval/dense_index.hpp"
#include "serval/embedding_cache.hpp"
#include "serval/errors.hpp"
#include "serval/formats.hpp"
#include "serval/report.hpp"
#include "serval/sparse_index.hpp"
#include "serval/validate.hpp"

namespace serval {
namespace {

namespace fs = std::filesystem;

struct DatasetFiles {
  std::vector<DocRef> docs;
  std::vector<Query> queries;
  Qrels qrels;
};

DatasetFiles load_dataset(const PipelineConfig& cfg, const std::string& name) {
  const DatasetEntry& entry = cfg.dataset(name);
  DatasetFiles files{load_corpus(entry.corpus_path), load_queries(entry.queries_path),
                     load_qrels(entry.qrels_path)};
  validate_corpus(files.docs, files.queries, files.qrels);
  return files;
}

std::string fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, value);
  return buf;
}

template <typename T>
std::vector<T> take_prefix(std::vector<T> items, std::optional<std::size_t> limit) {
  if (limit && *limit < items.size()) items.resize(*limit);
  return items;
}

// Cached descriptions of `docs` for the configured VLM and prompt, in order.
// Documents without one are reported through `missing`.
std::vector<std::optional<Description>> lookup_descriptions(const PipelineConfig& cfg,
                                                            const std::vector<DocRef>& docs,
                                                            const DescriptionCache& cache) {
  const std::string prompt_hash = cfg.prompt.hash();
  std::vector<std::optional<Description>> out;
  out.reserve(docs.size());
  for (const auto& doc : docs) {
    std::string hash;
    try {
      hash = content_hash(doc);
    } catch (const ParseError& e) {
      throw ValidationError("document '" + doc.doc_id + "': " + e.what());
    }
    auto hit = cache.find({cfg.vlm.model_id, prompt_hash, hash});
    if (hit) hit->doc_id = doc.doc_id;
    out.push_back(std::move(hit));
  }
  return out;
}

std::vector<std::string> description_texts(const PipelineConfig& cfg,
                                           const std::vector<DocRef>& docs, std::ostream& out) {
  DescriptionCache cache(cfg.description_cache_path());
  auto found = lookup_descriptions(cfg, docs, cache);
  std::vector<std::string> texts;
  std::vector<DocId> missing;
  for (std::size_t i = 0; i < docs.size(); ++i) {
    if (found[i]) {
      texts.push_back(found[i]->text);
    } else {
      missing.push_back(docs[i].doc_id);
    }
  }
  if (!missing.empty()) {
    for (const auto& id : missing) out << "missing description: " << id << '\n';
    throw ValidationError(std::to_string(missing.size()) +
                          " document(s) have no cached description; run `serval describe` first");
  }
  return texts;
}

std::vector<std::string> query_texts(const std::vector<Query>& queries) {
  std::vector<std::string> texts;
  texts.reserve(queries.size());
  for (const auto& q : queries) texts.push_back(q.text);
  return texts;
}

std::vector<std::string> doc_ids_of(const std::vector<DocRef>& docs) {
  std::vector<std::string> ids;
  for (const auto& d : docs) ids.push_back(d.doc_id);
  return ids;
}

std::size_t count_cached(const std::vector<std::string>& texts, Role role, const PipelineConfig& cfg,
                         const EmbeddingCache& cache) {
  std::size_t n = 0;
  for (const auto& t : texts) {
    const auto key = EmbeddingKey::make(t, role, cfg.encoder);
    const bool hit = cfg.encoder.kind == EncoderKind::dense ? cache.find_dense(key).has_value()
                                                            : cache.find_sparse(key).has_value();
    if (hit) ++n;
  }
  return n;
}

void require_cached(const std::vector<std::string>& texts, Role role, const PipelineConfig& cfg,
                    const EmbeddingCache& cache) {
  const std::size_t cached = count_cached(texts, role, cfg, cache);
  if (cached != texts.size()) {
    throw ValidationError(std::to_string(texts.size() - cached) + " of " +
                          std::to_string(texts.size()) + " " + to_string(role) +
                          " embeddings are not cached; run `serval encode` first");
  }
}

// Vectors for one role, read only from caches or precomputed files.
std::vector<DenseVector> cached_dense(const std::vector<std::string>& texts, Role role,
                                      const PipelineConfig& cfg, EmbeddingCache& cache) {
  require_cached(texts, role, cfg, cache);
  return encode_dense(texts, role, cfg.encoder, &cache);
}

std::vector<SparseVector> cached_sparse(const std::vector<std::string>& ids,
                                        const std::vector<std::string>& texts, Role role,
                                        const PipelineConfig& cfg, EmbeddingCache& cache) {
  const auto& file = role == Role::document ? cfg.document_vectors : cfg.query_vectors;
  if (file) {
    const auto vectors = load_sparse_vectors(*file);
    std::vector<SparseVector> out;
    for (const auto& id : ids) {
      auto it = vectors.find(id);
      if (it == vectors.end()) {
        throw ValidationError("no precomputed " + to_string(role) + " vector for '" + id + "' in " +
                              file->string());
      }
      out.push_back(it->second);
    }
    return out;
  }
  require_cached(texts, role, cfg, cache);
  return encode_sparse(texts, role, cfg.encoder, &cache);
}

int encode_role(const PipelineConfig& cfg, Role role, const std::vector<std::string>& ids,
                const std::vector<std::string>& texts, EmbeddingCache& cache, std::ostream& out) {
  const auto& file = role == Role::document ? cfg.document_vectors : cfg.query_vectors;
  if (file) {
    cached_sparse(ids, texts, role, cfg, cache);
    out << to_string(role) << ": " << ids.size() << " precomputed vectors from " << file->string()
        << '\n';
    return kExitOk;
  }
  check_encoder_config(cfg.encoder);
  const std::size_t before = count_cached(texts, role, cfg, cache);
  if (cfg.encoder.kind == EncoderKind::dense) {
    encode_dense(texts, role, cfg.encoder, &cache);
  } else {
    encode_sparse(texts, role, cfg.encoder, &cache);
  }
  out << to_string(role) << ": " << (texts.size() - before) << " encoded, " << before
      << " cached\n";
  return kExitOk;
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ValidationError("cannot write '" + path.string() + "'");
  f << text;
}

}  // namespace

int run_command(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ConfigError& e) {
    err << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const TransportError& e) {
    err << "endpoint unreachable: " << e.what() << '\n';
    return kExitEndpoint;
  } catch (const EndpointError& e) {
    err << "endpoint error: " << e.what() << '\n';
    return kExitEndpoint;
  } catch (const ProtocolError& e) {
    err << "endpoint protocol error: " << e.what() << '\n';
    return kExitEndpoint;
  } catch (const EmptyDescriptionError& e) {
    err << "endpoint error: " << e.what() << '\n';
    return kExitEndpoint;
  } catch (const ValidationError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const ParseError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const IndexFormatError& e) {
    err << "index error: " << e.what() << '\n';
    return kExitData;
  } catch (const EmptyInputError& e) {
    err << "data error: " << e.what() << '\n';
    return kExitData;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitData;
  }
}

int cmd_validate(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out) {
  const DatasetEntry& entry = cfg.dataset(dataset);
  const auto docs = load_corpus(entry.corpus_path);
  const auto queries = load_queries(entry.queries_path);
  const auto qrels = load_qrels(entry.qrels_path);
  const auto report = validate_corpus(docs, queries, qrels);
  out << dataset << ": " << docs.size() << " documents, " << queries.size() << " queries, "
      << qrels.judgments.size() << " judged queries\n";
  for (const auto& [qid, docid] : report.unknown_judgments) {
    out << "warning: judgment (" << qid << ", " << docid << ") references an unknown query or document\n";
  }
  for (const auto& [docid, path] : report.unreadable_images) {
    out << "warning: image for '" << docid << "' is unreadable: " << path.string() << '\n';
  }
  if (!report.unreadable_images.empty()) return kExitData;
  return kExitOk;
}

int cmd_describe(const PipelineConfig& cfg, const std::string& dataset,
                 const DescribeCommandOptions& options, std::ostream& out) {
  check_vlm_config(cfg.vlm);
  const auto files = load_dataset(cfg, dataset);
  DescriptionCache cache(cfg.description_cache_path());
  const auto result =
      describe_corpus(files.docs, cfg.vlm, cfg.prompt, cache, DescribeOptions{options.limit, false});
  out << result.summary() << '\n';
  bool endpoint_failure = false;
  for (const auto& f : result.failures) {
    out << "failed: " << f.doc_id << ": " << f.message << '\n';
    endpoint_failure |= f.kind == FailureKind::endpoint;
  }
  if (result.ok()) return kExitOk;
  return endpoint_failure ? kExitEndpoint : kExitData;
}

int cmd_encode(const PipelineConfig& cfg, const std::string& dataset,
               const EncodeCommandOptions& options, std::ostream& out) {
  const auto files = load_dataset(cfg, dataset);
  EmbeddingCache cache(cfg.embedding_cache_path());
  if (!options.role || *options.role == Role::document) {
    const auto docs = take_prefix(files.docs, options.limit);
    const auto ids = doc_ids_of(docs);
    std::vector<std::string> texts;
    if (!cfg.document_vectors) texts = description_texts(cfg, docs, out);
    encode_role(cfg, Role::document, ids, texts, cache, out);
  }
  if (!options.role || *options.role == Role::query) {
    const auto queries = take_prefix(files.queries, options.limit);
    std::vector<std::string> ids;
    for (const auto& q : queries) ids.push_back(q.query_id);
    encode_role(cfg, Role::query, ids, query_texts(queries), cache, out);
  }
  return kExitOk;
}

int cmd_index(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out) {
  const auto files = load_dataset(cfg, dataset);
  EmbeddingCache cache(cfg.embedding_cache_path());
  const auto ids = doc_ids_of(files.docs);
  std::vector<std::string> texts;
  if (!cfg.document_vectors) texts = description_texts(cfg, files.docs, out);
  const fs::path path = cfg.index_path(dataset);
  if (cfg.encoder.kind == EncoderKind::dense) {
    auto index = DenseIndex::build(ids, cached_dense(texts, Role::document, cfg, cache), cfg.similarity);
    index.save(path);
    out << "dense index: " << index.size() << " docs, dim " << index.dim() << ", "
        << to_string(index.similarity()) << " -> " << path.string() << '\n';
  } else {
    auto index = SparseIndex::build(ids, cached_sparse(ids, texts, Role::document, cfg, cache));
    index.save(path);
    out << "sparse index: " << index.size() << " docs, " << index.postings().size() << " terms -> "
        << path.string() << '\n';
  }
  return kExitOk;
}

int cmd_search(const PipelineConfig& cfg, const std::string& dataset, const fs::path& run_path,
               std::ostream& out) {
  const auto files = load_dataset(cfg, dataset);
  EmbeddingCache cache(cfg.embedding_cache_path());
  std::vector<Query> queries = files.queries;
  std::sort(queries.begin(), queries.end(),
            [](const Query& a, const Query& b) { return a.query_id < b.query_id; });
  std::vector<std::string> ids;
  for (const auto& q : queries) ids.push_back(q.query_id);
  const auto texts = query_texts(queries);
  const auto k = static_cast<std::size_t>(cfg.top_k_retrieve);

  Run run;
  run.tag = cfg.run_tag();
  const fs::path index_path = cfg.index_path(dataset);
  if (cfg.encoder.kind == EncoderKind::dense) {
    const auto index = DenseIndex::load(index_path);
    const auto vectors = cached_dense(texts, Role::query, cfg, cache);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      run.rankings.push_back(RunList::make(ids[i], index.search(vectors[i], k)));
    }
  } else {
    const auto index = SparseIndex::load(index_path);
    const auto vectors = cached_sparse(ids, texts, Role::query, cfg, cache);
    for (std::size_t i = 0; i < queries.size(); ++i) {
      run.rankings.push_back(RunList::make(ids[i], index.search(vectors[i], k)));
    }
  }
  save_run(run_path, run);
  out << "run: " << run.rankings.size() << " queries, top " << k << ", tag " << run.tag << " -> "
      << run_path.string() << '\n';
  return kExitOk;
}

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out) {
  if (options.inputs.empty()) throw ConfigError("evaluate needs at least one run/qrels pair");
  std::vector<std::pair<std::string, DatasetMetrics>> results;
  std::string first_tag;
  for (const auto& input : options.inputs) {
    const Run run = load_run(input.run_path);
    if (first_tag.empty()) first_tag = run.tag;
    const Qrels qrels = load_qrels(input.qrels_path);
    try {
      results.emplace_back(input.name, evaluate_run(run.rankings, qrels, options.metrics, options.missing));
    } catch (const EmptyInputError& e) {
      throw EmptyInputError(input.name + ": " + e.what());
    }
  }
  auto [tag_vlm, tag_encoder] = split_run_tag(first_tag);
  RunReport report = make_run_report(options.vlm.value_or(tag_vlm),
                                     options.encoder.value_or(tag_encoder), results);
  if (options.report_path) write_text(*options.report_path, to_json(report).dump(2) + "\n");
  const std::string table = render_tables({report});
  if (options.table_path) write_text(*options.table_path, table);
  for (const auto& ds : report.datasets) {
    if (ds.skipped_queries > 0) {
      out << ds.name << ": " << ds.skipped_queries << " query(ies) skipped\n";
    }
  }
  out << table;
  return kExitOk;
}

int cmd_report(const std::vector<fs::path>& reports, const std::optional<fs::path>& table_path,
               std::ostream& out) {
  if (reports.empty()) throw ConfigError("report needs at least one report.json");
  std::vector<RunReport> rows;
  for (const auto& path : reports) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open report '" + path.string() + "'");
    try {
      rows.push_back(run_report_from_json(nlohmann::json::parse(in)));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("report '" + path.string() + "': " + e.what());
    }
  }
  const std::string table = render_tables(rows);
  if (table_path) write_text(*table_path, table);
  out << table;
  return kExitOk;
}

int cmd_stats(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out) {
  const auto files = load_dataset(cfg, dataset);
  DescriptionCache cache(cfg.description_cache_path());
  std::vector<Description> described;
  std::size_t missing = 0;
  for (auto& d : lookup_descriptions(cfg, files.docs, cache)) {
    if (d) {
      described.push_back(std::move(*d));
    } else {
      ++missing;
    }
  }
  const TokenStats stats = token_stats(described);
  std::set<std::string> tokenizers;
  for (const auto& d : described) tokenizers.insert(d.tokenizer);
  std::string tokenizer_list;
  for (const auto& t : tokenizers) tokenizer_list += (tokenizer_list.empty() ? "" : ",") + t;

  out << dataset << ": " << stats.count << " described documents";
  if (missing > 0) out << " (" << missing << " without description)";
  out << '\n'
      << "mean tokens/doc: " << fixed(stats.mean, 2) << " (min " << stats.min << ", max "
      << stats.max << ", tokenizer " << tokenizer_list << ")\n";
  return kExitOk;
}

int cmd_bench_latency(const PipelineConfig& cfg, const std::string& dataset,
                      const BenchLatencyOptions& options, std::ostream& out) {
  const auto files = load_dataset(cfg, dataset);
  std::vector<DocRef> images;
  for (const auto& doc : files.docs) {
    if (doc.is_image()) images.push_back(doc);
  }
  images = take_prefix(std::move(images), options.limit);

  std::vector<Description> timed;
  if (options.fresh) {
    check_vlm_config(cfg.vlm);
    DescriptionCache unused;
    const auto result =
        describe_corpus(images, cfg.vlm, cfg.prompt, unused, DescribeOptions{std::nullopt, true});
    for (const auto& f : result.failures) out << "failed: " << f.doc_id << ": " << f.message << '\n';
    for (const auto& o : result.outcomes) timed.push_back(o.description);
  } else {
    DescriptionCache cache(cfg.description_cache_path());
    for (auto& d : lookup_descriptions(cfg, images, cache)) {
      if (d) timed.push_back(std::move(*d));
    }
  }
  const LatencyStats stats = bench_latency(timed);
  out << dataset << ": " << stats.count << " image documents" << (options.fresh ? " (fresh)" : "")
      << '\n'
      << "mean generation latency: " << fixed(stats.mean_s, 3) << " s/doc (min "
      << fixed(stats.min_s, 3) << ", max " << fixed(stats.max_s, 3) << ")\n";
  return kExitOk;
}

}  // namespace serval
