// SPDX-License-Identifier: Apache-2.0
#include "serval/config.hpp"

#include <cstdlib>
#include <fstream>
#include <limits>
#include <sstream>
#include <set>
#include <toml++/toml.hpp>

#include "serval/errors.hpp"
#include "serval/tokenizer.hpp"

namespace serval {
namespace {

namespace fs = std::filesystem;

void reject_unknown_keys(const toml::table& table, const std::set<std::string>& known,
                         const std::string& where) {
  for (const auto& [key, node] : table) {
    if (!known.count(std::string(key.str()))) {
      throw ConfigError("unknown key '" + std::string(key.str()) + "' in " + where);
    }
  }
}

std::optional<std::string> get_string(const toml::table& t, const char* key,
                                      const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (auto v = node->value<std::string>(); v && node->is_string()) return *v;
  throw ConfigError(where + "." + key + " must be a string");
}

std::optional<std::int64_t> get_int(const toml::table& t, const char* key,
                                    const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_integer()) return node->value<std::int64_t>();
  throw ConfigError(where + "." + key + " must be an integer");
}

std::optional<double> get_real(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_floating_point() || node->is_integer()) return node->value<double>();
  throw ConfigError(where + "." + key + " must be a number");
}

std::optional<bool> get_bool(const toml::table& t, const char* key, const std::string& where) {
  const toml::node* node = t.get(key);
  if (!node) return std::nullopt;
  if (node->is_boolean()) return node->value<bool>();
  throw ConfigError(where + "." + key + " must be a boolean");
}

const toml::table* get_table(const toml::table& t, const char* key) {
  const toml::node* node = t.get(key);
  if (!node) return nullptr;
  if (!node->is_table()) throw ConfigError(std::string(key) + " must be a table");
  return node->as_table();
}

int narrow_int(std::int64_t v, const std::string& what) {
  if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
    throw ConfigError(what + " is out of range");
  }
  return static_cast<int>(v);
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  return path.is_relative() && !base.empty() ? base / path : path;
}

void read_endpoint(const toml::table& t, const std::string& where, EndpointSettings& e) {
  if (auto v = get_string(t, "base_url", where)) e.base_url = *v;
  if (auto v = get_string(t, "api_key", where)) e.api_key = *v;
  if (auto v = get_real(t, "request_timeout_s", where)) e.request_timeout_s = *v;
  if (auto v = get_int(t, "max_retries", where)) e.max_retries = narrow_int(*v, where + ".max_retries");
  if (auto v = get_int(t, "max_concurrency", where)) {
    e.max_concurrency = narrow_int(*v, where + ".max_concurrency");
  }
  if (auto v = get_real(t, "retry_backoff_s", where)) e.retry_backoff_s = *v;
  if (e.request_timeout_s <= 0) throw ConfigError(where + ".request_timeout_s must be > 0");
  if (e.max_retries < 0) throw ConfigError(where + ".max_retries must be >= 0");
  if (e.max_concurrency <= 0) throw ConfigError(where + ".max_concurrency must be > 0");
  if (e.retry_backoff_s < 0) throw ConfigError(where + ".retry_backoff_s must be >= 0");
}

const std::set<std::string> kEndpointKeys = {"base_url",          "api_key",     "request_timeout_s",
                                             "max_retries",       "max_concurrency",
                                             "retry_backoff_s"};

std::set<std::string> with_endpoint_keys(std::set<std::string> keys) {
  keys.insert(kEndpointKeys.begin(), kEndpointKeys.end());
  return keys;
}

void apply_override(toml::table& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) {
    throw ConfigError("override '" + assignment + "' must look like key=value");
  }
  const std::string key = assignment.substr(0, eq);
  const std::string value = assignment.substr(eq + 1);

  std::vector<std::string> parts;
  for (std::size_t start = 0;;) {
    auto dot = key.find('.', start);
    parts.push_back(key.substr(start, dot - start));
    if (dot == std::string::npos) break;
    start = dot + 1;
  }
  toml::table* table = &root;
  for (std::size_t i = 0; i + 1 < parts.size(); ++i) {
    auto [it, inserted] = table->emplace(parts[i], toml::table{});
    if (!it->second.is_table()) throw ConfigError("override '" + key + "' crosses a non-table");
    table = it->second.as_table();
  }
  try {
    toml::table parsed = toml::parse("v = " + value);
    table->insert_or_assign(parts.back(), std::move(*parsed.get("v")));
  } catch (const toml::parse_error&) {
    table->insert_or_assign(parts.back(), value);
  }
}

}  // namespace

const std::map<std::string, std::string>& vidore_v2_registry() {
  static const std::map<std::string, std::string> kRegistry = {
      {"RERB", "vidore/restaurant_esg_reports_beir"},
      {"SAXA", "vidore/synthetic_axa_filtered_v1.0"},
      {"SAXAM", "vidore/synthetic_axa_filtered_v1.0_multilingual"},
      {"SEME", "vidore/synthetic_economics_macro_economy_2024_filtered_v1.0"},
      {"SMBTI", "vidore/synthetic_mit_biomedical_tissue_interactions_unfiltered"},
      {"SMBTIM", "vidore/synthetic_mit_biomedical_tissue_interactions_unfiltered_multilingual"},
      {"SRS", "vidore/synthetic_rse_restaurant_filtered_v1.0"},
      {"SRSM", "vidore/synthetic_rse_restaurant_filtered_v1.0_multilingual"},
      {"SEMEM", "vidore/synthetics_economics_macro_economy_2024_filtered_v1.0_multilingual"},
  };
  return kRegistry;
}

const DatasetEntry& PipelineConfig::dataset(const std::string& name) const {
  auto it = datasets.find(name);
  if (it == datasets.end()) throw ConfigError("dataset '" + name + "' is not configured");
  return it->second;
}

std::string slug(const std::string& text) {
  std::string out = text;
  for (char& c : out) {
    const bool keep = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') ||
                      c == '.' || c == '_' || c == '-';
    if (!keep) c = '_';
  }
  return out;
}

std::string PipelineConfig::run_tag() const {
  return slug(vlm.model_id) + "+" + slug(encoder.model_id);
}

fs::path PipelineConfig::description_cache_path() const {
  return cache_dir / "descriptions.jsonl";
}

fs::path PipelineConfig::embedding_cache_path() const { return cache_dir / "embeddings.jsonl"; }

fs::path PipelineConfig::index_path(const std::string& dataset) const {
  const char* ext = encoder.kind == EncoderKind::dense ? ".srvd" : ".srvs";
  return index_dir / (slug(dataset) + "__" + slug(vlm.model_id) + "__" + slug(encoder.model_id) + ext);
}

PipelineConfig parse_config(const std::string& toml_text, const fs::path& base_dir,
                            const std::vector<std::string>& overrides) {
  toml::table root;
  try {
    root = toml::parse(toml_text);
  } catch (const toml::parse_error& e) {
    throw ConfigError(std::string("config is not valid TOML: ") + std::string(e.description()));
  }
  for (const auto& o : overrides) apply_override(root, o);

  reject_unknown_keys(root,
                      {"cache_dir", "index_dir", "top_k_retrieve", "cutoffs", "similarity", "prompt",
                       "vlm", "encoder", "datasets"},
                      "config");
  PipelineConfig cfg;
  if (auto v = get_string(root, "cache_dir", "config")) cfg.cache_dir = resolve(base_dir, *v);
  else cfg.cache_dir = resolve(base_dir, "cache");
  if (auto v = get_string(root, "index_dir", "config")) cfg.index_dir = resolve(base_dir, *v);
  else cfg.index_dir = resolve(base_dir, "index");
  if (auto v = get_int(root, "top_k_retrieve", "config")) {
    cfg.top_k_retrieve = narrow_int(*v, "top_k_retrieve");
  }
  if (auto v = get_string(root, "similarity", "config")) cfg.similarity = parse_similarity(*v);
  if (const toml::node* node = root.get("cutoffs")) {
    const toml::array* arr = node->as_array();
    if (!arr) throw ConfigError("cutoffs must be an array of integers");
    std::set<int> cutoffs;
    for (const auto& item : *arr) {
      if (!item.is_integer()) throw ConfigError("cutoffs must be an array of integers");
      cutoffs.insert(narrow_int(*item.value<std::int64_t>(), "cutoff"));
    }
    cfg.metrics = MetricSpec(std::move(cutoffs));
  }
  if (cfg.top_k_retrieve < cfg.metrics.max_cutoff()) {
    throw ConfigError("top_k_retrieve (" + std::to_string(cfg.top_k_retrieve) +
                      ") must be >= the largest metric cutoff (" +
                      std::to_string(cfg.metrics.max_cutoff()) + ")");
  }

  if (const toml::table* t = get_table(root, "prompt")) {
    reject_unknown_keys(*t, {"text"}, "prompt");
    if (auto v = get_string(*t, "text", "prompt")) cfg.prompt.text = *v;
    if (cfg.prompt.text.empty()) throw ConfigError("prompt.text must not be empty");
  }

  if (const toml::table* t = get_table(root, "vlm")) {
    reject_unknown_keys(*t, with_endpoint_keys({"model_id", "max_tokens", "temperature", "tokenizer"}),
                        "vlm");
    read_endpoint(*t, "vlm", cfg.vlm.endpoint);
    if (auto v = get_string(*t, "model_id", "vlm")) cfg.vlm.model_id = *v;
    if (auto v = get_int(*t, "max_tokens", "vlm")) cfg.vlm.max_tokens = narrow_int(*v, "vlm.max_tokens");
    if (auto v = get_real(*t, "temperature", "vlm")) cfg.vlm.temperature = *v;
    if (auto v = get_string(*t, "tokenizer", "vlm")) cfg.vlm.tokenizer = *v;
  }
  if (cfg.vlm.max_tokens <= 0) throw ConfigError("vlm.max_tokens must be > 0");
  if (!(cfg.vlm.temperature >= 0.0)) throw ConfigError("vlm.temperature must be >= 0");
  if (!is_known_tokenizer(cfg.vlm.tokenizer)) {
    throw ConfigError("vlm.tokenizer '" + cfg.vlm.tokenizer + "' is unknown");
  }

  if (const toml::table* t = get_table(root, "encoder")) {
    reject_unknown_keys(*t,
                        with_endpoint_keys({"model_id", "kind", "query_instruction", "doc_instruction",
                                            "batch_size", "normalize", "document_vectors",
                                            "query_vectors"}),
                        "encoder");
    read_endpoint(*t, "encoder", cfg.encoder.endpoint);
    if (auto v = get_string(*t, "model_id", "encoder")) cfg.encoder.model_id = *v;
    if (auto v = get_string(*t, "kind", "encoder")) cfg.encoder.kind = parse_encoder_kind(*v);
    if (auto v = get_string(*t, "query_instruction", "encoder")) {
      cfg.encoder.query_instruction = *v;
    }
    if (auto v = get_string(*t, "doc_instruction", "encoder")) cfg.encoder.doc_instruction = *v;
    if (auto v = get_int(*t, "batch_size", "encoder")) {
      cfg.encoder.batch_size = narrow_int(*v, "encoder.batch_size");
    }
    if (auto v = get_bool(*t, "normalize", "encoder")) cfg.encoder.normalize = *v;
    if (auto v = get_string(*t, "document_vectors", "encoder")) {
      cfg.document_vectors = resolve(base_dir, *v);
    }
    if (auto v = get_string(*t, "query_vectors", "encoder")) {
      cfg.query_vectors = resolve(base_dir, *v);
    }
  }
  if (cfg.encoder.batch_size <= 0) throw ConfigError("encoder.batch_size must be > 0");
  if ((cfg.document_vectors || cfg.query_vectors) && cfg.encoder.kind != EncoderKind::sparse) {
    throw ConfigError("encoder.document_vectors/query_vectors require kind = \"sparse\"");
  }

  if (const char* key = std::getenv(kVlmApiKeyEnv); key && *key) cfg.vlm.endpoint.api_key = key;
  if (const char* key = std::getenv(kEncoderApiKeyEnv); key && *key) {
    cfg.encoder.endpoint.api_key = key;
  }

  if (const toml::table* t = get_table(root, "datasets")) {
    for (const auto& [name_key, node] : *t) {
      const std::string name(name_key.str());
      const toml::table* ds = node.as_table();
      if (!ds) throw ConfigError("datasets." + name + " must be a table");
      const std::string where = "datasets." + name;
      reject_unknown_keys(*ds, {"corpus", "queries", "qrels", "hf_path"}, where);
      DatasetEntry entry;
      entry.name = name;
      auto corpus = get_string(*ds, "corpus", where);
      auto queries = get_string(*ds, "queries", where);
      auto qrels = get_string(*ds, "qrels", where);
      if (!corpus || !queries || !qrels) {
        throw ConfigError(where + " needs corpus, queries and qrels paths");
      }
      entry.corpus_path = resolve(base_dir, *corpus);
      entry.queries_path = resolve(base_dir, *queries);
      entry.qrels_path = resolve(base_dir, *qrels);
      if (auto v = get_string(*ds, "hf_path", where)) {
        entry.hf_path = *v;
      } else if (auto reg = vidore_v2_registry().find(name); reg != vidore_v2_registry().end()) {
        entry.hf_path = reg->second;
      }
      cfg.datasets.emplace(name, std::move(entry));
    }
  }
  return cfg;
}

PipelineConfig load_config(const fs::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.parent_path(), overrides);
}

}  // namespace serval
