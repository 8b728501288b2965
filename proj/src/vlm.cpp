// SPDX-License-Identifier: Apache-2.0
#include "serval/vlm.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <mutex>
#include <numeric>
#include <thread>

#include "serval/errors.hpp"
#include "serval/hashing.hpp"
#include "serval/tokenizer.hpp"

namespace serval {
namespace {

using nlohmann::json;

constexpr std::string_view kChatRoute = "/v1/chat/completions";

bool blank(std::string_view s) {
  return std::all_of(s.begin(), s.end(), [](unsigned char c) { return std::isspace(c); });
}

struct Completion {
  std::string text;
  std::optional<std::int64_t> completion_tokens;
};

Completion parse_completion(const json& response) {
  try {
    Completion out;
    const json& content = response.at("choices").at(0).at("message").at("content");
    if (content.is_null()) return out;
    out.text = content.get<std::string>();
    if (auto usage = response.find("usage"); usage != response.end() && usage->is_object()) {
      if (auto tokens = usage->find("completion_tokens");
          tokens != usage->end() && tokens->is_number_integer()) {
        out.completion_tokens = tokens->get<std::int64_t>();
      }
    }
    return out;
  } catch (const json::exception& e) {
    throw ProtocolError(std::string("malformed chat completion: ") + e.what());
  }
}

struct DescribeAttempt {
  Description description;
  bool from_cache = false;
};

DescribeAttempt describe_one(const DocRef& doc, const VlmEndpointConfig& cfg,
                             const PromptTemplate& prompt, const std::string& prompt_hash,
                             DescriptionCache& cache, bool fresh) {
  std::string bytes;
  std::string hash;
  if (const auto* image = std::get_if<ImageSource>(&doc.source)) {
    try {
      bytes = read_file_bytes(image->path);
    } catch (const ParseError& e) {
      throw ValidationError("document '" + doc.doc_id + "': " + e.what());
    }
    hash = sha256_hex(bytes);
  } else {
    hash = sha256_hex(std::get<TextSource>(doc.source).body);
  }

  const DescriptionKey key{cfg.model_id, prompt_hash, hash};
  if (!fresh) {
    if (auto hit = cache.find(key)) {
      hit->doc_id = doc.doc_id;
      return {std::move(*hit), true};
    }
  }

  Description d;
  d.doc_id = doc.doc_id;
  d.model_id = cfg.model_id;
  d.prompt_hash = prompt_hash;
  d.content_hash = hash;

  if (const auto* text = std::get_if<TextSource>(&doc.source)) {
    if (blank(text->body)) {
      throw EmptyDescriptionError("document '" + doc.doc_id + "' has an empty text body");
    }
    d.text = text->body;
    d.token_count = count_tokens(cfg.tokenizer, d.text);
    d.tokenizer = cfg.tokenizer;
  } else {
    const auto& path = std::get<ImageSource>(doc.source).path;
    const JsonEndpoint endpoint(cfg.endpoint);
    double seconds = 0.0;
    const json response = endpoint.post(
        kChatRoute, build_chat_request(bytes, image_format(bytes, path), prompt, cfg), &seconds);
    Completion completion = parse_completion(response);
    if (blank(completion.text)) {
      throw EmptyDescriptionError("empty description for document '" + doc.doc_id + "'");
    }
    d.text = std::move(completion.text);
    d.gen_latency_s = seconds;
    if (completion.completion_tokens) {
      d.token_count = *completion.completion_tokens;
      d.tokenizer = "server";
    } else {
      d.token_count = count_tokens(cfg.tokenizer, d.text);
      d.tokenizer = cfg.tokenizer;
    }
  }
  if (!fresh) cache.put(d);
  return {std::move(d), false};
}

}  // namespace

std::string PromptTemplate::hash() const { return sha256_hex(text); }

void check_vlm_config(const VlmEndpointConfig& cfg) {
  check_endpoint_settings(cfg.endpoint, "vlm");
  if (cfg.model_id.empty()) throw ConfigError("vlm: model_id is required");
  if (cfg.max_tokens <= 0) throw ConfigError("vlm: max_tokens must be > 0");
  if (!(cfg.temperature >= 0.0)) throw ConfigError("vlm: temperature must be >= 0");
  if (!is_known_tokenizer(cfg.tokenizer)) {
    throw ConfigError("vlm: unknown tokenizer '" + cfg.tokenizer + "'");
  }
}

std::string image_format(std::string_view bytes, const std::filesystem::path& path) {
  auto starts = [&](std::string_view magic) { return bytes.substr(0, magic.size()) == magic; };
  if (starts("\x89PNG\r\n\x1a\n")) return "png";
  if (starts("\xFF\xD8\xFF")) return "jpeg";
  if (starts("GIF87a") || starts("GIF89a")) return "gif";
  if (starts("RIFF") && bytes.size() >= 12 && bytes.substr(8, 4) == "WEBP") return "webp";
  if (starts("BM")) return "bmp";
  if (starts(std::string_view("II*\0", 4)) || starts(std::string_view("MM\0*", 4))) {
    return "tiff";
  }

  std::string ext = path.extension().string();
  std::transform(ext.begin(), ext.end(), ext.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (ext == ".png") return "png";
  if (ext == ".jpg" || ext == ".jpeg") return "jpeg";
  if (ext == ".gif") return "gif";
  if (ext == ".webp") return "webp";
  if (ext == ".bmp") return "bmp";
  if (ext == ".tif" || ext == ".tiff") return "tiff";
  throw ValidationError("unrecognised image format for '" + path.string() + "'");
}

json build_chat_request(std::string_view image_bytes, std::string_view format,
                        const PromptTemplate& prompt, const VlmEndpointConfig& cfg) {
  const std::string data_uri =
      "data:image/" + std::string(format) + ";base64," + base64_encode(image_bytes);
  json image_part = {{"type", "image_url"}, {"image_url", {{"url", data_uri}}}};
  json text_part = {{"type", "text"}, {"text", prompt.text}};
  json message = {{"role", "user"}, {"content", json::array({image_part, text_part})}};
  return json{{"model", cfg.model_id},
              {"temperature", cfg.temperature},
              {"max_tokens", cfg.max_tokens},
              {"messages", json::array({message})}};
}

std::string content_hash(const DocRef& doc) {
  if (const auto* image = std::get_if<ImageSource>(&doc.source)) {
    return sha256_hex(read_file_bytes(image->path));
  }
  return sha256_hex(std::get<TextSource>(doc.source).body);
}

Description describe_document(const DocRef& doc, const VlmEndpointConfig& cfg,
                              const PromptTemplate& prompt, DescriptionCache& cache) {
  return describe_one(doc, cfg, prompt, prompt.hash(), cache, false).description;
}

std::string CorpusDescribeResult::summary() const {
  return std::to_string(generated) + " generated, " + std::to_string(cached) + " cached, " +
         std::to_string(failures.size()) + " failed";
}

CorpusDescribeResult describe_corpus(const std::vector<DocRef>& docs,
                                     const VlmEndpointConfig& cfg,
                                     const PromptTemplate& prompt, DescriptionCache& cache,
                                     const DescribeOptions& options) {
  const std::size_t n = std::min(docs.size(), options.limit.value_or(docs.size()));
  const std::string prompt_hash = prompt.hash();

  std::vector<std::optional<DescribeOutcome>> slots(n);
  std::vector<std::optional<DescribeFailure>> failed(n);
  std::atomic<std::size_t> next{0};

  auto worker = [&] {
    for (std::size_t i = next++; i < n; i = next++) {
      const DocRef& doc = docs[i];
      try {
        auto attempt = describe_one(doc, cfg, prompt, prompt_hash, cache, options.fresh);
        slots[i] = DescribeOutcome{std::move(attempt.description), attempt.from_cache};
      } catch (const ValidationError& e) {
        failed[i] = DescribeFailure{doc.doc_id, FailureKind::data, e.what()};
      } catch (const std::exception& e) {
        failed[i] = DescribeFailure{doc.doc_id, FailureKind::endpoint, e.what()};
      }
    }
  };

  const auto workers = std::min<std::size_t>(
      static_cast<std::size_t>(std::max(1, cfg.endpoint.max_concurrency)), std::max<std::size_t>(n, 1));
  {
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(worker);
  }

  CorpusDescribeResult result;
  for (std::size_t i = 0; i < n; ++i) {
    if (slots[i]) {
      (slots[i]->from_cache ? result.cached : result.generated)++;
      result.outcomes.push_back(std::move(*slots[i]));
    } else if (failed[i]) {
      result.failures.push_back(std::move(*failed[i]));
    }
  }
  return result;
}

TokenStats token_stats(const std::vector<Description>& descriptions) {
  if (descriptions.empty()) throw EmptyInputError("token_stats: no descriptions");
  TokenStats stats;
  stats.count = descriptions.size();
  stats.min = descriptions.front().token_count;
  stats.max = descriptions.front().token_count;
  double sum = 0.0;
  for (const auto& d : descriptions) {
    sum += static_cast<double>(d.token_count);
    stats.min = std::min(stats.min, d.token_count);
    stats.max = std::max(stats.max, d.token_count);
  }
  stats.mean = sum / static_cast<double>(stats.count);
  return stats;
}

LatencyStats bench_latency(const std::vector<Description>& descriptions) {
  if (descriptions.empty()) throw EmptyInputError("bench_latency: no descriptions");
  LatencyStats stats;
  stats.count = descriptions.size();
  stats.min_s = descriptions.front().gen_latency_s;
  stats.max_s = descriptions.front().gen_latency_s;
  double sum = 0.0;
  for (const auto& d : descriptions) {
    sum += d.gen_latency_s;
    stats.min_s = std::min(stats.min_s, d.gen_latency_s);
    stats.max_s = std::max(stats.max_s, d.gen_latency_s);
  }
  stats.mean_s = sum / static_cast<double>(stats.count);
  return stats;
}

}  // namespace serval
