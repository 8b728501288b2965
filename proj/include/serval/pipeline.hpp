// SPDX-License-Identifier: Apache-2.0
//
// Pipeline stages behind the `serval` subcommands. Each stage reads only
// what the previous one cached, so stages can be rerun independently:
//
//   describe -> cache/descriptions.jsonl
//   encode   -> cache/embeddings.jsonl
//   index    -> index/<dataset>__<vlm>__<encoder>.srvd|.srvs
//   search   -> TREC run file
//   evaluate -> report.json + table
#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "serval/config.hpp"
#include "serval/metrics.hpp"
#include "serval/vlm.hpp"

namespace serval {

/// Process exit codes.
enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 1,
  kExitEndpoint = 2,
  kExitData = 3,
};

/// Runs `command`, mapping exceptions to exit codes and printing them to
/// `err`: ConfigError -> 1; transport, endpoint, protocol and empty
/// description errors -> 2; validation, parse, index and empty-input
/// errors -> 3.
int run_command(const std::function<int()>& command, std::ostream& err);

int cmd_validate(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out);

struct DescribeCommandOptions {
  std::optional<std::size_t> limit;
};

/// Prints "<generated> generated, <cached> cached, <failed> failed" and one
/// line per failure. Returns 2 if any endpoint failure, 3 if only data
/// failures.
int cmd_describe(const PipelineConfig& cfg, const std::string& dataset,
                 const DescribeCommandOptions& options, std::ostream& out);

struct EncodeCommandOptions {
  /// Both roles when unset.
  std::optional<Role> role;
  std::optional<std::size_t> limit;
};

/// Documents are encoded from their cached descriptions; missing
/// descriptions are listed and fatal.
int cmd_encode(const PipelineConfig& cfg, const std::string& dataset,
               const EncodeCommandOptions& options, std::ostream& out);

int cmd_index(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out);

/// Writes one ranking per query, top_k_retrieve deep, tagged
/// cfg.run_tag().
int cmd_search(const PipelineConfig& cfg, const std::string& dataset,
               const std::filesystem::path& run_path, std::ostream& out);

struct EvaluateInput {
  std::string name;
  std::filesystem::path run_path;
  std::filesystem::path qrels_path;
};

struct EvaluateOptions {
  std::vector<EvaluateInput> inputs;
  MetricSpec metrics;
  MissingQueryPolicy missing = MissingQueryPolicy::zero;
  std::optional<std::filesystem::path> report_path;
  std::optional<std::filesystem::path> table_path;
  /// Row labels; taken from the first run's "<vlm>+<encoder>" tag if unset.
  std::optional<std::string> vlm;
  std::optional<std::string> encoder;
};

int cmd_evaluate(const EvaluateOptions& options, std::ostream& out);

/// Merges report.json files into one table per metric.
int cmd_report(const std::vector<std::filesystem::path>& reports,
               const std::optional<std::filesystem::path>& table_path, std::ostream& out);

/// Mean tokens per described document (two decimals).
int cmd_stats(const PipelineConfig& cfg, const std::string& dataset, std::ostream& out);

struct BenchLatencyOptions {
  /// Regenerate descriptions instead of reading cached latencies.
  bool fresh = false;
  std::optional<std::size_t> limit;
};

/// Mean generation latency in seconds (three decimals) over image documents.
int cmd_bench_latency(const PipelineConfig& cfg, const std::string& dataset,
                      const BenchLatencyOptions& options, std::ostream& out);

}  // namespace serval
