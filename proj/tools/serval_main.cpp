// SPDX-License-Identifier: Apache-2.0
//
// serval: describe -> encode -> index -> search -> evaluate.
#include <CLI11.hpp>
#include <iostream>

#include "serval/errors.hpp"
#include "serval/pipeline.hpp"

namespace {

struct CommonOptions {
  std::string config;
  std::string dataset;
  std::vector<std::string> overrides;
};

void add_common(CLI::App* cmd, CommonOptions& opts, bool needs_dataset = true) {
  cmd->add_option("-c,--config", opts.config, "Pipeline config (TOML)")->required();
  auto* ds = cmd->add_option("-d,--dataset", opts.dataset, "Dataset name from the config");
  if (needs_dataset) ds->required();
  cmd->add_option("--set", opts.overrides, "Override a config field, e.g. --set vlm.base_url=http://host:8000");
}

std::optional<std::size_t> as_limit(long limit) {
  if (limit < 0) return std::nullopt;
  return static_cast<std::size_t>(limit);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Zero-shot visual document retrieval through VLM-generated descriptions"};
  app.require_subcommand(1);

  CommonOptions common;
  long limit = -1;

  auto* validate = app.add_subcommand("validate", "Check corpus, queries and qrels of a dataset");
  add_common(validate, common);

  auto* describe = app.add_subcommand("describe", "Generate document descriptions with the VLM");
  add_common(describe, common);
  describe->add_option("--limit", limit, "Only the first N documents");

  std::string role = "both";
  auto* encode = app.add_subcommand("encode", "Embed descriptions and/or queries");
  add_common(encode, common);
  encode->add_option("--role", role, "query, document or both")
      ->check(CLI::IsMember({"query", "document", "both"}));
  encode->add_option("--limit", limit, "Only the first N items per role");

  auto* index = app.add_subcommand("index", "Build the document index from cached embeddings");
  add_common(index, common);

  std::string run_out;
  auto* search = app.add_subcommand("search", "Retrieve top-k documents for every query");
  add_common(search, common);
  search->add_option("-o,--output", run_out, "TREC run file to write")->required();

  std::vector<std::string> runs, qrels, names;
  std::vector<int> cutoffs = {1, 5, 10};
  std::string missing = "zero";
  std::string report_out, table_out, vlm_label, encoder_label;
  auto* evaluate = app.add_subcommand("evaluate", "Score run files against qrels");
  evaluate->add_option("--run", runs, "TREC run file (repeat per dataset)")->required();
  evaluate->add_option("--qrels", qrels, "Qrels file (same order as --run)")->required();
  evaluate->add_option("--name", names, "Dataset name per run (default: run file stem)");
  evaluate->add_option("--cutoffs", cutoffs, "Metric cutoffs k")->delimiter(',');
  evaluate->add_option("--missing-query", missing,
                       "Judged queries absent from the run: zero (score 0) or skip")
      ->check(CLI::IsMember({"zero", "skip"}));
  evaluate->add_option("-o,--output", report_out, "report.json to write");
  evaluate->add_option("--table", table_out, "Text table to write");
  evaluate->add_option("--vlm", vlm_label, "Row label (default: from run tag)");
  evaluate->add_option("--encoder", encoder_label, "Row label (default: from run tag)");

  std::vector<std::string> report_inputs;
  auto* report = app.add_subcommand("report", "Merge report.json files into result tables");
  report->add_option("reports", report_inputs, "report.json files")->required();
  report->add_option("--table", table_out, "Text table to write");

  auto* stats = app.add_subcommand("stats", "Average generated tokens per document");
  add_common(stats, common);

  bool fresh = false;
  auto* bench = app.add_subcommand("bench-latency", "Average description generation latency");
  add_common(bench, common);
  bench->add_flag("--fresh", fresh, "Regenerate instead of reading cached latencies");
  bench->add_option("--limit", limit, "Only the first N image documents");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? serval::kExitOk : serval::kExitConfig;
  }

  using namespace serval;
  auto load = [&] { return load_config(common.config, common.overrides); };

  return run_command(
      [&]() -> int {
        if (*validate) return cmd_validate(load(), common.dataset, std::cout);
        if (*describe) {
          return cmd_describe(load(), common.dataset, {as_limit(limit)}, std::cout);
        }
        if (*encode) {
          EncodeCommandOptions opts;
          if (role != "both") opts.role = parse_role(role);
          opts.limit = as_limit(limit);
          return cmd_encode(load(), common.dataset, opts, std::cout);
        }
        if (*index) return cmd_index(load(), common.dataset, std::cout);
        if (*search) return cmd_search(load(), common.dataset, run_out, std::cout);
        if (*evaluate) {
          if (runs.size() != qrels.size()) {
            throw ConfigError("--run and --qrels must be given the same number of times");
          }
          if (!names.empty() && names.size() != runs.size()) {
            throw ConfigError("--name must be given once per --run");
          }
          EvaluateOptions opts;
          for (std::size_t i = 0; i < runs.size(); ++i) {
            const std::string name =
                names.empty() ? std::filesystem::path(runs[i]).stem().string() : names[i];
            opts.inputs.push_back({name, runs[i], qrels[i]});
          }
          opts.metrics = MetricSpec(std::set<int>(cutoffs.begin(), cutoffs.end()));
          opts.missing = missing == "skip" ? MissingQueryPolicy::skip : MissingQueryPolicy::zero;
          if (!report_out.empty()) opts.report_path = report_out;
          if (!table_out.empty()) opts.table_path = table_out;
          if (!vlm_label.empty()) opts.vlm = vlm_label;
          if (!encoder_label.empty()) opts.encoder = encoder_label;
          return cmd_evaluate(opts, std::cout);
        }
        if (*report) {
          std::vector<std::filesystem::path> paths(report_inputs.begin(), report_inputs.end());
          std::optional<std::filesystem::path> table;
          if (!table_out.empty()) table = table_out;
          return cmd_report(paths, table, std::cout);
        }
        if (*stats) return cmd_stats(load(), common.dataset, std::cout);
        if (*bench) {
          return cmd_bench_latency(load(), common.dataset, {fresh, as_limit(limit)}, std::cout);
        }
        return kExitConfig;
      },
      std::cerr);
}
