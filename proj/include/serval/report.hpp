// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <map>
#include <nlohmann/json.hpp>
#include <string>
#include <utility>
#include <vector>

#include "serval/metrics.hpp"

namespace serval {

struct DatasetSummary {
  std::string name;
  std::map<std::string, double> values;
  std::size_t skipped_queries = 0;
};

/// One (VLM, encoder) pair evaluated over several datasets.
struct RunReport {
  std::string vlm;
  std::string encoder;
  /// In evaluation order.
  std::vector<DatasetSummary> datasets;
  /// metric -> unweighted mean over `datasets`.
  std::map<std::string, double> macro;
};

RunReport make_run_report(std::string vlm, std::string encoder,
                          const std::vector<std::pair<std::string, DatasetMetrics>>& datasets);

/// {"vlm", "encoder", "datasets": {name: {metric: value, "skipped_queries": n}},
///  "macro": {metric: value}} with full-precision values.
nlohmann::ordered_json to_json(const RunReport& report);
RunReport run_report_from_json(const nlohmann::json& j);

/// Aligned text table for one metric: VLM | Text Encoder | datasets... | AVG.
/// Rows are sorted by (vlm, encoder); dataset columns follow first
/// appearance. Values are shown x100 with one decimal; a missing cell is
/// "-", and so is AVG for a row that lacks any column.
std::string render_table(const std::vector<RunReport>& rows, const std::string& metric);

/// render_table() for every metric present, separated by blank lines.
std::string render_tables(const std::vector<RunReport>& rows);

}  // namespace serval
