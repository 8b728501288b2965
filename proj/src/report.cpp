// SPDX-License-Identifier: Apache-2.0
#include "serval/report.hpp"

#include <algorithm>
#include <set>
#include <sstream>

#include "serval/errors.hpp"

namespace serval {
namespace {

std::vector<std::string> dataset_columns(const std::vector<RunReport>& rows) {
  std::vector<std::string> columns;
  for (const auto& row : rows) {
    for (const auto& ds : row.datasets) {
      if (std::find(columns.begin(), columns.end(), ds.name) == columns.end()) {
        columns.push_back(ds.name);
      }
    }
  }
  return columns;
}

// Orders metric names as ndcg@k ascending, then recall@k ascending, then
// anything else alphabetically.
bool metric_less(const std::string& a, const std::string& b) {
  auto rank = [](const std::string& m) -> std::pair<int, long> {
    auto at = m.find('@');
    const std::string family = m.substr(0, at);
    const long k = at == std::string::npos ? 0 : std::strtol(m.c_str() + at + 1, nullptr, 10);
    if (family == "ndcg") return {0, k};
    if (family == "recall") return {1, k};
    return {2, 0};
  };
  auto ra = rank(a), rb = rank(b);
  if (ra != rb) return ra < rb;
  return a < b;
}

template <typename Emit>
void for_each_metric(const std::map<std::string, double>& values, Emit emit) {
  std::vector<std::string> names;
  for (const auto& [metric, value] : values) names.push_back(metric);
  std::sort(names.begin(), names.end(), metric_less);
  for (const auto& name : names) emit(name, values.at(name));
}

}  // namespace

RunReport make_run_report(std::string vlm, std::string encoder,
                          const std::vector<std::pair<std::string, DatasetMetrics>>& datasets) {
  if (datasets.empty()) throw EmptyInputError("report needs at least one dataset");
  RunReport report;
  report.vlm = std::move(vlm);
  report.encoder = std::move(encoder);
  std::set<std::string> seen;
  for (const auto& [name, metrics] : datasets) {
    if (!seen.insert(name).second) throw ValidationError("dataset '" + name + "' evaluated twice");
    report.datasets.push_back({name, metrics.values, metrics.skipped_queries});
  }
  for (const auto& [metric, unused] : report.datasets.front().values) {
    std::map<std::string, double> per_dataset;
    for (const auto& ds : report.datasets) {
      auto it = ds.values.find(metric);
      if (it == ds.values.end()) {
        throw ValidationError("metric '" + metric + "' missing for dataset '" + ds.name + "'");
      }
      per_dataset[ds.name] = it->second;
    }
    report.macro[metric] = macro_average(per_dataset);
  }
  return report;
}

nlohmann::ordered_json to_json(const RunReport& report) {
  nlohmann::ordered_json datasets = nlohmann::ordered_json::object();
  for (const auto& ds : report.datasets) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    for_each_metric(ds.values, [&](const std::string& m, double v) { entry[m] = v; });
    entry["skipped_queries"] = ds.skipped_queries;
    datasets[ds.name] = std::move(entry);
  }
  nlohmann::ordered_json macro = nlohmann::ordered_json::object();
  for_each_metric(report.macro, [&](const std::string& m, double v) { macro[m] = v; });

  nlohmann::ordered_json out;
  out["vlm"] = report.vlm;
  out["encoder"] = report.encoder;
  out["datasets"] = std::move(datasets);
  out["macro"] = std::move(macro);
  return out;
}

RunReport run_report_from_json(const nlohmann::json& j) {
  try {
    RunReport report;
    report.vlm = j.value("vlm", std::string{});
    report.encoder = j.value("encoder", std::string{});
    for (const auto& [name, entry] : j.at("datasets").items()) {
      DatasetSummary ds{name, {}, 0};
      for (const auto& [key, value] : entry.items()) {
        if (key == "skipped_queries") {
          ds.skipped_queries = value.get<std::size_t>();
        } else {
          ds.values[key] = value.get<double>();
        }
      }
      report.datasets.push_back(std::move(ds));
    }
    for (const auto& [metric, value] : j.at("macro").items()) {
      report.macro[metric] = value.get<double>();
    }
    return report;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("malformed report: ") + e.what());
  }
}

std::string render_table(const std::vector<RunReport>& rows, const std::string& metric) {
  std::vector<const RunReport*> sorted;
  for (const auto& row : rows) sorted.push_back(&row);
  std::stable_sort(sorted.begin(), sorted.end(), [](const RunReport* a, const RunReport* b) {
    return std::tie(a->vlm, a->encoder) < std::tie(b->vlm, b->encoder);
  });
  const auto columns = dataset_columns(rows);

  std::vector<std::vector<std::string>> cells;
  std::vector<std::string> header = {"VLM", "Text Encoder"};
  header.insert(header.end(), columns.begin(), columns.end());
  header.push_back("AVG");
  cells.push_back(header);
  for (const RunReport* row : sorted) {
    std::vector<std::string> line = {row->vlm.empty() ? "-" : row->vlm,
                                     row->encoder.empty() ? "-" : row->encoder};
    bool complete = true;
    for (const auto& column : columns) {
      auto ds = std::find_if(row->datasets.begin(), row->datasets.end(),
                             [&](const DatasetSummary& d) { return d.name == column; });
      if (ds == row->datasets.end() || !ds->values.count(metric)) {
        line.push_back("-");
        complete = false;
      } else {
        line.push_back(format_percent(ds->values.at(metric)));
      }
    }
    auto avg = row->macro.find(metric);
    line.push_back(complete && avg != row->macro.end() ? format_percent(avg->second) : "-");
    cells.push_back(std::move(line));
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& line : cells) {
    for (std::size_t c = 0; c < line.size(); ++c) widths[c] = std::max(widths[c], line[c].size());
  }
  std::ostringstream out;
  out << metric << '\n';
  for (std::size_t r = 0; r < cells.size(); ++r) {
    for (std::size_t c = 0; c < cells[r].size(); ++c) {
      const auto& text = cells[r][c];
      const std::string pad(widths[c] - text.size(), ' ');
      if (c > 0) out << "  ";
      // Labels left-aligned, numbers right-aligned.
      if (c < 2) {
        out << text << (c + 1 < cells[r].size() ? pad : "");
      } else {
        out << pad << text;
      }
    }
    out << '\n';
    if (r == 0) {
      std::size_t total = 0;
      for (auto w : widths) total += w;
      out << std::string(total + 2 * (widths.size() - 1), '-') << '\n';
    }
  }
  return out.str();
}

std::string render_tables(const std::vector<RunReport>& rows) {
  std::vector<std::string> metrics;
  for (const auto& row : rows) {
    for (const auto& ds : row.datasets) {
      for (const auto& [metric, value] : ds.values) {
        if (std::find(metrics.begin(), metrics.end(), metric) == metrics.end()) {
          metrics.push_back(metric);
        }
      }
    }
  }
  std::sort(metrics.begin(), metrics.end(), metric_less);
  std::string out;
  for (const auto& metric : metrics) {
    if (!out.empty()) out += '\n';
    out += render_table(rows, metric);
  }
  return out;
}

}  // namespace serval
