#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"

namespace driftlab::report {

/// One measured quantity from one trial; the CSV summary emits one row each.
struct TrialRow {
  int trial = 0;
  std::uint64_t seed = 0;
  double h = 0.0;
  std::string constant_name;
  double value = 0.0;
  std::string verdict;
};

/// One verified inequality instance: configuration, measured constants,
/// verdict, and the per-trial rows needed to replay it.
struct EstimateReport {
  std::string id;
  std::string verdict;  // "pass", "fail", "hypothesis_unmet", "expected_fail", "skipped"
  nlohmann::json configuration = nlohmann::json::object();
  nlohmann::json measured = nlohmann::json::object();
  std::vector<TrialRow> rows;

  bool passed() const { return verdict == "pass" || verdict == "expected_fail"; }

  nlohmann::json to_json() const;
  /// Byte-stable serialization (sorted keys, LF line ending).
  std::string to_json_text() const;
  void write_json(const std::string& path) const;
};

void write_csv_summary(const std::vector<EstimateReport>& reports, const std::string& path);

/// (x, y) series extracted from a report for external plotting, one CSV each.
struct PlotSeries {
  std::string name;
  std::string x_label;
  std::string y_label;
  std::vector<std::pair<double, double>> points;
};

std::vector<PlotSeries> plot_series(const EstimateReport& rep);
void write_plot_series(const std::vector<PlotSeries>& series, const std::string& dir,
                       const std::string& stem);

}  // namespace driftlab::report
