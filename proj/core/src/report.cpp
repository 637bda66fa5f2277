#include "driftlab/report.hpp"

#include <fstream>
#include <stdexcept>

namespace driftlab::report {

using nlohmann::json;

json EstimateReport::to_json() const {
  json rows_json = json::array();
  for (const TrialRow& r : rows) {
    rows_json.push_back(json{{"trial", r.trial},
                             {"seed", r.seed},
                             {"h", r.h},
                             {"constant", r.constant_name},
                             {"value", r.value},
                             {"verdict", r.verdict}});
  }
  return json{{"id", id},
              {"verdict", verdict},
              {"configuration", configuration},
              {"measured", measured},
              {"rows", rows_json}};
}

std::string EstimateReport::to_json_text() const { return to_json().dump(2) + "\n"; }

void EstimateReport::write_json(const std::string& path) const {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write report: " + path);
  out << to_json_text();
}

void write_csv_summary(const std::vector<EstimateReport>& reports, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write summary: " + path);
  out << "check_id,seed,h,constant_name,value,verdict\n";
  for (const EstimateReport& rep : reports)
    for (const TrialRow& r : rep.rows) {
      out << rep.id << ',' << r.seed << ',' << json(r.h).dump() << ',' << r.constant_name
          << ',' << json(r.value).dump() << ',' << (r.verdict.empty() ? rep.verdict : r.verdict)
          << '\n';
    }
}

std::vector<PlotSeries> plot_series(const EstimateReport& rep) {
  std::vector<PlotSeries> out;
  if (rep.measured.contains("series")) {
    for (const auto& [name, arr] : rep.measured.at("series").items()) {
      PlotSeries s;
      s.name = name;
      s.x_label = arr.value("x", "x");
      s.y_label = arr.value("y", "y");
      for (const auto& p : arr.at("points")) s.points.emplace_back(p.at(0), p.at(1));
      out.push_back(std::move(s));
    }
  }
  return out;
}

void write_plot_series(const std::vector<PlotSeries>& series, const std::string& dir,
                       const std::string& stem) {
  for (const PlotSeries& s : series) {
    const std::string path = dir + "/" + stem + "_" + s.name + ".csv";
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot write series: " + path);
    out << s.x_label << ',' << s.y_label << '\n';
    for (const auto& [x, y] : s.points) out << json(x).dump() << ',' << json(y).dump() << '\n';
  }
}

}  // namespace driftlab::report
