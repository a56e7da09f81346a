#include "rfbounds/report.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "rfbounds/csv.hpp"

namespace rfb {

using nlohmann::json;

std::string_view display_name(ClassGroup c) {
  switch (c) {
    case ClassGroup::Pedestrian:
      return "Pedestrian";
    case ClassGroup::Cyclist:
      return "Cyclist";
    case ClassGroup::Motorcyclist:
      return "Motorcyclist";
    case ClassGroup::Vehicle:
      return "Vehicles";
  }
  return "?";
}

std::string format_bound(double value) {
  if (!std::isfinite(value)) return "nan";
  if (value == 0.0) return "0.0";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.5e", value);
  const double rounded = std::strtod(buf, nullptr);
  auto res = std::to_chars(buf, buf + sizeof buf, rounded, std::chars_format::fixed);
  std::string out(buf, res.ptr);
  if (out.find('.') == std::string::npos) out += ".0";
  return out;
}

namespace {

std::string join_row(const std::vector<std::string>& cells, const std::vector<std::size_t>& widths) {
  std::string line;
  for (std::size_t i = 0; i < cells.size(); ++i) {
    line += cells[i];
    if (i + 1 < cells.size()) line.append(widths[i] - cells[i].size() + 2, ' ');
  }
  while (!line.empty() && line.back() == ' ') line.pop_back();
  return line;
}

json provenance_to_json(const Provenance& p) {
  return {{"recording_id", p.recording_id}, {"ego_id", p.ego_id},
          {"subject_id", p.subject_id},     {"frame", p.frame},
          {"frame_start", p.frame_start},   {"frame_end", p.frame_end},
          {"reference_heading", p.reference_heading}};
}

Provenance provenance_from_json(const json& j) {
  Provenance p;
  p.recording_id = j.at("recording_id").get<int>();
  p.ego_id = j.at("ego_id").get<int>();
  p.subject_id = j.at("subject_id").get<int>();
  p.frame = j.at("frame").get<int>();
  p.frame_start = j.at("frame_start").get<int>();
  p.frame_end = j.at("frame_end").get<int>();
  p.reference_heading = j.at("reference_heading").get<double>();
  return p;
}

}  // namespace

std::string render_table(const ScenarioTable& table) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> header{"Variable", "Units"};
  for (const ClassColumn& col : table.columns) header.emplace_back(display_name(col.class_group));
  rows.push_back(header);

  std::vector<std::string> cases{"N_cases", ""};
  for (const ClassColumn& col : table.columns) cases.push_back(std::to_string(col.n_cases));
  rows.push_back(cases);

  for (VariableId v : applicable_variables(table.scenario)) {
    std::vector<std::string> row{std::string(to_string(v)), std::string(units(v))};
    for (const ClassColumn& col : table.columns) {
      std::string cell;
      if (col.n_cases > 0) {
        cell = "n/a";
        for (const BoundValue& bv : col.values) {
          if (bv.variable == v && bv.value) cell = format_bound(*bv.value);
        }
      }
      row.push_back(cell);
    }
    rows.push_back(row);
  }

  std::vector<std::size_t> widths(header.size(), 0);
  for (const auto& r : rows) {
    for (std::size_t i = 0; i < r.size(); ++i) widths[i] = std::max(widths[i], r[i].size());
  }

  std::string out = "Scenario " + std::string(to_string(table.scenario)) + "\n";
  for (const auto& r : rows) out += join_row(r, widths) + "\n";
  for (const std::string& note : table.notes) out += "note: " + note + "\n";
  return out;
}

std::string render_table(const BoundsReport& report) {
  std::string out;
  for (std::size_t i = 0; i < report.tables.size(); ++i) {
    if (i > 0) out += "\n";
    out += render_table(report.tables[i]);
  }
  return out;
}

std::string render_csv(const BoundsReport& report) {
  std::ostringstream out;
  out << "scenario,class,variable,units,value,n_cases,recording_id,ego_id,subject_id,frame,"
         "frame_start,frame_end,reference_heading\n";
  for (const ScenarioTable& t : report.tables) {
    for (const ClassColumn& col : t.columns) {
      for (const BoundValue& bv : col.values) {
        out << to_string(t.scenario) << ',' << to_string(col.class_group) << ','
            << to_string(bv.variable) << ',' << units(bv.variable) << ','
            << (bv.value ? csv::format_double(*bv.value) : "") << ',' << col.n_cases;
        if (bv.provenance) {
          const Provenance& p = *bv.provenance;
          out << ',' << p.recording_id << ',' << p.ego_id << ',' << p.subject_id << ','
              << p.frame << ',' << p.frame_start << ',' << p.frame_end << ','
              << csv::format_double(p.reference_heading);
        } else {
          out << ",,,,,,,";
        }
        out << '\n';
      }
    }
  }
  return out.str();
}

json report_to_json(const ReportDocument& doc) {
  json tables = json::array();
  for (const ScenarioTable& t : doc.report.tables) {
    json cols = json::array();
    for (const ClassColumn& col : t.columns) {
      json values = json::array();
      for (const BoundValue& bv : col.values) {
        values.push_back({{"variable", to_string(bv.variable)},
                          {"units", units(bv.variable)},
                          {"value", bv.value ? json(*bv.value) : json(nullptr)},
                          {"provenance", bv.provenance ? provenance_to_json(*bv.provenance)
                                                       : json(nullptr)}});
      }
      cols.push_back({{"class", to_string(col.class_group)},
                      {"n_cases", col.n_cases},
                      {"values", values}});
    }
    tables.push_back({{"scenario", to_string(t.scenario)}, {"columns", cols}, {"notes", t.notes}});
  }
  return {{"format", "rfbounds-report/1"},
          {"config", doc.config},
          {"dataset", {{"paths", doc.dataset_paths}, {"recording_ids", doc.recording_ids}}},
          {"tables", tables}};
}

ReportDocument report_from_json(const json& j) {
  ReportDocument doc;
  try {
    if (j.value("format", "") != "rfbounds-report/1") throw ReportError("not an rfbounds report");
    doc.config = j.at("config");
    doc.dataset_paths = j.at("dataset").at("paths").get<std::vector<std::string>>();
    doc.recording_ids = j.at("dataset").at("recording_ids").get<std::vector<int>>();
    for (const json& jt : j.at("tables")) {
      ScenarioTable t;
      auto s = scenario_from_name(jt.at("scenario").get<std::string>());
      if (!s) throw ReportError("unknown scenario " + jt.at("scenario").dump());
      t.scenario = *s;
      t.notes = jt.at("notes").get<std::vector<std::string>>();
      for (const json& jc : jt.at("columns")) {
        ClassColumn col;
        auto c = class_group_from_name(jc.at("class").get<std::string>());
        if (!c) throw ReportError("unknown class " + jc.at("class").dump());
        col.class_group = *c;
        col.n_cases = jc.at("n_cases").get<std::size_t>();
        for (const json& jv : jc.at("values")) {
          BoundValue bv;
          auto v = variable_from_name(jv.at("variable").get<std::string>());
          if (!v) throw ReportError("unknown variable " + jv.at("variable").dump());
          bv.variable = *v;
          if (!jv.at("value").is_null()) bv.value = jv.at("value").get<double>();
          if (!jv.at("provenance").is_null()) bv.provenance = provenance_from_json(jv.at("provenance"));
          col.values.push_back(bv);
        }
        t.columns.push_back(std::move(col));
      }
      doc.report.tables.push_back(std::move(t));
    }
  } catch (const json::exception& e) {
    throw ReportError(std::string("malformed report: ") + e.what());
  }
  return doc;
}

ReportDocument load_report(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ReportError("cannot open report: " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ReportError("report " + path.string() + ": " + e.what());
  }
  return report_from_json(j);
}

}  // namespace rfb
