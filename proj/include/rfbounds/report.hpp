#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfbounds/bound_extraction.hpp"

namespace rfb {

class ReportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A finalized report together with what produced it.
struct ReportDocument {
  BoundsReport report;
  nlohmann::json config = nlohmann::json::object();  // resolved PipelineConfig
  std::vector<std::string> dataset_paths;
  std::vector<int> recording_ids;
};

/// Column header for a class (plural for vehicles).
std::string_view display_name(ClassGroup c);

/// Six significant digits, trailing zeros trimmed, always with a decimal point.
std::string format_bound(double value);

/// Aligned plain-text tables, one per scenario.
std::string render_table(const BoundsReport& report);
std::string render_table(const ScenarioTable& table);

/// One row per (scenario, class, variable), provenance included. Values at full precision.
std::string render_csv(const BoundsReport& report);

nlohmann::json report_to_json(const ReportDocument& doc);
ReportDocument report_from_json(const nlohmann::json& j);
ReportDocument load_report(const std::filesystem::path& path);

}  // namespace rfb
