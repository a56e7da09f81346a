#pragma once

#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfbounds/bound_extraction.hpp"
#include "rfbounds/config.hpp"
#include "rfbounds/report.hpp"
#include "rfbounds/trajectory_model.hpp"

namespace rfb {

inline constexpr const char* kToolVersion = "0.1.0";

/// Raised when no recording triple is available for the requested ids.
class NoRecordingsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RecordingSummary {
  int recording_id = 0;
  std::size_t tracks = 0;
  std::size_t egos = 0;
  std::map<Scenario, std::size_t> occurrences;  // accumulated, i.e. after skips
  std::size_t rows_rejected = 0;
};

struct RunManifest {
  std::vector<std::string> dataset_paths;
  std::vector<int> recording_ids;
  nlohmann::json config = nlohmann::json::object();
  std::vector<RecordingSummary> recordings;
  std::vector<std::string> warnings;
  std::size_t skipped_occurrences = 0;
  double wall_seconds = 0.0;
  std::string timestamp;  // UTC, ISO 8601
  std::string tool_version = kToolVersion;

  std::size_t total_occurrences() const;
};

nlohmann::json manifest_to_json(const RunManifest& manifest);

struct ExtractionResult {
  BoundAccumulator accumulator;
  std::vector<ScenarioOccurrence> occurrences;  // accumulated ones, in task order
  BoundsReport report;
  RunManifest manifest;
};

/// Detection and accumulation over (recording, ego) tasks on `jobs` threads. The result does
/// not depend on `jobs`.
ExtractionResult extract_recordings(const std::vector<Recording>& recordings,
                                    const PipelineConfig& config, int jobs = 1);

struct ExtractOptions {
  std::filesystem::path dataset_dir;
  std::optional<std::vector<int>> recording_ids;  // unset: every triple in the directory
  PipelineConfig config;
  int jobs = 1;
};

/// Loads the recordings and runs extract_recordings. Throws NoRecordingsError when nothing
/// matches, IngestError on unreadable recordings.
ExtractionResult extract(const ExtractOptions& options);

ReportDocument make_document(const ExtractionResult& result);

/// Writes report.json, report.txt, report.csv, occurrences.csv and manifest.json.
void write_artifacts(const ExtractionResult& result, const std::filesystem::path& out_dir);

std::string occurrences_csv(const std::vector<ScenarioOccurrence>& occurrences);

struct AuditResult {
  std::size_t checked = 0;
  std::vector<std::string> problems;
  bool ok() const { return problems.empty(); }
};

/// Recomputes every bound from its provenance against the raw dataset.
AuditResult audit(const ReportDocument& report, const std::filesystem::path& dataset_dir);

}  // namespace rfb
