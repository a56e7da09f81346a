#pragma once

#include <filesystem>
#include <stdexcept>

#include <json.hpp>

#include "rfbounds/bound_extraction.hpp"
#include "rfbounds/ingestion.hpp"
#include "rfbounds/kinematics.hpp"
#include "rfbounds/scenario_detection.hpp"

namespace rfb {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Everything a run depends on. Serialised in full into every report.
struct PipelineConfig {
  IngestOptions ingestion;
  KinematicsConfig kinematics;
  DetectorConfig detector;
  BoundsConfig bounds;
  EgoPolicy ego_policy = EgoPolicy::CarsOnly;
};

/// Missing keys keep their defaults; unknown keys and ill-typed values throw ConfigError.
PipelineConfig config_from_json(const nlohmann::json& doc);
nlohmann::json config_to_json(const PipelineConfig& config);
PipelineConfig load_config(const std::filesystem::path& path);

}  // namespace rfb
