#include "rfbounds/config.hpp"

#include <cmath>
#include <fstream>
#include <set>
#include <string>

namespace rfb {
namespace {

using nlohmann::json;

class Reader {
 public:
  Reader(const json& obj, std::string where) : obj_(obj), where_(std::move(where)) {
    if (!obj_.is_object()) fail("expected an object");
  }

  void allow(std::initializer_list<const char*> keys) {
    const std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [k, v] : obj_.items()) {
      if (!ok.contains(k)) fail("unknown key '" + k + "'");
    }
  }

  void number(const char* key, double& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number()) fail(std::string("'") + key + "' must be a number");
    out = v.get<double>();
    if (!std::isfinite(out)) fail(std::string("'") + key + "' must be finite");
  }

  void integer(const char* key, int& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_number_integer()) fail(std::string("'") + key + "' must be an integer");
    out = v.get<int>();
  }

  void boolean(const char* key, bool& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_boolean()) fail(std::string("'") + key + "' must be a boolean");
    out = v.get<bool>();
  }

  void band(const char* key, Band& out) const {
    if (!obj_.contains(key)) return;
    const json& v = obj_.at(key);
    if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
      fail(std::string("'") + key + "' must be [min, max]");
    }
    out = {v[0].get<double>(), v[1].get<double>()};
  }

  std::optional<std::string> string(const char* key) const {
    if (!obj_.contains(key)) return std::nullopt;
    const json& v = obj_.at(key);
    if (!v.is_string()) fail(std::string("'") + key + "' must be a string");
    return v.get<std::string>();
  }

  [[noreturn]] void fail(const std::string& msg) const { throw ConfigError(where_ + ": " + msg); }

 private:
  const json& obj_;
  std::string where_;
};

std::vector<CrosswalkZone> read_zones(const json& arr) {
  if (!arr.is_array()) throw ConfigError("detector: 's4_crosswalk_zones' must be an array");
  std::vector<CrosswalkZone> zones;
  for (const json& jz : arr) {
    Reader r(jz, "detector.s4_crosswalk_zones[]");
    r.allow({"recording_id", "polygon"});
    CrosswalkZone z;
    if (jz.contains("recording_id") && !jz.at("recording_id").is_null()) {
      int id = 0;
      r.integer("recording_id", id);
      z.recording_id = id;
    }
    if (!jz.contains("polygon") || !jz.at("polygon").is_array()) r.fail("'polygon' required");
    for (const json& p : jz.at("polygon")) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        r.fail("polygon vertices must be [x, y]");
      }
      z.polygon.push_back({p[0].get<double>(), p[1].get<double>()});
    }
    zones.push_back(std::move(z));
  }
  return zones;
}

}  // namespace

PipelineConfig config_from_json(const json& doc) {
  PipelineConfig cfg;
  Reader top(doc, "config");
  top.allow({"ingestion", "kinematics", "detector", "bounds", "pipeline"});

  if (doc.contains("ingestion")) {
    Reader r(doc.at("ingestion"), "ingestion");
    r.allow({"heading_units", "min_track_frames"});
    if (auto u = r.string("heading_units")) {
      if (*u == "degrees") cfg.ingestion.heading_units = HeadingUnits::Degrees;
      else if (*u == "radians") cfg.ingestion.heading_units = HeadingUnits::Radians;
      else r.fail("heading_units must be 'degrees' or 'radians'");
    }
    r.integer("min_track_frames", cfg.ingestion.min_track_frames);
    if (cfg.ingestion.min_track_frames < 1) r.fail("min_track_frames must be >= 1");
  }

  if (doc.contains("kinematics")) {
    Reader r(doc.at("kinematics"), "kinematics");
    r.allow({"window", "v_eps", "zero_tol", "derivatives"});
    r.integer("window", cfg.kinematics.window);
    r.number("v_eps", cfg.kinematics.v_eps);
    r.number("zero_tol", cfg.kinematics.zero_tol);
    if (auto d = r.string("derivatives")) {
      if (*d == "recorded") cfg.kinematics.derivatives = DerivativeSource::Recorded;
      else if (*d == "finite_difference") cfg.kinematics.derivatives = DerivativeSource::FiniteDifference;
      else r.fail("derivatives must be 'recorded' or 'finite_difference'");
    }
    if (cfg.kinematics.window < 3 || cfg.kinematics.window % 2 == 0) r.fail("window must be odd and >= 3");
    if (cfg.kinematics.v_eps < 0.0) r.fail("v_eps must be >= 0");
    if (cfg.kinematics.zero_tol < 0.0) r.fail("zero_tol must be >= 0");
  }

  if (doc.contains("detector")) {
    const json& jd = doc.at("detector");
    Reader r(jd, "detector");
    r.allow({"s1_lateral_band", "s1_heading_tol", "s1_min_duration",
             "s1_vehicle_left_opposite_only", "s2_corridor_margin", "s2_max_gap",
             "s2_behind_clear", "s4_corridor_length", "s4_crossing_heading",
             "s4_approach_margin", "s4_crosswalk_zones", "merge_gap_tol", "min_duration",
             "min_speed_ego", "stationary_speed"});
    DetectorConfig& d = cfg.detector;
    r.band("s1_lateral_band", d.s1_lateral_band);
    r.number("s1_heading_tol", d.s1_heading_tol);
    r.number("s1_min_duration", d.s1_min_duration);
    r.boolean("s1_vehicle_left_opposite_only", d.s1_vehicle_left_opposite_only);
    r.number("s2_corridor_margin", d.s2_corridor_margin);
    r.number("s2_max_gap", d.s2_max_gap);
    r.number("s2_behind_clear", d.s2_behind_clear);
    r.number("s4_corridor_length", d.s4_corridor_length);
    r.band("s4_crossing_heading", d.s4_crossing_heading);
    r.number("s4_approach_margin", d.s4_approach_margin);
    if (jd.contains("s4_crosswalk_zones")) d.s4_crosswalk_zones = read_zones(jd.at("s4_crosswalk_zones"));
    r.integer("merge_gap_tol", d.merge_gap_tol);
    r.number("min_duration", d.min_duration);
    r.number("min_speed_ego", d.min_speed_ego);
    r.number("stationary_speed", d.stationary_speed);
    try {
      validate(d);
    } catch (const DetectionError& e) {
      throw ConfigError(e.what());
    }
  }

  if (doc.contains("bounds")) {
    const json& jb = doc.at("bounds");
    Reader r(jb, "bounds");
    r.allow({"lambda_min_speed", "beta_min_mode", "percentile"});
    r.number("lambda_min_speed", cfg.bounds.lambda_min_speed);
    if (auto m = r.string("beta_min_mode")) {
      if (*m == "all_samples") cfg.bounds.beta_min_mode = BetaMinMode::AllSamples;
      else if (*m == "per_occurrence_max") cfg.bounds.beta_min_mode = BetaMinMode::PerOccurrenceMax;
      else r.fail("beta_min_mode must be 'all_samples' or 'per_occurrence_max'");
    }
    if (jb.contains("percentile") && !jb.at("percentile").is_null()) {
      double p = 0.0;
      r.number("percentile", p);
      if (!(p > 0.0 && p <= 100.0)) r.fail("percentile must lie in (0, 100]");
      cfg.bounds.percentile = p;
    }
  }

  if (doc.contains("pipeline")) {
    Reader r(doc.at("pipeline"), "pipeline");
    r.allow({"ego_classes"});
    if (auto e = r.string("ego_classes")) {
      if (*e == "car") cfg.ego_policy = EgoPolicy::CarsOnly;
      else if (*e == "vehicle") cfg.ego_policy = EgoPolicy::AllVehicles;
      else r.fail("ego_classes must be 'car' or 'vehicle'");
    }
  }
  return cfg;
}

json config_to_json(const PipelineConfig& cfg) {
  const DetectorConfig& d = cfg.detector;
  json zones = json::array();
  for (const CrosswalkZone& z : d.s4_crosswalk_zones) {
    json poly = json::array();
    for (const Vec2& p : z.polygon) poly.push_back({p.x, p.y});
    json jz{{"polygon", poly}};
    jz["recording_id"] = z.recording_id ? json(*z.recording_id) : json(nullptr);
    zones.push_back(jz);
  }
  json doc;
  doc["ingestion"] = {
      {"heading_units", cfg.ingestion.heading_units == HeadingUnits::Degrees ? "degrees" : "radians"},
      {"min_track_frames", cfg.ingestion.min_track_frames}};
  doc["kinematics"] = {
      {"window", cfg.kinematics.window},
      {"v_eps", cfg.kinematics.v_eps},
      {"zero_tol", cfg.kinematics.zero_tol},
      {"derivatives", cfg.kinematics.derivatives == DerivativeSource::Recorded ? "recorded"
                                                                               : "finite_difference"}};
  doc["detector"] = {{"s1_lateral_band", {d.s1_lateral_band.min, d.s1_lateral_band.max}},
                     {"s1_heading_tol", d.s1_heading_tol},
                     {"s1_min_duration", d.s1_min_duration},
                     {"s1_vehicle_left_opposite_only", d.s1_vehicle_left_opposite_only},
                     {"s2_corridor_margin", d.s2_corridor_margin},
                     {"s2_max_gap", d.s2_max_gap},
                     {"s2_behind_clear", d.s2_behind_clear},
                     {"s4_corridor_length", d.s4_corridor_length},
                     {"s4_crossing_heading", {d.s4_crossing_heading.min, d.s4_crossing_heading.max}},
                     {"s4_approach_margin", d.s4_approach_margin},
                     {"s4_crosswalk_zones", zones},
                     {"merge_gap_tol", d.merge_gap_tol},
                     {"min_duration", d.min_duration},
                     {"min_speed_ego", d.min_speed_ego},
                     {"stationary_speed", d.stationary_speed}};
  doc["bounds"] = {{"lambda_min_speed", cfg.bounds.lambda_min_speed},
                   {"beta_min_mode", cfg.bounds.beta_min_mode == BetaMinMode::AllSamples
                                         ? "all_samples"
                                         : "per_occurrence_max"},
                   {"percentile", cfg.bounds.percentile ? json(*cfg.bounds.percentile) : json(nullptr)}};
  doc["pipeline"] = {{"ego_classes", cfg.ego_policy == EgoPolicy::CarsOnly ? "car" : "vehicle"}};
  return doc;
}

PipelineConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file: " + path.string());
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError("config file " + path.string() + ": " + e.what());
  }
  return config_from_json(doc);
}

}  // namespace rfb
