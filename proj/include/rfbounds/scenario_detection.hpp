#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <utility>
#include <vector>

#include "rfbounds/trajectory_model.hpp"

namespace rfb {

enum class Scenario { S1, S2, S3, S4 };

inline constexpr Scenario kAllScenarios[] = {Scenario::S1, Scenario::S2, Scenario::S3,
                                             Scenario::S4};

std::string_view to_string(Scenario s);
std::optional<Scenario> scenario_from_name(std::string_view name);

class DetectionError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Band {
  double min = 0.0;
  double max = 0.0;
  bool operator==(const Band&) const = default;
};

struct CrosswalkZone {
  std::optional<int> recording_id;  // unset: applies to every recording
  std::vector<Vec2> polygon;
  bool operator==(const CrosswalkZone&) const = default;
};

/// Every threshold the detectors use. Distances in metres, angles in degrees, times in seconds.
struct DetectorConfig {
  Band s1_lateral_band{0.5, 6.0};      // |perpendicular offset| from the ego heading line
  double s1_heading_tol = 15.0;        // also the same-direction tolerance for S2/S3
  double s1_min_duration = 0.5;
  bool s1_vehicle_left_opposite_only = true;
  double s2_corridor_margin = 0.5;     // corridor half-width = ego width / 2 + margin
  double s2_max_gap = 30.0;
  double s2_behind_clear = 20.0;
  double s4_corridor_length = 25.0;
  Band s4_crossing_heading{45.0, 135.0};
  double s4_approach_margin = 2.0;     // band outside the corridor where approach counts
  std::vector<CrosswalkZone> s4_crosswalk_zones;
  int merge_gap_tol = 12;              // frames
  double min_duration = 0.5;           // S2-S4
  double min_speed_ego = 0.5;          // m/s
  double stationary_speed = 0.2;       // m/s; slower users count as stationary

  bool operator==(const DetectorConfig&) const = default;
};

/// Throws DetectionError on negative distances or heading bands outside [0, 180].
void validate(const DetectorConfig& config);

struct ScenarioOccurrence {
  Scenario scenario = Scenario::S1;
  int recording_id = 0;
  int ego_id = 0;
  int subject_id = 0;
  std::optional<int> context_id;  // S3: leading user at frame_start
  int frame_start = 0;
  int frame_end = 0;              // inclusive
  ClassGroup subject_class = ClassGroup::Pedestrian;
  double reference_heading = 0.0; // frozen at frame_start

  int frames() const { return frame_end - frame_start + 1; }
  bool operator==(const ScenarioOccurrence&) const = default;
};

struct FrameInterval {
  int start = 0;
  int end = 0;  // inclusive
  bool operator==(const FrameInterval&) const = default;
};

/// Maximal runs of `frames` (ascending, unique) whose gaps of missing frames are <= gap_tol;
/// a gap that contains a barrier frame is never bridged. Runs with fewer than min_len frames
/// are dropped.
std::vector<FrameInterval> merge_intervals(std::span<const int> frames, int gap_tol, int min_len,
                                           std::span<const int> barriers = {});

/// Minimum run length in frames for a duration in seconds.
int min_frames(double seconds, double frame_rate);

enum class EgoPolicy { CarsOnly, AllVehicles };

/// Tracks that may act as ego: raw class "car" (or any Vehicle) and not parked for the
/// whole track.
bool is_ego_candidate(const Track& track, const DetectorConfig& config, EgoPolicy policy);
std::vector<int> ego_candidates(const Recording& recording, const DetectorConfig& config,
                                EgoPolicy policy);

/// Raw per-frame predicate hits, keyed by (scenario, subject), before merging.
using HitFrames = std::map<std::pair<Scenario, int>, std::vector<int>>;

struct DetectionResult {
  std::vector<ScenarioOccurrence> occurrences;  // ordered by (scenario, subject, frame_start)
  HitFrames hits;
};

/// Single pass over the ego's lifetime evaluating all four scenario predicates.
DetectionResult detect(const Recording& recording, const FrameIndex& index, int ego_id,
                       const DetectorConfig& config);
DetectionResult detect(const Recording& recording, const FrameIndex& index, int ego_id,
                       const DetectorConfig& config, std::span<const Scenario> scenarios);

std::vector<ScenarioOccurrence> detect_s1(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config);
std::vector<ScenarioOccurrence> detect_s2(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config);
std::vector<ScenarioOccurrence> detect_s3(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config);
std::vector<ScenarioOccurrence> detect_s4(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config);

/// Re-checks an occurrence against the raw hits: both end frames must be hits and every
/// non-hit stretch inside must be a bridgeable gap (<= merge_gap_tol frames).
bool occurrence_consistent(const ScenarioOccurrence& occ, const HitFrames& hits,
                           const DetectorConfig& config);

bool point_in_polygon(Vec2 p, std::span<const Vec2> polygon);

}  // namespace rfb
