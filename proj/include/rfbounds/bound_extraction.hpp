#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string_view>
#include <tuple>
#include <vector>

#include "rfbounds/kinematics.hpp"
#include "rfbounds/scenario_detection.hpp"

namespace rfb {

enum class VariableId {
  V_LON_MAX,
  V_LAT_MAX,
  A_LON_MAX,
  A_LAT_MAX,
  B_LON_MAX,
  B_LON_MIN,
  B_LAT_MIN,
  H_MAX,
  H_RATE_MAX,
  LAMBDA_MAX,
};

std::string_view to_string(VariableId v);  // "v_lat_max", ...
std::optional<VariableId> variable_from_name(std::string_view name);
std::string_view units(VariableId v);
bool is_minimum(VariableId v);

/// Applicable variables per scenario, in report row order.
std::span<const VariableId> applicable_variables(Scenario s);
bool is_applicable(Scenario s, VariableId v);
/// Classes reported for a scenario (S4 covers only pedestrians and cyclists).
std::span<const ClassGroup> report_classes(Scenario s);

/// Per-sample quantity whose extreme defines a variable (magnitudes for v/a, raw beta, h, |h'|).
/// Not defined for LAMBDA_MAX, which is per occurrence.
double sample_quantity(VariableId v, const KinematicSample& s);

class BoundsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Where an extreme was observed. The occurrence window and reference heading are kept so
/// the value can be recomputed from the raw data.
struct Provenance {
  int recording_id = 0;
  int ego_id = 0;
  int subject_id = 0;
  int frame = 0;
  int frame_start = 0;
  int frame_end = 0;
  double reference_heading = 0.0;

  auto key() const {
    return std::tuple(recording_id, ego_id, subject_id, frame, frame_start, frame_end);
  }
  bool operator==(const Provenance&) const = default;
};

struct Extreme {
  double value = 0.0;
  Provenance where;
  bool operator==(const Extreme&) const = default;
};

enum class BetaMinMode {
  AllSamples,        // minimum over every braking sample
  PerOccurrenceMax,  // minimum over each occurrence's peak braking
};

struct BoundsConfig {
  double lambda_min_speed = 0.3;          // m/s, forward-motion gate for lambda
  BetaMinMode beta_min_mode = BetaMinMode::AllSamples;
  std::optional<double> percentile;       // e.g. 99.9; raw extremes when unset

  bool operator==(const BoundsConfig&) const = default;
};

struct BoundCell {
  std::size_t n_cases = 0;
  std::map<VariableId, Extreme> extremes;
  std::map<VariableId, std::vector<Extreme>> candidates;  // percentile mode only

  bool operator==(const BoundCell&) const = default;
};

/// Extremal statistics per (scenario, class). merge() is associative and commutative, with
/// ties on value resolved towards the lexicographically smallest provenance.
class BoundAccumulator {
 public:
  explicit BoundAccumulator(BoundsConfig config = {});

  /// `samples` must cover exactly [occ.frame_start, occ.frame_end].
  void add(const ScenarioOccurrence& occ, std::span<const KinematicSample> samples);
  void merge(const BoundAccumulator& other);

  /// Direct injection of cases and values, bypassing add().
  void set_cases(Scenario s, ClassGroup c, std::size_t n_cases);
  void set_value(Scenario s, ClassGroup c, VariableId v, double value, Provenance where = {});

  const BoundCell* cell(Scenario s, ClassGroup c) const;
  const std::map<std::pair<Scenario, ClassGroup>, BoundCell>& cells() const { return cells_; }
  std::size_t total_cases() const;
  const BoundsConfig& config() const { return config_; }

  bool operator==(const BoundAccumulator&) const = default;

 private:
  void offer(BoundCell& cell, VariableId v, double value, const Provenance& where);

  BoundsConfig config_;
  std::map<std::pair<Scenario, ClassGroup>, BoundCell> cells_;
};

BoundAccumulator accumulate_occurrence(BoundAccumulator acc, const ScenarioOccurrence& occ,
                                       std::span<const KinematicSample> samples);
BoundAccumulator merge_accumulators(const BoundAccumulator& a, const BoundAccumulator& b);

/// Samples of `occ`'s interval out of a whole-track sample sequence.
std::span<const KinematicSample> occurrence_window(std::span<const KinematicSample> track_samples,
                                                   const ScenarioOccurrence& occ);

struct BoundValue {
  VariableId variable = VariableId::V_LON_MAX;
  std::optional<double> value;  // absent: no qualifying sample
  std::optional<Provenance> provenance;
  bool operator==(const BoundValue&) const = default;
};

struct ClassColumn {
  ClassGroup class_group = ClassGroup::Pedestrian;
  std::size_t n_cases = 0;
  std::vector<BoundValue> values;  // applicable_variables() order
  bool operator==(const ClassColumn&) const = default;
};

struct ScenarioTable {
  Scenario scenario = Scenario::S1;
  std::vector<ClassColumn> columns;  // report_classes() order
  std::vector<std::string> notes;
  bool operator==(const ScenarioTable&) const = default;
};

struct BoundsReport {
  std::vector<ScenarioTable> tables;  // S1..S4
  bool operator==(const BoundsReport&) const = default;
};

BoundsReport finalize(const BoundAccumulator& acc);

}  // namespace rfb
