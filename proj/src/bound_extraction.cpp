#include "rfbounds/bound_extraction.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

namespace rfb {
namespace {

constexpr std::array kS1Vars = {VariableId::V_LAT_MAX, VariableId::A_LAT_MAX, VariableId::B_LAT_MIN,
                                VariableId::H_MAX, VariableId::LAMBDA_MAX};
constexpr std::array kS2Vars = {VariableId::B_LON_MAX};
constexpr std::array kS3Vars = {VariableId::A_LON_MAX, VariableId::B_LON_MIN};
constexpr std::array kS4Vars = {VariableId::V_LON_MAX, VariableId::V_LAT_MAX,  VariableId::A_LON_MAX,
                                VariableId::A_LAT_MAX, VariableId::B_LON_MAX,  VariableId::B_LON_MIN,
                                VariableId::B_LAT_MIN, VariableId::H_RATE_MAX, VariableId::LAMBDA_MAX};

constexpr std::array kAllClasses = {ClassGroup::Pedestrian, ClassGroup::Cyclist,
                                    ClassGroup::Motorcyclist, ClassGroup::Vehicle};
constexpr std::array kVruClasses = {ClassGroup::Pedestrian, ClassGroup::Cyclist};

constexpr std::array kAllVariables = {
    VariableId::V_LON_MAX, VariableId::V_LAT_MAX, VariableId::A_LON_MAX, VariableId::A_LAT_MAX,
    VariableId::B_LON_MAX, VariableId::B_LON_MIN, VariableId::B_LAT_MIN, VariableId::H_MAX,
    VariableId::H_RATE_MAX, VariableId::LAMBDA_MAX};

// True when `a` should replace `b` as the extreme.
bool better(VariableId v, const Extreme& a, const Extreme& b) {
  if (a.value != b.value) return is_minimum(v) ? a.value < b.value : a.value > b.value;
  return a.where.key() < b.where.key();
}

bool candidate_less(const Extreme& a, const Extreme& b) {
  if (a.value != b.value) return a.value < b.value;
  return a.where.key() < b.where.key();
}

Provenance provenance_for(const ScenarioOccurrence& occ, int frame) {
  return {occ.recording_id, occ.ego_id,  occ.subject_id, frame,
          occ.frame_start,  occ.frame_end, occ.reference_heading};
}

}  // namespace

std::string_view to_string(VariableId v) {
  switch (v) {
    case VariableId::V_LON_MAX:
      return "v_lon_max";
    case VariableId::V_LAT_MAX:
      return "v_lat_max";
    case VariableId::A_LON_MAX:
      return "a_lon_max";
    case VariableId::A_LAT_MAX:
      return "a_lat_max";
    case VariableId::B_LON_MAX:
      return "b_lon_max";
    case VariableId::B_LON_MIN:
      return "b_lon_min";
    case VariableId::B_LAT_MIN:
      return "b_lat_min";
    case VariableId::H_MAX:
      return "h_max";
    case VariableId::H_RATE_MAX:
      return "h_rate_max";
    case VariableId::LAMBDA_MAX:
      return "lambda_max";
  }
  return "?";
}

std::optional<VariableId> variable_from_name(std::string_view name) {
  for (VariableId v : kAllVariables) {
    if (to_string(v) == name) return v;
  }
  return std::nullopt;
}

std::string_view units(VariableId v) {
  switch (v) {
    case VariableId::V_LON_MAX:
    case VariableId::V_LAT_MAX:
      return "m/s";
    case VariableId::A_LON_MAX:
    case VariableId::A_LAT_MAX:
    case VariableId::B_LON_MAX:
    case VariableId::B_LON_MIN:
    case VariableId::B_LAT_MIN:
      return "m/s^2";
    case VariableId::H_MAX:
      return "deg";
    case VariableId::H_RATE_MAX:
      return "deg/s";
    case VariableId::LAMBDA_MAX:
      return "m";
  }
  return "";
}

bool is_minimum(VariableId v) { return v == VariableId::B_LON_MIN || v == VariableId::B_LAT_MIN; }

std::span<const VariableId> applicable_variables(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return kS1Vars;
    case Scenario::S2:
      return kS2Vars;
    case Scenario::S3:
      return kS3Vars;
    case Scenario::S4:
      return kS4Vars;
  }
  return {};
}

bool is_applicable(Scenario s, VariableId v) {
  const auto vars = applicable_variables(s);
  return std::find(vars.begin(), vars.end(), v) != vars.end();
}

std::span<const ClassGroup> report_classes(Scenario s) {
  if (s == Scenario::S4) return kVruClasses;
  return kAllClasses;
}

double sample_quantity(VariableId v, const KinematicSample& s) {
  switch (v) {
    case VariableId::V_LON_MAX:
      return std::abs(s.v_lon);
    case VariableId::V_LAT_MAX:
      return std::abs(s.v_lat);
    case VariableId::A_LON_MAX:
      return std::abs(s.a_lon);
    case VariableId::A_LAT_MAX:
      return std::abs(s.a_lat);
    case VariableId::B_LON_MAX:
    case VariableId::B_LON_MIN:
      return s.beta_lon;
    case VariableId::B_LAT_MIN:
      return s.beta_lat;
    case VariableId::H_MAX:
      return s.h;
    case VariableId::H_RATE_MAX:
      return std::abs(s.h_rate);
    case VariableId::LAMBDA_MAX:
      break;
  }
  throw BoundsError("lambda_max is not a per-sample quantity");
}

BoundAccumulator::BoundAccumulator(BoundsConfig config) : config_(config) {
  if (config_.percentile && !(*config_.percentile > 0.0 && *config_.percentile <= 100.0)) {
    throw BoundsError("percentile must lie in (0, 100]");
  }
}

void BoundAccumulator::offer(BoundCell& cell, VariableId v, double value, const Provenance& where) {
  const Extreme cand{value, where};
  auto it = cell.extremes.find(v);
  if (it == cell.extremes.end()) {
    cell.extremes.emplace(v, cand);
  } else if (better(v, cand, it->second)) {
    it->second = cand;
  }
  if (config_.percentile) cell.candidates[v].push_back(cand);
}

void BoundAccumulator::add(const ScenarioOccurrence& occ,
                           std::span<const KinematicSample> samples) {
  const std::size_t expected = static_cast<std::size_t>(occ.frames());
  if (samples.size() != expected || samples.front().frame != occ.frame_start ||
      samples.back().frame != occ.frame_end) {
    throw BoundsError("samples do not cover occurrence frames [" + std::to_string(occ.frame_start) +
                      ", " + std::to_string(occ.frame_end) + "]");
  }
  BoundCell& cell = cells_[{occ.scenario, occ.subject_class}];
  cell.n_cases += 1;

  for (VariableId v : applicable_variables(occ.scenario)) {
    if (v == VariableId::LAMBDA_MAX) {
      std::vector<Vec2> pos(samples.size());
      std::vector<double> fwd(samples.size());
      for (std::size_t i = 0; i < samples.size(); ++i) {
        pos[i] = samples[i].position;
        fwd[i] = samples[i].v_lon;
      }
      if (auto lf = lateral_fluctuation(pos, fwd, config_.lambda_min_speed)) {
        offer(cell, v, lf->lambda_max, provenance_for(occ, samples[lf->max_index].frame));
      }
      continue;
    }
    const bool per_occ_peak = is_minimum(v) && config_.beta_min_mode == BetaMinMode::PerOccurrenceMax;
    if (per_occ_peak) {
      std::optional<Extreme> peak;
      for (const KinematicSample& s : samples) {
        const double q = sample_quantity(v, s);
        if (q <= 0.0) continue;
        Extreme e{q, provenance_for(occ, s.frame)};
        if (!peak || better(VariableId::B_LON_MAX, e, *peak)) peak = e;
      }
      if (peak) offer(cell, v, peak->value, peak->where);
      continue;
    }
    // Sample-wise: keep only the occurrence's own extreme unless percentiles need them all.
    std::optional<Extreme> best;
    for (const KinematicSample& s : samples) {
      const double q = sample_quantity(v, s);
      if (is_minimum(v) && q <= 0.0) continue;
      Extreme e{q, provenance_for(occ, s.frame)};
      if (config_.percentile) {
        offer(cell, v, e.value, e.where);
      } else if (!best || better(v, e, *best)) {
        best = e;
      }
    }
    if (best) offer(cell, v, best->value, best->where);
  }
}

void BoundAccumulator::merge(const BoundAccumulator& other) {
  if (!(other.config_ == config_)) throw BoundsError("cannot merge accumulators with different configs");
  for (const auto& [key, src] : other.cells_) {
    BoundCell& dst = cells_[key];
    dst.n_cases += src.n_cases;
    for (const auto& [v, e] : src.extremes) {
      auto it = dst.extremes.find(v);
      if (it == dst.extremes.end()) {
        dst.extremes.emplace(v, e);
      } else if (better(v, e, it->second)) {
        it->second = e;
      }
    }
    for (const auto& [v, list] : src.candidates) {
      auto& mine = dst.candidates[v];
      mine.insert(mine.end(), list.begin(), list.end());
    }
  }
  // Canonical order keeps equality independent of merge order.
  for (auto& [key, c] : cells_) {
    for (auto& [v, list] : c.candidates) std::sort(list.begin(), list.end(), candidate_less);
  }
}

void BoundAccumulator::set_cases(Scenario s, ClassGroup c, std::size_t n_cases) {
  cells_[{s, c}].n_cases = n_cases;
}

void BoundAccumulator::set_value(Scenario s, ClassGroup c, VariableId v, double value,
                                 Provenance where) {
  if (!is_applicable(s, v)) {
    throw BoundsError(std::string(to_string(v)) + " is not applicable to " + std::string(to_string(s)));
  }
  cells_[{s, c}].extremes[v] = Extreme{value, where};
}

const BoundCell* BoundAccumulator::cell(Scenario s, ClassGroup c) const {
  auto it = cells_.find({s, c});
  return it == cells_.end() ? nullptr : &it->second;
}

std::size_t BoundAccumulator::total_cases() const {
  std::size_t n = 0;
  for (const auto& [key, c] : cells_) n += c.n_cases;
  return n;
}

BoundAccumulator accumulate_occurrence(BoundAccumulator acc, const ScenarioOccurrence& occ,
                                       std::span<const KinematicSample> samples) {
  acc.add(occ, samples);
  return acc;
}

BoundAccumulator merge_accumulators(const BoundAccumulator& a, const BoundAccumulator& b) {
  BoundAccumulator out = a;
  out.merge(b);
  return out;
}

std::span<const KinematicSample> occurrence_window(std::span<const KinematicSample> track_samples,
                                                   const ScenarioOccurrence& occ) {
  if (track_samples.empty()) throw BoundsError("no samples");
  const int first = track_samples.front().frame;
  const int last = track_samples.back().frame;
  if (occ.frame_start < first || occ.frame_end > last || occ.frame_end < occ.frame_start) {
    throw BoundsError("occurrence interval outside the subject's samples");
  }
  return track_samples.subspan(static_cast<std::size_t>(occ.frame_start - first),
                               static_cast<std::size_t>(occ.frames()));
}

BoundsReport finalize(const BoundAccumulator& acc) {
  BoundsReport report;
  const auto& pct = acc.config().percentile;
  for (Scenario s : kAllScenarios) {
    ScenarioTable table;
    table.scenario = s;
    for (ClassGroup c : report_classes(s)) {
      ClassColumn col;
      col.class_group = c;
      const BoundCell* cell = acc.cell(s, c);
      if (cell != nullptr) col.n_cases = cell->n_cases;
      for (VariableId v : applicable_variables(s)) {
        BoundValue bv;
        bv.variable = v;
        if (cell != nullptr) {
          auto cand = cell->candidates.find(v);
          if (pct && cand != cell->candidates.end() && !cand->second.empty()) {
            std::vector<Extreme> sorted = cand->second;
            std::sort(sorted.begin(), sorted.end(), candidate_less);
            // Nearest rank, so the reported bound is always an observed sample.
            const double p = is_minimum(v) ? 100.0 - *pct : *pct;
            const double rank = std::ceil(p / 100.0 * static_cast<double>(sorted.size()));
            const std::size_t idx =
                static_cast<std::size_t>(std::clamp(rank, 1.0, static_cast<double>(sorted.size()))) - 1;
            bv.value = sorted[idx].value;
            bv.provenance = sorted[idx].where;
          } else if (auto it = cell->extremes.find(v); it != cell->extremes.end()) {
            bv.value = it->second.value;
            bv.provenance = it->second.where;
          }
        }
        col.values.push_back(bv);
      }
      table.columns.push_back(std::move(col));
    }
    // Flag lateral speed bounds of zero next to non-zero lateral acceleration.
    for (const ClassColumn& col : table.columns) {
      std::optional<double> vlat;
      std::optional<double> alat;
      for (const BoundValue& bv : col.values) {
        if (bv.variable == VariableId::V_LAT_MAX) vlat = bv.value;
        if (bv.variable == VariableId::A_LAT_MAX) alat = bv.value;
      }
      if (vlat && alat && *vlat == 0.0 && *alat > 0.0) {
        table.notes.push_back(std::string(to_string(col.class_group)) +
                              ": v_lat_max is 0 while a_lat_max > 0");
      }
    }
    report.tables.push_back(std::move(table));
  }
  return report;
}

}  // namespace rfb
