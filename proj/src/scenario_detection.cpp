#include "rfbounds/scenario_detection.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <string>

namespace rfb {
namespace {

struct Relative {
  int id = 0;
  const Track* track = nullptr;
  const TrackState* state = nullptr;
  double s = 0.0;             // along the ego heading, from the ego centre
  double d = 0.0;             // perpendicular offset, + left
  double rel_heading = 0.0;   // [0, 180]
  double speed = 0.0;
  double extent = 0.0;        // half footprint projected on the ego axis
};

double half_extent_along(const Track& t, double rel_heading_deg) {
  if (t.class_group == ClassGroup::Pedestrian) return 0.0;
  const double r = deg_to_rad(rel_heading_deg);
  return std::abs(std::cos(r)) * t.length / 2.0 + std::abs(std::sin(r)) * t.width / 2.0;
}

bool is_vru(ClassGroup c) { return c == ClassGroup::Pedestrian || c == ClassGroup::Cyclist; }

bool wants(std::span<const Scenario> list, Scenario s) {
  return std::find(list.begin(), list.end(), s) != list.end();
}

bool in_band(double v, const Band& b) { return v >= b.min && v <= b.max; }

}  // namespace

std::string_view to_string(Scenario s) {
  switch (s) {
    case Scenario::S1:
      return "S1";
    case Scenario::S2:
      return "S2";
    case Scenario::S3:
      return "S3";
    case Scenario::S4:
      return "S4";
  }
  return "?";
}

std::optional<Scenario> scenario_from_name(std::string_view name) {
  for (Scenario s : kAllScenarios) {
    if (to_string(s) == name) return s;
  }
  return std::nullopt;
}

void validate(const DetectorConfig& c) {
  auto nonneg = [](double v, const char* what) {
    if (!(v >= 0.0) || !std::isfinite(v)) {
      throw DetectionError(std::string("detector config: ") + what + " must be >= 0");
    }
  };
  nonneg(c.s1_lateral_band.min, "s1_lateral_band.min");
  nonneg(c.s1_lateral_band.max, "s1_lateral_band.max");
  nonneg(c.s1_heading_tol, "s1_heading_tol");
  nonneg(c.s1_min_duration, "s1_min_duration");
  nonneg(c.s2_corridor_margin, "s2_corridor_margin");
  nonneg(c.s2_max_gap, "s2_max_gap");
  nonneg(c.s2_behind_clear, "s2_behind_clear");
  nonneg(c.s4_corridor_length, "s4_corridor_length");
  nonneg(c.s4_approach_margin, "s4_approach_margin");
  nonneg(c.min_duration, "min_duration");
  nonneg(c.min_speed_ego, "min_speed_ego");
  nonneg(c.stationary_speed, "stationary_speed");
  if (c.merge_gap_tol < 0) throw DetectionError("detector config: merge_gap_tol must be >= 0");
  if (c.s1_lateral_band.min > c.s1_lateral_band.max) {
    throw DetectionError("detector config: s1_lateral_band min exceeds max");
  }
  if (c.s1_heading_tol > 180.0) throw DetectionError("detector config: s1_heading_tol > 180");
  const Band& h = c.s4_crossing_heading;
  if (!(h.min >= 0.0 && h.max <= 180.0 && h.min <= h.max)) {
    throw DetectionError("detector config: s4_crossing_heading must lie within [0, 180]");
  }
  for (const CrosswalkZone& z : c.s4_crosswalk_zones) {
    if (z.polygon.size() < 3) throw DetectionError("detector config: crosswalk polygon needs >= 3 vertices");
  }
}

std::vector<FrameInterval> merge_intervals(std::span<const int> frames, int gap_tol, int min_len,
                                           std::span<const int> barriers) {
  std::vector<FrameInterval> out;
  if (frames.empty()) return out;
  auto barrier_between = [&](int a, int b) {
    auto it = std::upper_bound(barriers.begin(), barriers.end(), a);
    return it != barriers.end() && *it < b;
  };
  auto flush = [&](FrameInterval iv) {
    if (iv.end - iv.start + 1 >= min_len) out.push_back(iv);
  };
  FrameInterval cur{frames[0], frames[0]};
  for (std::size_t i = 1; i < frames.size(); ++i) {
    const int f = frames[i];
    const int missing = f - cur.end - 1;
    if (missing <= gap_tol && !barrier_between(cur.end, f)) {
      cur.end = f;
    } else {
      flush(cur);
      cur = {f, f};
    }
  }
  flush(cur);
  return out;
}

int min_frames(double seconds, double frame_rate) {
  return std::max(1, static_cast<int>(std::ceil(seconds * frame_rate - 1e-9)));
}

bool is_ego_candidate(const Track& track, const DetectorConfig& config, EgoPolicy policy) {
  if (track.class_group != ClassGroup::Vehicle) return false;
  if (policy == EgoPolicy::CarsOnly) {
    std::string label = track.raw_class;
    std::transform(label.begin(), label.end(), label.begin(),
                   [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
    if (label != "car") return false;
  }
  return std::any_of(track.states.begin(), track.states.end(), [&](const TrackState& s) {
    return norm(s.velocity) >= config.min_speed_ego;
  });
}

std::vector<int> ego_candidates(const Recording& recording, const DetectorConfig& config,
                                EgoPolicy policy) {
  std::vector<int> ids;
  for (const auto& [id, track] : recording.tracks()) {
    if (is_ego_candidate(track, config, policy)) ids.push_back(id);
  }
  return ids;
}

bool point_in_polygon(Vec2 p, std::span<const Vec2> poly) {
  bool inside = false;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++) {
    const Vec2& a = poly[i];
    const Vec2& b = poly[j];
    if ((a.y > p.y) != (b.y > p.y) && p.x < (b.x - a.x) * (p.y - a.y) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

DetectionResult detect(const Recording& recording, const FrameIndex& index, int ego_id,
                       const DetectorConfig& config) {
  return detect(recording, index, ego_id, config, kAllScenarios);
}

DetectionResult detect(const Recording& recording, const FrameIndex& index, int ego_id,
                       const DetectorConfig& config, std::span<const Scenario> scenarios) {
  const Track* ego = recording.find_track(ego_id);
  if (ego == nullptr) throw DetectionError("unknown ego id " + std::to_string(ego_id));
  if (ego->class_group != ClassGroup::Vehicle) {
    throw DetectionError("ego " + std::to_string(ego_id) + " is not a Vehicle");
  }
  validate(config);

  const bool want_s1 = wants(scenarios, Scenario::S1);
  const bool want_s23 = wants(scenarios, Scenario::S2) || wants(scenarios, Scenario::S3);
  const bool want_s4 = wants(scenarios, Scenario::S4);

  const double half_len = ego->length / 2.0;
  const double hw = ego->width / 2.0 + config.s2_corridor_margin;
  // Generous query radius: every predicate below is bounded well inside it.
  const double radius = half_len +
                        std::max({config.s2_max_gap, config.s2_behind_clear,
                                  config.s4_corridor_length}) +
                        hw + std::max(config.s4_approach_margin, config.s1_lateral_band.max) + 20.0;

  DetectionResult result;
  std::map<int, std::vector<int>> s2_barriers;
  std::map<std::pair<int, int>, int> s3_leader;  // (trailer, frame) -> leader
  std::map<int, std::vector<int>> s4_core;

  std::vector<Relative> rels;
  for (const TrackState& es : ego->states) {
    if (norm(es.velocity) < config.min_speed_ego) continue;
    const int f = es.frame;
    const Vec2 dir = unit_from_heading(es.heading);

    rels.clear();
    for (const IndexedState& e : index.states_in_radius(f, es.position, radius)) {
      if (e.track_id == ego_id) continue;
      const Track* t = recording.find_track(e.track_id);
      const TrackState* st = t->state_at(f);
      Relative r;
      r.id = e.track_id;
      r.track = t;
      r.state = st;
      const Vec2 rel = st->position - es.position;
      r.s = dot(rel, dir);
      r.d = cross(dir, rel);
      r.rel_heading = heading_difference(st->heading, es.heading);
      r.speed = norm(st->velocity);
      r.extent = half_extent_along(*t, r.rel_heading);
      rels.push_back(r);
    }

    if (want_s1) {
      for (const Relative& r : rels) {
        const double ad = std::abs(r.d);
        if (!in_band(ad, config.s1_lateral_band)) continue;
        if (std::abs(r.s) > half_len + r.extent) continue;
        const bool stationary = r.speed < config.stationary_speed;
        const bool parallel = r.rel_heading <= config.s1_heading_tol;
        const bool anti = r.rel_heading >= 180.0 - config.s1_heading_tol;
        bool ok = false;
        if (r.track->class_group == ClassGroup::Vehicle && config.s1_vehicle_left_opposite_only) {
          ok = r.d > 0.0 && (anti || stationary);
        } else {
          ok = parallel || anti || stationary;
        }
        if (ok) result.hits[{Scenario::S1, r.id}].push_back(f);
      }
    }

    if (want_s23) {
      const Relative* leader = nullptr;
      const Relative* trailer = nullptr;
      bool behind_occupied = false;
      for (const Relative& r : rels) {
        if (std::abs(r.d) > hw) continue;
        const bool same_dir = r.rel_heading <= config.s1_heading_tol;
        if (r.s > 0.0) {
          if (same_dir && (leader == nullptr || r.s < leader->s)) leader = &r;
        } else if (r.s < 0.0) {
          if (-r.s - half_len - r.extent <= config.s2_behind_clear) behind_occupied = true;
          if (same_dir && (trailer == nullptr || r.s > trailer->s)) trailer = &r;
        }
      }
      const bool leader_ok =
          leader != nullptr && leader->s - half_len - leader->extent <= config.s2_max_gap;
      const bool trailer_ok =
          trailer != nullptr && -trailer->s - half_len - trailer->extent <= config.s2_max_gap;
      if (leader_ok) {
        if (!behind_occupied) {
          result.hits[{Scenario::S2, leader->id}].push_back(f);
        } else {
          s2_barriers[leader->id].push_back(f);
        }
      }
      if (leader_ok && trailer_ok) {
        result.hits[{Scenario::S3, trailer->id}].push_back(f);
        s3_leader[{trailer->id, f}] = leader->id;
      }
    }

    if (want_s4) {
      for (const Relative& r : rels) {
        if (!is_vru(r.track->class_group)) continue;
        const double ahead = r.s - half_len;
        if (ahead < 0.0 || ahead - r.extent > config.s4_corridor_length) continue;
        const double ad = std::abs(r.d);
        const bool moving = r.speed >= config.stationary_speed;
        const bool crossing = in_band(r.rel_heading, config.s4_crossing_heading);
        if (ad <= hw) {
          if (crossing || !moving) {
            result.hits[{Scenario::S4, r.id}].push_back(f);
            s4_core[r.id].push_back(f);
          }
        } else if (ad <= hw + config.s4_approach_margin) {
          const double lateral = cross(dir, r.state->velocity);
          const bool inward = r.d > 0.0 ? lateral < 0.0 : lateral > 0.0;
          if ((moving && crossing && inward) || !moving) {
            result.hits[{Scenario::S4, r.id}].push_back(f);
          }
        }
      }
    }
  }

  const double fps = recording.frame_rate();
  const int s1_min = min_frames(config.s1_min_duration, fps);
  const int other_min = min_frames(config.min_duration, fps);
  auto make_occ = [&](Scenario sc, int subject, FrameInterval iv) {
    const Track& sub = recording.track(subject);
    ScenarioOccurrence occ;
    occ.scenario = sc;
    occ.recording_id = recording.recording_id();
    occ.ego_id = ego_id;
    occ.subject_id = subject;
    occ.frame_start = iv.start;
    occ.frame_end = iv.end;
    occ.subject_class = sub.class_group;
    occ.reference_heading = ego->state_at(iv.start)->heading;
    return occ;
  };

  for (const auto& [key, frames] : result.hits) {
    const auto [sc, subject] = key;
    if (!wants(scenarios, sc)) continue;
    const Track& sub = recording.track(subject);
    switch (sc) {
      case Scenario::S1:
        for (const FrameInterval& iv : merge_intervals(frames, config.merge_gap_tol, s1_min)) {
          ScenarioOccurrence occ = make_occ(sc, subject, iv);
          // Reference axis is whichever ego direction the subject is closer to, so users
          // travelling the other way are measured against their own direction of travel.
          const double sub_heading = sub.state_at(iv.start)->heading;
          if (heading_difference(sub_heading, occ.reference_heading) > 90.0) {
            occ.reference_heading = normalize_heading(occ.reference_heading + 180.0);
          }
          result.occurrences.push_back(occ);
        }
        break;
      case Scenario::S2: {
        const auto it = s2_barriers.find(subject);
        const std::span<const int> barriers =
            it == s2_barriers.end() ? std::span<const int>() : std::span<const int>(it->second);
        for (const FrameInterval& iv :
             merge_intervals(frames, config.merge_gap_tol, other_min, barriers)) {
          result.occurrences.push_back(make_occ(sc, subject, iv));
        }
        break;
      }
      case Scenario::S3:
        for (const FrameInterval& iv : merge_intervals(frames, config.merge_gap_tol, other_min)) {
          ScenarioOccurrence occ = make_occ(sc, subject, iv);
          occ.context_id = s3_leader.at({subject, iv.start});
          result.occurrences.push_back(occ);
        }
        break;
      case Scenario::S4: {
        const std::vector<int>& core = s4_core[subject];
        for (FrameInterval iv : merge_intervals(frames, config.merge_gap_tol, 1)) {
          auto first = std::lower_bound(core.begin(), core.end(), iv.start);
          if (first == core.end() || *first > iv.end) continue;  // never entered
          auto last = std::upper_bound(core.begin(), core.end(), iv.end);
          iv.end = *std::prev(last);
          if (iv.end - iv.start + 1 < other_min) continue;
          const Vec2 entry = sub.state_at(*first)->position;
          const bool in_crosswalk = std::any_of(
              config.s4_crosswalk_zones.begin(), config.s4_crosswalk_zones.end(),
              [&](const CrosswalkZone& z) {
                return (!z.recording_id || *z.recording_id == recording.recording_id()) &&
                       point_in_polygon(entry, z.polygon);
              });
          if (in_crosswalk) continue;
          result.occurrences.push_back(make_occ(sc, subject, iv));
        }
        break;
      }
    }
  }
  return result;
}

namespace {
std::vector<ScenarioOccurrence> detect_one(const Recording& recording, const FrameIndex& index,
                                           int ego_id, const DetectorConfig& config, Scenario s) {
  const Scenario only[] = {s};
  return detect(recording, index, ego_id, config, only).occurrences;
}
}  // namespace

std::vector<ScenarioOccurrence> detect_s1(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config) {
  return detect_one(recording, index, ego_id, config, Scenario::S1);
}
std::vector<ScenarioOccurrence> detect_s2(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config) {
  return detect_one(recording, index, ego_id, config, Scenario::S2);
}
std::vector<ScenarioOccurrence> detect_s3(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config) {
  return detect_one(recording, index, ego_id, config, Scenario::S3);
}
std::vector<ScenarioOccurrence> detect_s4(const Recording& recording, const FrameIndex& index,
                                          int ego_id, const DetectorConfig& config) {
  return detect_one(recording, index, ego_id, config, Scenario::S4);
}

bool occurrence_consistent(const ScenarioOccurrence& occ, const HitFrames& hits,
                           const DetectorConfig& config) {
  const auto it = hits.find({occ.scenario, occ.subject_id});
  if (it == hits.end()) return false;
  const std::vector<int>& f = it->second;
  auto lo = std::lower_bound(f.begin(), f.end(), occ.frame_start);
  if (lo == f.end() || *lo != occ.frame_start) return false;
  int prev = *lo;
  for (auto p = std::next(lo); p != f.end() && *p <= occ.frame_end; ++p) {
    if (*p - prev - 1 > config.merge_gap_tol) return false;
    prev = *p;
  }
  return prev == occ.frame_end;
}

}  // namespace rfb
