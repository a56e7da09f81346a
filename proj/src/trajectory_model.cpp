#include "rfbounds/trajectory_model.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <string>

namespace rfb {

std::string_view to_string(ClassGroup c) {
  switch (c) {
    case ClassGroup::Pedestrian:
      return "Pedestrian";
    case ClassGroup::Cyclist:
      return "Cyclist";
    case ClassGroup::Motorcyclist:
      return "Motorcyclist";
    case ClassGroup::Vehicle:
      return "Vehicle";
  }
  return "?";
}

std::optional<ClassGroup> class_group_from_name(std::string_view name) {
  for (ClassGroup c : kAllClassGroups) {
    if (to_string(c) == name) return c;
  }
  return std::nullopt;
}

std::optional<ClassGroup> class_group_from_label(std::string_view raw_label) {
  std::string label(raw_label);
  std::transform(label.begin(), label.end(), label.begin(),
                 [](unsigned char ch) { return static_cast<char>(std::tolower(ch)); });
  if (label == "car" || label == "van" || label == "bus" || label == "truck" ||
      label == "truck_bus") {
    return ClassGroup::Vehicle;
  }
  if (label == "bicycle") return ClassGroup::Cyclist;
  if (label == "motorcycle") return ClassGroup::Motorcyclist;
  if (label == "pedestrian") return ClassGroup::Pedestrian;
  return std::nullopt;
}

const TrackState* Track::state_at(int frame) const {
  if (states.empty() || !alive_at(frame)) return nullptr;
  return &states[static_cast<std::size_t>(frame - first_frame())];
}

void validate_track(const Track& track) {
  const std::string who = "track " + std::to_string(track.track_id);
  if (track.states.empty()) throw ModelError(who + ": no states");
  if (track.class_group != ClassGroup::Pedestrian && !(track.length > 0.0 && track.width > 0.0)) {
    throw ModelError(who + ": non-pedestrian track needs a positive footprint");
  }
  if (track.length < 0.0 || track.width < 0.0) throw ModelError(who + ": negative footprint");
  for (std::size_t i = 0; i < track.states.size(); ++i) {
    const TrackState& s = track.states[i];
    if (i > 0 && s.frame != track.states[i - 1].frame + 1) {
      throw ModelError(who + ": frames must increase by exactly 1 (at frame " +
                       std::to_string(s.frame) + ")");
    }
    if (!(s.heading >= 0.0 && s.heading < 360.0)) {
      throw ModelError(who + ": heading outside [0, 360)");
    }
    for (double v : {s.position.x, s.position.y, s.velocity.x, s.velocity.y, s.acceleration.x,
                     s.acceleration.y}) {
      if (!std::isfinite(v)) throw ModelError(who + ": non-finite state value");
    }
  }
}

const Track& Recording::track(int track_id) const {
  const Track* t = find_track(track_id);
  if (t == nullptr) throw ModelError("unknown track id " + std::to_string(track_id));
  return *t;
}

const Track* Recording::find_track(int track_id) const {
  auto it = tracks_.find(track_id);
  return it == tracks_.end() ? nullptr : &it->second;
}

Recording make_recording(int recording_id, double frame_rate, std::vector<Track> tracks,
                         std::optional<double> speed_limit, const ModelOptions& options) {
  if (!(frame_rate > 0.0) || !std::isfinite(frame_rate)) {
    throw ModelError("frame rate must be positive");
  }
  Recording rec;
  rec.recording_id_ = recording_id;
  rec.frame_rate_ = frame_rate;
  rec.speed_limit_ = speed_limit;
  for (Track& t : tracks) {
    validate_track(t);
    if (static_cast<int>(t.states.size()) < options.min_track_frames) {
      rec.dropped_.push_back(t.track_id);
      continue;
    }
    const int id = t.track_id;
    if (!rec.tracks_.emplace(id, std::move(t)).second) {
      throw ModelError("duplicate track id " + std::to_string(id));
    }
  }
  std::sort(rec.dropped_.begin(), rec.dropped_.end());
  return rec;
}

FrameIndex FrameIndex::build(const Recording& recording) {
  FrameIndex index;
  if (recording.tracks().empty()) return index;
  int lo = recording.tracks().begin()->second.first_frame();
  int hi = lo;
  for (const auto& [id, track] : recording.tracks()) {
    lo = std::min(lo, track.first_frame());
    hi = std::max(hi, track.last_frame());
  }
  index.first_frame_ = lo;
  index.frames_.resize(static_cast<std::size_t>(hi - lo + 1));
  // std::map iteration is ordered by track id, so each frame bucket ends up sorted.
  for (const auto& [id, track] : recording.tracks()) {
    for (const TrackState& s : track.states) {
      index.frames_[static_cast<std::size_t>(s.frame - lo)].push_back({id, s});
    }
  }
  index.populated_ = static_cast<std::size_t>(std::count_if(
      index.frames_.begin(), index.frames_.end(), [](const auto& f) { return !f.empty(); }));
  return index;
}

std::span<const IndexedState> FrameIndex::at(int frame) const {
  if (frames_.empty() || frame < first_frame_ || frame > last_frame()) return {};
  return frames_[static_cast<std::size_t>(frame - first_frame_)];
}

std::vector<IndexedState> FrameIndex::states_in_radius(int frame, Vec2 center,
                                                       double radius) const {
  if (radius < 0.0) throw ModelError("radius must be non-negative");
  std::vector<IndexedState> out;
  const double r2 = radius * radius;
  for (const IndexedState& e : at(frame)) {
    const Vec2 d = e.state.position - center;
    if (dot(d, d) <= r2) out.push_back(e);
  }
  return out;
}

std::vector<IndexedState> FrameIndex::all() const {
  std::vector<IndexedState> out;
  for (const auto& f : frames_) out.insert(out.end(), f.begin(), f.end());
  return out;
}

}  // namespace rfb
