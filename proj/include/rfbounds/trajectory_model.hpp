#pragma once

#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "rfbounds/geometry.hpp"

namespace rfb {

enum class ClassGroup { Pedestrian, Cyclist, Motorcyclist, Vehicle };

inline constexpr ClassGroup kAllClassGroups[] = {ClassGroup::Pedestrian, ClassGroup::Cyclist,
                                                 ClassGroup::Motorcyclist, ClassGroup::Vehicle};

std::string_view to_string(ClassGroup c);
std::optional<ClassGroup> class_group_from_name(std::string_view name);

/// Resolves a raw dataset label (car, van, bus, truck, bicycle, ...). Case-insensitive.
std::optional<ClassGroup> class_group_from_label(std::string_view raw_label);

class ModelError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Positions are bounding-box centres in the recording's local metric frame.
struct TrackState {
  int frame = 0;
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
  double heading = 0.0;  // degrees, [0, 360), counterclockwise from +x

  bool operator==(const TrackState&) const = default;
};

struct Track {
  int track_id = 0;
  ClassGroup class_group = ClassGroup::Vehicle;
  std::string raw_class;
  double length = 0.0;
  double width = 0.0;
  std::vector<TrackState> states;

  int first_frame() const { return states.front().frame; }
  int last_frame() const { return states.back().frame; }
  bool alive_at(int frame) const { return frame >= first_frame() && frame <= last_frame(); }
  /// nullptr when the track is not alive at `frame`.
  const TrackState* state_at(int frame) const;

  bool operator==(const Track&) const = default;
};

struct ModelOptions {
  // 13 frames ~ 0.5 s at 25 fps
  int min_track_frames = 13;
};

/// Immutable once built. Tracks shorter than ModelOptions::min_track_frames are dropped
/// by make_recording; any other invariant violation throws ModelError.
class Recording {
 public:
  Recording() = default;

  int recording_id() const { return recording_id_; }
  double frame_rate() const { return frame_rate_; }
  std::optional<double> speed_limit() const { return speed_limit_; }
  const std::map<int, Track>& tracks() const { return tracks_; }
  const Track& track(int track_id) const;
  const Track* find_track(int track_id) const;
  const std::vector<int>& dropped_track_ids() const { return dropped_; }

  bool operator==(const Recording& o) const {
    return recording_id_ == o.recording_id_ && frame_rate_ == o.frame_rate_ &&
           speed_limit_ == o.speed_limit_ && tracks_ == o.tracks_;
  }

  friend Recording make_recording(int, double, std::vector<Track>, std::optional<double>,
                                  const ModelOptions&);

 private:
  int recording_id_ = 0;
  double frame_rate_ = 25.0;
  std::optional<double> speed_limit_;
  std::map<int, Track> tracks_;
  std::vector<int> dropped_;
};

Recording make_recording(int recording_id, double frame_rate, std::vector<Track> tracks,
                         std::optional<double> speed_limit = std::nullopt,
                         const ModelOptions& options = {});

/// Validates a single track against the model invariants; throws ModelError.
void validate_track(const Track& track);

struct IndexedState {
  int track_id = 0;
  TrackState state;

  bool operator==(const IndexedState&) const = default;
};

/// frame -> states alive at that frame, sorted by track_id.
class FrameIndex {
 public:
  static FrameIndex build(const Recording& recording);

  /// Number of frames with at least one active state.
  std::size_t frame_count() const { return populated_; }
  bool empty() const { return populated_ == 0; }
  int first_frame() const { return first_frame_; }
  int last_frame() const { return first_frame_ + static_cast<int>(frames_.size()) - 1; }

  /// Empty span outside the recorded range.
  std::span<const IndexedState> at(int frame) const;

  std::vector<IndexedState> states_in_radius(int frame, Vec2 center, double radius) const;

  /// Flattened contents in (frame, track_id) order.
  std::vector<IndexedState> all() const;

 private:
  int first_frame_ = 0;
  std::size_t populated_ = 0;
  std::vector<std::vector<IndexedState>> frames_;
};

}  // namespace rfb
