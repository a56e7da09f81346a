#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "rfbounds/trajectory_model.hpp"

namespace rfb {

/// Fatal ingestion failure (missing file, missing required column, bad metadata).
class IngestError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class HeadingUnits { Degrees, Radians };

struct IngestOptions {
  HeadingUnits heading_units = HeadingUnits::Degrees;
  int min_track_frames = ModelOptions{}.min_track_frames;
};

struct Rejection {
  std::size_t line = 0;  // 0 when the rejection covers a whole track
  int track_id = -1;
  std::size_t rows = 1;
  std::string reason;
};

struct IngestReport {
  std::size_t rows_read = 0;
  std::size_t rows_accepted = 0;
  std::size_t rows_rejected = 0;
  std::size_t tracks_built = 0;
  std::vector<Rejection> rejections;
  std::vector<std::string> warnings;
};

struct RecordingFiles {
  std::filesystem::path tracks;
  std::filesystem::path tracks_meta;
  std::filesystem::path recording_meta;

  /// `<dir>/<NN>_tracks.csv` etc., NN zero-padded to two digits.
  static RecordingFiles for_id(const std::filesystem::path& dir, int recording_id);
  bool exist() const;
};

/// Parses a levelXdata-style triple. lon/lat velocity columns are read but ignored.
std::pair<Recording, IngestReport> load_recording(const RecordingFiles& files,
                                                  const IngestOptions& options = {});

/// Recording ids with a complete `<NN>_tracks.csv` triple in `dir`, ascending.
std::vector<int> discover_recordings(const std::filesystem::path& dir);

/// Writes a recording as a levelXdata triple using round-trip exact number formatting.
RecordingFiles write_recording(const Recording& recording, const std::filesystem::path& dir);

}  // namespace rfb
