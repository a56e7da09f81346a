#include "rfbounds/ingestion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <regex>

#include "rfbounds/csv.hpp"

namespace rfb {
namespace {

namespace fs = std::filesystem;

constexpr std::array kKnownTrackColumns = {
    "recordingId", "trackId",       "frame",         "trackLifetime",   "xCenter",
    "yCenter",     "heading",       "width",         "length",          "xVelocity",
    "yVelocity",   "xAcceleration", "yAcceleration", "lonVelocity",     "latVelocity",
    "lonAcceleration", "latAcceleration"};

struct TrackMeta {
  std::string label;
  std::optional<double> width;
  std::optional<double> length;
};

struct Row {
  std::size_t line = 0;
  int track_id = 0;
  int frame = 0;
  TrackState state;
  double width = 0.0;
  double length = 0.0;
};

std::size_t require_column(const csv::Table& t, std::string_view name) {
  auto c = t.column(name);
  if (!c) {
    throw IngestError("missing required column '" + std::string(name) + "' in " +
                      t.source.string());
  }
  return *c;
}

csv::Table read_table(const fs::path& p) {
  if (!fs::exists(p)) throw IngestError("missing file: " + p.string());
  try {
    return csv::read_file(p);
  } catch (const std::runtime_error& e) {
    throw IngestError(e.what());
  }
}

std::string pad2(int id) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d", id);
  return buf;
}

}  // namespace

RecordingFiles RecordingFiles::for_id(const fs::path& dir, int recording_id) {
  const std::string p = pad2(recording_id);
  return {dir / (p + "_tracks.csv"), dir / (p + "_tracksMeta.csv"),
          dir / (p + "_recordingMeta.csv")};
}

bool RecordingFiles::exist() const {
  return fs::exists(tracks) && fs::exists(tracks_meta) && fs::exists(recording_meta);
}

std::pair<Recording, IngestReport> load_recording(const RecordingFiles& files,
                                                  const IngestOptions& options) {
  IngestReport report;
  const csv::Table rec_meta = read_table(files.recording_meta);
  const csv::Table tracks_meta = read_table(files.tracks_meta);
  const csv::Table tracks = read_table(files.tracks);

  // Recording metadata: a single data row.
  if (rec_meta.rows.empty()) {
    throw IngestError("no data row in " + files.recording_meta.string());
  }
  const auto& meta_row = rec_meta.rows.front();
  const std::size_t c_rec = require_column(rec_meta, "recordingId");
  const std::size_t c_rate = require_column(rec_meta, "frameRate");
  auto field = [](const std::vector<std::string>& row, std::size_t i) -> std::string_view {
    return i < row.size() ? std::string_view(row[i]) : std::string_view();
  };
  const auto recording_id = csv::parse_int(field(meta_row, c_rec));
  const auto frame_rate = csv::parse_double(field(meta_row, c_rate));
  if (!recording_id) throw IngestError("bad recordingId in " + files.recording_meta.string());
  if (!frame_rate || !std::isfinite(*frame_rate) || *frame_rate <= 0.0) {
    throw IngestError("frameRate must be a positive number in " + files.recording_meta.string());
  }
  std::optional<double> speed_limit;
  if (auto c = rec_meta.column("speedLimit")) {
    auto v = csv::parse_double(field(meta_row, *c));
    if (v && std::isfinite(*v) && *v > 0.0) speed_limit = *v;
  }

  // Per-track metadata.
  std::map<int, TrackMeta> metas;
  {
    const std::size_t c_id = require_column(tracks_meta, "trackId");
    const std::size_t c_class = require_column(tracks_meta, "class");
    const auto c_w = tracks_meta.column("width");
    const auto c_l = tracks_meta.column("length");
    for (std::size_t r = 0; r < tracks_meta.rows.size(); ++r) {
      const auto& row = tracks_meta.rows[r];
      auto id = csv::parse_int(field(row, c_id));
      if (!id) {
        report.warnings.push_back("tracksMeta line " + std::to_string(tracks_meta.line_numbers[r]) +
                                  ": unparsable trackId, row ignored");
        continue;
      }
      TrackMeta m;
      m.label = std::string(field(row, c_class));
      if (c_w) m.width = csv::parse_double(field(row, *c_w));
      if (c_l) m.length = csv::parse_double(field(row, *c_l));
      if (!metas.emplace(static_cast<int>(*id), std::move(m)).second) {
        report.warnings.push_back("tracksMeta: duplicate trackId " + std::to_string(*id) +
                                  ", first entry kept");
      }
    }
  }

  // Track rows.
  for (const std::string& h : tracks.header) {
    if (std::find(kKnownTrackColumns.begin(), kKnownTrackColumns.end(), h) ==
        kKnownTrackColumns.end()) {
      report.warnings.push_back("ignoring unknown column '" + h + "' in " +
                                files.tracks.string());
    }
  }
  const std::size_t c_track = require_column(tracks, "trackId");
  const std::size_t c_frame = require_column(tracks, "frame");
  const std::array<std::size_t, 7> numeric_cols = {
      require_column(tracks, "xCenter"),       require_column(tracks, "yCenter"),
      require_column(tracks, "heading"),       require_column(tracks, "xVelocity"),
      require_column(tracks, "yVelocity"),     require_column(tracks, "xAcceleration"),
      require_column(tracks, "yAcceleration")};
  const auto c_row_rec = tracks.column("recordingId");
  const auto c_row_w = tracks.column("width");
  const auto c_row_l = tracks.column("length");

  auto reject_row = [&](std::size_t line, int track_id, std::string reason) {
    report.rows_rejected += 1;
    report.rejections.push_back({line, track_id, 1, std::move(reason)});
  };

  std::map<int, std::vector<Row>> by_track;
  report.rows_read = tracks.rows.size();
  for (std::size_t r = 0; r < tracks.rows.size(); ++r) {
    const auto& row = tracks.rows[r];
    const std::size_t line = tracks.line_numbers[r];
    if (row.size() != tracks.header.size()) {
      reject_row(line, -1, "expected " + std::to_string(tracks.header.size()) + " fields, got " +
                               std::to_string(row.size()));
      continue;
    }
    auto tid = csv::parse_int(row[c_track]);
    auto frame = csv::parse_int(row[c_frame]);
    if (!tid || !frame) {
      reject_row(line, -1, "unparsable trackId/frame");
      continue;
    }
    if (c_row_rec) {
      auto rid = csv::parse_int(row[*c_row_rec]);
      if (!rid || *rid != *recording_id) {
        reject_row(line, static_cast<int>(*tid), "recordingId does not match recording meta");
        continue;
      }
    }
    std::array<double, 7> v{};
    bool ok = true;
    for (std::size_t k = 0; k < 7; ++k) {
      auto d = csv::parse_double(row[numeric_cols[k]]);
      if (!d || !std::isfinite(*d)) {
        reject_row(line, static_cast<int>(*tid),
                   "non-finite or unparsable '" + tracks.header[numeric_cols[k]] + "'");
        ok = false;
        break;
      }
      v[k] = *d;
    }
    if (!ok) continue;
    Row out;
    out.line = line;
    out.track_id = static_cast<int>(*tid);
    out.frame = static_cast<int>(*frame);
    double heading = v[2];
    if (options.heading_units == HeadingUnits::Radians) heading = rad_to_deg(heading);
    out.state = TrackState{out.frame, {v[0], v[1]}, {v[3], v[4]}, {v[5], v[6]},
                           normalize_heading(heading)};
    for (auto [col, dst] : {std::pair{c_row_w, &out.width}, std::pair{c_row_l, &out.length}}) {
      if (!col) continue;
      auto d = csv::parse_double(row[*col]);
      if (d && std::isfinite(*d)) *dst = *d;
    }
    by_track[out.track_id].push_back(std::move(out));
  }

  auto reject_track = [&](int track_id, std::size_t rows, std::string reason) {
    report.rows_rejected += rows;
    report.rejections.push_back({0, track_id, rows, reason});
    report.warnings.push_back("track " + std::to_string(track_id) + " rejected: " + reason);
  };

  std::vector<Track> built;
  for (auto& [tid, rows] : by_track) {
    std::stable_sort(rows.begin(), rows.end(),
                     [](const Row& a, const Row& b) { return a.frame < b.frame; });
    auto meta = metas.find(tid);
    if (meta == metas.end()) {
      reject_track(tid, rows.size(), "no tracksMeta entry");
      continue;
    }
    auto group = class_group_from_label(meta->second.label);
    if (!group) {
      reject_track(tid, rows.size(), "unknown class label '" + meta->second.label + "'");
      continue;
    }
    bool monotone = true;
    bool gap_free = true;
    for (std::size_t i = 1; i < rows.size(); ++i) {
      if (rows[i].frame == rows[i - 1].frame) monotone = false;
      else if (rows[i].frame != rows[i - 1].frame + 1) gap_free = false;
    }
    if (!monotone) {
      reject_track(tid, rows.size(), "non-monotone frames (duplicate frame numbers)");
      continue;
    }
    if (!gap_free) {
      reject_track(tid, rows.size(), "frame gap inside track");
      continue;
    }
    Track t;
    t.track_id = tid;
    t.class_group = *group;
    t.raw_class = meta->second.label;
    t.width = meta->second.width.value_or(rows.front().width);
    t.length = meta->second.length.value_or(rows.front().length);
    if (t.class_group != ClassGroup::Pedestrian && !(t.width > 0.0 && t.length > 0.0)) {
      reject_track(tid, rows.size(), "non-positive footprint for a non-pedestrian");
      continue;
    }
    if (t.class_group == ClassGroup::Pedestrian) {
      t.width = std::max(t.width, 0.0);
      t.length = std::max(t.length, 0.0);
    }
    if (static_cast<int>(rows.size()) < options.min_track_frames) {
      reject_track(tid, rows.size(),
                   "shorter than " + std::to_string(options.min_track_frames) + " frames");
      continue;
    }
    t.states.reserve(rows.size());
    for (const Row& r : rows) t.states.push_back(r.state);
    report.rows_accepted += rows.size();
    built.push_back(std::move(t));
  }
  for (const auto& [tid, meta] : metas) {
    if (!by_track.contains(tid)) {
      report.warnings.push_back("tracksMeta lists track " + std::to_string(tid) +
                                " with no rows");
    }
  }

  Recording rec = make_recording(static_cast<int>(*recording_id), *frame_rate, std::move(built),
                                 speed_limit, ModelOptions{1});
  report.tracks_built = rec.tracks().size();
  return {std::move(rec), std::move(report)};
}

std::vector<int> discover_recordings(const fs::path& dir) {
  std::vector<int> ids;
  if (!fs::is_directory(dir)) return ids;
  static const std::regex pattern(R"(^(\d+)_tracks\.csv$)");
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    std::smatch m;
    if (!std::regex_match(name, m, pattern)) continue;
    const int id = std::stoi(m[1].str());
    if (RecordingFiles::for_id(dir, id).exist()) ids.push_back(id);
  }
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  return ids;
}

RecordingFiles write_recording(const Recording& recording, const fs::path& dir) {
  fs::create_directories(dir);
  const RecordingFiles files = RecordingFiles::for_id(dir, recording.recording_id());
  using csv::format_double;
  const std::string rid = std::to_string(recording.recording_id());

  std::ofstream tracks(files.tracks, std::ios::binary);
  tracks << "recordingId,trackId,frame,trackLifetime,xCenter,yCenter,heading,width,length,"
            "xVelocity,yVelocity,xAcceleration,yAcceleration,lonVelocity,latVelocity,"
            "lonAcceleration,latAcceleration\n";
  std::ofstream meta(files.tracks_meta, std::ios::binary);
  meta << "recordingId,trackId,initialFrame,finalFrame,numFrames,width,length,class\n";
  for (const auto& [id, t] : recording.tracks()) {
    meta << rid << ',' << id << ',' << t.first_frame() << ',' << t.last_frame() << ','
         << t.states.size() << ',' << format_double(t.width) << ',' << format_double(t.length)
         << ',' << t.raw_class << '\n';
    for (const TrackState& s : t.states) {
      const Vec2 u = unit_from_heading(s.heading);
      const double lon_v = dot(s.velocity, u);
      const double lat_v = cross(u, s.velocity);
      const double lon_a = dot(s.acceleration, u);
      const double lat_a = cross(u, s.acceleration);
      tracks << rid << ',' << id << ',' << s.frame << ',' << (s.frame - t.first_frame()) << ','
             << format_double(s.position.x) << ',' << format_double(s.position.y) << ','
             << format_double(s.heading) << ',' << format_double(t.width) << ','
             << format_double(t.length) << ',' << format_double(s.velocity.x) << ','
             << format_double(s.velocity.y) << ',' << format_double(s.acceleration.x) << ','
             << format_double(s.acceleration.y) << ',' << format_double(lon_v) << ','
             << format_double(lat_v) << ',' << format_double(lon_a) << ','
             << format_double(lat_a) << '\n';
    }
  }
  std::ofstream rmeta(files.recording_meta, std::ios::binary);
  rmeta << "recordingId,frameRate,speedLimit,numTracks\n"
        << rid << ',' << format_double(recording.frame_rate()) << ','
        << (recording.speed_limit() ? format_double(*recording.speed_limit()) : "-1") << ','
        << recording.tracks().size() << '\n';
  if (!tracks || !meta || !rmeta) throw IngestError("failed writing recording to " + dir.string());
  return files;
}

}  // namespace rfb
