#include "rfbounds/pipeline.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "rfbounds/csv.hpp"
#include "rfbounds/ingestion.hpp"
#include "rfbounds/kinematics.hpp"
#include "rfbounds/scenario_detection.hpp"

namespace rfb {

using nlohmann::json;

std::size_t RunManifest::total_occurrences() const {
  std::size_t n = 0;
  for (const RecordingSummary& r : recordings) {
    for (const auto& [s, c] : r.occurrences) n += c;
  }
  return n;
}

json manifest_to_json(const RunManifest& m) {
  json recs = json::array();
  for (const RecordingSummary& r : m.recordings) {
    json counts = json::object();
    for (Scenario s : kAllScenarios) {
      auto it = r.occurrences.find(s);
      counts[std::string(to_string(s))] = it == r.occurrences.end() ? 0 : it->second;
    }
    recs.push_back({{"recording_id", r.recording_id},
                    {"tracks", r.tracks},
                    {"egos", r.egos},
                    {"rows_rejected", r.rows_rejected},
                    {"occurrences", counts}});
  }
  return {{"tool", "rfbounds"},
          {"tool_version", m.tool_version},
          {"timestamp", m.timestamp},
          {"wall_seconds", m.wall_seconds},
          {"dataset_paths", m.dataset_paths},
          {"recording_ids", m.recording_ids},
          {"config", m.config},
          {"recordings", recs},
          {"total_occurrences", m.total_occurrences()},
          {"skipped_occurrences", m.skipped_occurrences},
          {"warnings", m.warnings}};
}

namespace {

struct Task {
  std::size_t recording = 0;
  int ego_id = 0;
};

struct TaskResult {
  BoundAccumulator acc;
  std::vector<ScenarioOccurrence> occurrences;
  std::vector<std::string> warnings;
  std::size_t skipped = 0;
};

TaskResult run_task(const Recording& rec, const FrameIndex& index, int ego_id,
                    const PipelineConfig& cfg) {
  TaskResult out{BoundAccumulator(cfg.bounds), {}, {}, 0};
  DetectionResult det = detect(rec, index, ego_id, cfg.detector);
  for (const ScenarioOccurrence& occ : det.occurrences) {
    const Track& subject = rec.track(occ.subject_id);
    std::vector<KinematicSample> samples;
    try {
      samples = compute_samples(subject, rec.frame_rate(), cfg.kinematics, occ.reference_heading);
    } catch (const KinematicsError& e) {
      out.warnings.push_back("recording " + std::to_string(rec.recording_id()) + ", ego " +
                             std::to_string(ego_id) + ": skipped " +
                             std::string(to_string(occ.scenario)) + " occurrence: " + e.what());
      ++out.skipped;
      continue;
    }
    out.acc.add(occ, occurrence_window(samples, occ));
    out.occurrences.push_back(occ);
  }
  return out;
}

std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

}  // namespace

ExtractionResult extract_recordings(const std::vector<Recording>& recordings,
                                    const PipelineConfig& config, int jobs) {
  const auto t0 = std::chrono::steady_clock::now();
  validate(config.detector);

  std::vector<FrameIndex> indices;
  std::vector<Task> tasks;
  ExtractionResult result{BoundAccumulator(config.bounds), {}, {}, {}};
  result.manifest.config = config_to_json(config);

  for (std::size_t r = 0; r < recordings.size(); ++r) {
    const Recording& rec = recordings[r];
    indices.push_back(FrameIndex::build(rec));
    const std::vector<int> egos = ego_candidates(rec, config.detector, config.ego_policy);
    for (int e : egos) tasks.push_back({r, e});
    RecordingSummary summary;
    summary.recording_id = rec.recording_id();
    summary.tracks = rec.tracks().size();
    summary.egos = egos.size();
    result.manifest.recordings.push_back(summary);
    result.manifest.recording_ids.push_back(rec.recording_id());
  }

  std::vector<std::optional<TaskResult>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto worker = [&] {
    for (;;) {
      const std::size_t i = next.fetch_add(1);
      if (i >= tasks.size()) return;
      try {
        const Task& t = tasks[i];
        results[i] = run_task(recordings[t.recording], indices[t.recording], t.ego_id, config);
      } catch (...) {
        std::lock_guard lock(error_mutex);
        if (!error) error = std::current_exception();
        next.store(tasks.size());
        return;
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (std::thread& th : pool) th.join();
  }
  if (error) std::rethrow_exception(error);

  for (std::size_t i = 0; i < tasks.size(); ++i) {
    TaskResult& tr = *results[i];
    result.accumulator.merge(tr.acc);
    RecordingSummary& summary = result.manifest.recordings[tasks[i].recording];
    for (const ScenarioOccurrence& occ : tr.occurrences) summary.occurrences[occ.scenario] += 1;
    result.occurrences.insert(result.occurrences.end(), tr.occurrences.begin(), tr.occurrences.end());
    result.manifest.warnings.insert(result.manifest.warnings.end(), tr.warnings.begin(),
                                    tr.warnings.end());
    result.manifest.skipped_occurrences += tr.skipped;
  }
  result.report = finalize(result.accumulator);
  result.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.manifest.timestamp = utc_timestamp();
  return result;
}

ExtractionResult extract(const ExtractOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!std::filesystem::is_directory(options.dataset_dir)) {
    throw NoRecordingsError("dataset directory not found: " + options.dataset_dir.string());
  }
  const std::vector<int> available = discover_recordings(options.dataset_dir);
  std::vector<int> ids;
  std::vector<std::string> warnings;
  if (options.recording_ids) {
    const std::set<int> have(available.begin(), available.end());
    for (int id : *options.recording_ids) {
      if (have.contains(id)) {
        ids.push_back(id);
      } else {
        warnings.push_back("recording " + std::to_string(id) + " not found in dataset");
      }
    }
  } else {
    ids = available;
  }
  if (ids.empty()) {
    throw NoRecordingsError("no recordings found in " + options.dataset_dir.string());
  }

  std::vector<Recording> recordings;
  std::vector<std::size_t> rejected;
  for (int id : ids) {
    auto [rec, rep] = load_recording(RecordingFiles::for_id(options.dataset_dir, id),
                                     options.config.ingestion);
    for (const std::string& w : rep.warnings) {
      warnings.push_back("recording " + std::to_string(id) + ": " + w);
    }
    rejected.push_back(rep.rows_rejected);
    recordings.push_back(std::move(rec));
  }

  ExtractionResult result = extract_recordings(recordings, options.config, options.jobs);
  for (std::size_t i = 0; i < rejected.size(); ++i) {
    result.manifest.recordings[i].rows_rejected = rejected[i];
  }
  warnings.insert(warnings.end(), result.manifest.warnings.begin(), result.manifest.warnings.end());
  result.manifest.warnings = std::move(warnings);
  result.manifest.dataset_paths = {options.dataset_dir.string()};
  result.manifest.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

ReportDocument make_document(const ExtractionResult& result) {
  ReportDocument doc;
  doc.report = result.report;
  doc.config = result.manifest.config;
  doc.dataset_paths = result.manifest.dataset_paths;
  doc.recording_ids = result.manifest.recording_ids;
  return doc;
}

std::string occurrences_csv(const std::vector<ScenarioOccurrence>& occurrences) {
  std::ostringstream out;
  out << "scenario,recording_id,ego_id,subject_id,subject_class,context_id,frame_start,frame_end,"
         "reference_heading\n";
  for (const ScenarioOccurrence& o : occurrences) {
    out << to_string(o.scenario) << ',' << o.recording_id << ',' << o.ego_id << ','
        << o.subject_id << ',' << to_string(o.subject_class) << ','
        << (o.context_id ? std::to_string(*o.context_id) : "") << ',' << o.frame_start << ','
        << o.frame_end << ',' << csv::format_double(o.reference_heading) << '\n';
  }
  return out.str();
}

void write_artifacts(const ExtractionResult& result, const std::filesystem::path& out_dir) {
  std::filesystem::create_directories(out_dir);
  write_text(out_dir / "report.json", report_to_json(make_document(result)).dump(2) + "\n");
  write_text(out_dir / "report.txt", render_table(result.report));
  write_text(out_dir / "report.csv", render_csv(result.report));
  write_text(out_dir / "occurrences.csv", occurrences_csv(result.occurrences));
  write_text(out_dir / "manifest.json", manifest_to_json(result.manifest).dump(2) + "\n");
}

AuditResult audit(const ReportDocument& doc, const std::filesystem::path& dataset_dir) {
  AuditResult result;
  PipelineConfig cfg;
  try {
    cfg = config_from_json(doc.config);
  } catch (const ConfigError& e) {
    result.problems.push_back(std::string("embedded config: ") + e.what());
    return result;
  }

  std::map<int, std::optional<Recording>> cache;
  auto recording = [&](int id) -> const Recording* {
    auto it = cache.find(id);
    if (it == cache.end()) {
      std::optional<Recording> rec;
      const RecordingFiles files = RecordingFiles::for_id(dataset_dir, id);
      if (files.exist()) {
        try {
          rec = load_recording(files, cfg.ingestion).first;
        } catch (const std::exception&) {
          rec.reset();
        }
      }
      it = cache.emplace(id, std::move(rec)).first;
    }
    return it->second ? &*it->second : nullptr;
  };

  for (const ScenarioTable& t : doc.report.tables) {
    for (const ClassColumn& col : t.columns) {
      for (const BoundValue& bv : col.values) {
        if (!bv.value) continue;
        const std::string label = std::string(to_string(t.scenario)) + "/" +
                                  std::string(to_string(col.class_group)) + "/" +
                                  std::string(to_string(bv.variable));
        ++result.checked;
        if (!bv.provenance) {
          result.problems.push_back(label + ": no provenance");
          continue;
        }
        const Provenance& p = *bv.provenance;
        const Recording* rec = recording(p.recording_id);
        if (rec == nullptr) {
          result.problems.push_back(label + ": missing data: recording " +
                                    std::to_string(p.recording_id) + " not available");
          continue;
        }
        const Track* track = rec->find_track(p.subject_id);
        if (track == nullptr) {
          result.problems.push_back(label + ": missing data: track " +
                                    std::to_string(p.subject_id) + " not in recording " +
                                    std::to_string(p.recording_id));
          continue;
        }
        double recomputed = 0.0;
        try {
          const std::vector<KinematicSample> samples =
              compute_samples(*track, rec->frame_rate(), cfg.kinematics, p.reference_heading);
          ScenarioOccurrence occ;
          occ.frame_start = p.frame_start;
          occ.frame_end = p.frame_end;
          const auto window = occurrence_window(samples, occ);
          if (p.frame < p.frame_start || p.frame > p.frame_end) {
            throw BoundsError("provenance frame outside its occurrence");
          }
          if (bv.variable == VariableId::LAMBDA_MAX) {
            std::vector<Vec2> pos;
            std::vector<double> fwd;
            for (const KinematicSample& s : window) {
              pos.push_back(s.position);
              fwd.push_back(s.v_lon);
            }
            auto lf = lateral_fluctuation(pos, fwd, cfg.bounds.lambda_min_speed);
            if (!lf) throw BoundsError("no forward motion in the occurrence");
            recomputed = lf->lambda_max;
          } else {
            recomputed = sample_quantity(bv.variable, window[static_cast<std::size_t>(p.frame - p.frame_start)]);
          }
        } catch (const std::exception& e) {
          result.problems.push_back(label + ": " + e.what());
          continue;
        }
        const double tol = 1e-12 * std::max(1.0, std::abs(*bv.value));
        if (!(std::abs(recomputed - *bv.value) <= tol)) {
          result.problems.push_back(label + ": reported " + csv::format_double(*bv.value) +
                                    ", recomputed " + csv::format_double(recomputed) +
                                    " at recording " + std::to_string(p.recording_id) +
                                    " subject " + std::to_string(p.subject_id) + " frame " +
                                    std::to_string(p.frame));
        }
      }
    }
  }
  return result;
}

}  // namespace rfb
