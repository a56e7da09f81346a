// rfbounds command-line front end: extract, synth, audit.

#include <exception>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "rfbounds/config.hpp"
#include "rfbounds/ingestion.hpp"
#include "rfbounds/pipeline.hpp"
#include "rfbounds/report.hpp"
#include "rfbounds/synthetic.hpp"

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitNoRecordings = 2;
constexpr int kExitConfig = 3;

std::vector<int> parse_id_list(const std::string& text) {
  std::vector<int> ids;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.empty()) continue;
    std::size_t used = 0;
    const int id = std::stoi(item, &used);
    if (used != item.size()) throw std::invalid_argument("bad recording id '" + item + "'");
    ids.push_back(id);
  }
  return ids;
}

int run_extract(const std::string& dataset, const std::string& recordings,
                const std::string& config_path, const std::string& out, const std::string& format,
                int jobs) {
  rfb::ExtractOptions opts;
  opts.dataset_dir = dataset;
  opts.jobs = jobs;
  try {
    if (!config_path.empty()) opts.config = rfb::load_config(config_path);
  } catch (const rfb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  if (!recordings.empty()) {
    try {
      opts.recording_ids = parse_id_list(recordings);
    } catch (const std::exception& e) {
      std::cerr << "error: --recordings: " << e.what() << "\n";
      return kExitFailure;
    }
  }

  rfb::ExtractionResult result;
  try {
    result = rfb::extract(opts);
  } catch (const rfb::NoRecordingsError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNoRecordings;
  } catch (const rfb::ConfigError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const rfb::DetectionError& e) {
    std::cerr << "error: invalid detector config: " << e.what() << "\n";
    return kExitConfig;
  }
  for (const std::string& w : result.manifest.warnings) std::cerr << "warning: " << w << "\n";

  rfb::write_artifacts(result, out);
  if (format == "table") {
    std::cout << rfb::render_table(result.report);
  } else if (format == "csv") {
    std::cout << rfb::render_csv(result.report);
  } else {
    std::cout << rfb::report_to_json(rfb::make_document(result)).dump(2) << "\n";
  }
  std::cerr << "processed " << result.manifest.recording_ids.size() << " recording(s), "
            << result.manifest.total_occurrences() << " occurrence(s) in "
            << result.manifest.wall_seconds << " s; artifacts in " << out << "\n";
  return 0;
}

int run_synth(const std::string& scene_path, const std::string& out) {
  const rfb::SceneSpec scene = rfb::load_scene(scene_path);
  const rfb::Recording rec = rfb::generate_synthetic(scene);
  const rfb::RecordingFiles files = rfb::write_recording(rec, out);
  std::cerr << "wrote " << rec.tracks().size() << " track(s) to " << files.tracks.string() << "\n";
  return 0;
}

int run_audit(const std::string& report_path, const std::string& dataset) {
  const rfb::ReportDocument doc = rfb::load_report(report_path);
  const rfb::AuditResult res = rfb::audit(doc, dataset);
  for (const std::string& p : res.problems) std::cout << "MISMATCH " << p << "\n";
  std::cout << "checked " << res.checked << " bound(s), " << res.problems.size()
            << " problem(s)\n";
  return res.ok() ? 0 : kExitFailure;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Kinematic bound extraction from levelX-style trajectory recordings"};
  app.set_version_flag("--version", std::string(rfb::kToolVersion));
  app.require_subcommand(1);

  std::string dataset, recordings, config_path, out, format = "table";
  int jobs = 1;
  auto* extract = app.add_subcommand("extract", "detect scenarios and extract bounds");
  extract->add_option("--dataset", dataset, "directory with <NN>_tracks.csv triples")->required();
  extract->add_option("--recordings", recordings, "comma-separated recording ids");
  extract->add_option("--config", config_path, "JSON config file");
  extract->add_option("--out", out, "output directory")->required();
  extract->add_option("--format", format, "stdout format")
      ->check(CLI::IsMember({"table", "csv", "json"}));
  extract->add_option("--jobs", jobs, "worker threads")->check(CLI::PositiveNumber);

  std::string scene_path, synth_out;
  auto* synth = app.add_subcommand("synth", "generate a recording from a scene file");
  synth->add_option("--scene", scene_path, "scene JSON")->required();
  synth->add_option("--out", synth_out, "output directory")->required();

  std::string report_path, audit_dataset;
  auto* audit = app.add_subcommand("audit", "recompute every bound from its provenance");
  audit->add_option("--report", report_path, "report.json")->required();
  audit->add_option("--dataset", audit_dataset, "dataset directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*extract) return run_extract(dataset, recordings, config_path, out, format, jobs);
    if (*synth) return run_synth(scene_path, synth_out);
    if (*audit) return run_audit(report_path, audit_dataset);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitFailure;
  }
  return kExitFailure;
}
