#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "rfbounds/config.hpp"
#include "rfbounds/ingestion.hpp"
#include "rfbounds/kinematics.hpp"
#include "rfbounds/pipeline.hpp"
#include "rfbounds/report.hpp"
#include "rfbounds/synthetic.hpp"

namespace py = pybind11;
using nlohmann::json;

namespace {

// Structured data crosses the boundary as JSON text; the Python side wraps it with json.loads.
rfb::PipelineConfig config_from_text(const std::string& text) {
  return text.empty() ? rfb::PipelineConfig{} : rfb::config_from_json(json::parse(text));
}

std::string extract_json(const std::string& dataset, std::optional<std::vector<int>> recordings,
                         const std::string& config, int jobs, const std::string& out_dir) {
  rfb::ExtractOptions opts;
  opts.dataset_dir = dataset;
  opts.recording_ids = std::move(recordings);
  opts.config = config_from_text(config);
  opts.jobs = jobs;
  rfb::ExtractionResult result;
  {
    py::gil_scoped_release release;
    result = rfb::extract(opts);
  }
  if (!out_dir.empty()) rfb::write_artifacts(result, out_dir);
  json out = rfb::report_to_json(rfb::make_document(result));
  out["manifest"] = rfb::manifest_to_json(result.manifest);
  return out.dump();
}

std::pair<bool, std::vector<std::string>> audit_json(const std::string& report,
                                                     const std::string& dataset) {
  const rfb::AuditResult res = rfb::audit(rfb::report_from_json(json::parse(report)), dataset);
  return {res.ok(), res.problems};
}

std::string synth(const std::string& scene, const std::string& out_dir) {
  const rfb::Recording rec = rfb::generate_synthetic(rfb::parse_scene(json::parse(scene)));
  return rfb::write_recording(rec, out_dir).tracks.string();
}

}  // namespace

PYBIND11_MODULE(_rfbounds, m) {
  m.doc() = "Kinematic bound extraction core";
  m.attr("__version__") = rfb::kToolVersion;

  py::register_exception<rfb::ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<rfb::NoRecordingsError>(m, "NoRecordingsError", PyExc_FileNotFoundError);
  py::register_exception<rfb::IngestError>(m, "IngestError", PyExc_ValueError);
  py::register_exception<rfb::SceneError>(m, "SceneError", PyExc_ValueError);
  py::register_exception<rfb::ReportError>(m, "ReportError", PyExc_ValueError);

  m.def("default_config_json", [] { return rfb::config_to_json(rfb::PipelineConfig{}).dump(); });
  m.def("normalize_config_json",
        [](const std::string& text) { return rfb::config_to_json(config_from_text(text)).dump(); });
  m.def("extract_json", &extract_json, py::arg("dataset"), py::arg("recordings") = py::none(),
        py::arg("config") = "", py::arg("jobs") = 1, py::arg("out_dir") = "");
  m.def("audit_json", &audit_json, py::arg("report"), py::arg("dataset"));
  m.def("synth_json", &synth, py::arg("scene"), py::arg("out_dir"));
  m.def("render_table_json", [](const std::string& report) {
    return rfb::render_table(rfb::report_from_json(json::parse(report)).report);
  });
  m.def("render_csv_json", [](const std::string& report) {
    return rfb::render_csv(rfb::report_from_json(json::parse(report)).report);
  });

  m.def("body_frame_decompose",
        [](double x, double y, double heading) {
          const rfb::BodyComponents c = rfb::body_frame_decompose({x, y}, heading);
          return std::pair(c.lon, c.lat);
        },
        py::arg("x"), py::arg("y"), py::arg("heading_deg"));
  m.def("unwrap_headings",
        [](const std::vector<double>& h) { return rfb::unwrap_headings(h); });
  m.def("differentiate",
        [](const std::vector<double>& s, double fps) { return rfb::differentiate(s, fps); },
        py::arg("series"), py::arg("frame_rate"));
  m.def("lateral_fluctuation",
        [](const std::vector<std::pair<double, double>>& pts, const std::vector<double>& speeds,
           double v_min) -> std::optional<double> {
          std::vector<rfb::Vec2> p;
          for (auto [x, y] : pts) p.push_back({x, y});
          auto lf = rfb::lateral_fluctuation(p, speeds, v_min);
          if (!lf) return std::nullopt;
          return lf->lambda_max;
        },
        py::arg("points"), py::arg("speeds"), py::arg("v_min") = 0.3);
}
