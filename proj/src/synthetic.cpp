#include "rfbounds/synthetic.hpp"

#include <cmath>
#include <fstream>
#include <set>

namespace rfb {
namespace {

using nlohmann::json;

constexpr double kTimeEps = 1e-9;

struct Pose {
  Vec2 position;
  double heading_rad = 0.0;
  double speed = 0.0;
};

struct Sample {
  Vec2 position;
  Vec2 velocity;
  Vec2 acceleration;
  double heading_rad = 0.0;
};

Vec2 unit(double rad) { return {std::cos(rad), std::sin(rad)}; }
Vec2 left_normal(double rad) { return {-std::sin(rad), std::cos(rad)}; }

Sample evaluate(const MotionPrimitive& p, const Pose& base, double tau) {
  const double v = p.speed.value_or(base.speed);
  const Vec2 u = unit(base.heading_rad);
  const Vec2 n = left_normal(base.heading_rad);
  Sample s;
  s.heading_rad = base.heading_rad;
  switch (p.kind) {
    case PrimitiveKind::ConstantVelocity:
      s.position = base.position + (v * tau) * u;
      s.velocity = v * u;
      break;
    case PrimitiveKind::ConstantAcceleration: {
      const double a = p.acceleration;
      double t = tau;
      bool stopped = false;
      if (a < 0.0) {
        const double t_stop = v / -a;
        if (tau >= t_stop) {
          t = t_stop;
          stopped = true;
        }
      }
      s.position = base.position + (v * t + 0.5 * a * t * t) * u;
      s.velocity = stopped ? Vec2{} : (v + a * t) * u;
      s.acceleration = stopped ? Vec2{} : a * u;
      break;
    }
    case PrimitiveKind::Sinusoid: {
      const double arg = p.omega * tau + p.phase;
      const double offset = p.amplitude * (std::sin(arg) - std::sin(p.phase));
      s.position = base.position + (v * tau) * u + offset * n;
      s.velocity = v * u + (p.amplitude * p.omega * std::cos(arg)) * n;
      s.acceleration = (-p.amplitude * p.omega * p.omega * std::sin(arg)) * n;
      break;
    }
    case PrimitiveKind::Arc: {
      const double rate = v / p.radius;
      const double h = base.heading_rad + rate * tau;
      const Vec2 center = base.position + p.radius * n;
      s.heading_rad = h;
      s.position = center - p.radius * left_normal(h);
      s.velocity = v * unit(h);
      s.acceleration = (v * rate) * left_normal(h);
      break;
    }
  }
  return s;
}

Pose end_pose(const MotionPrimitive& p, const Pose& base) {
  const Sample s = evaluate(p, base, p.t_end - p.t_start);
  Pose out{s.position, s.heading_rad, p.speed.value_or(base.speed)};
  if (p.kind == PrimitiveKind::ConstantAcceleration) out.speed = norm(s.velocity);
  return out;
}

PrimitiveKind kind_from_name(const std::string& name) {
  if (name == "constant_velocity") return PrimitiveKind::ConstantVelocity;
  if (name == "constant_acceleration") return PrimitiveKind::ConstantAcceleration;
  if (name == "sinusoid") return PrimitiveKind::Sinusoid;
  if (name == "arc") return PrimitiveKind::Arc;
  throw SceneError("unknown primitive type '" + name + "'");
}

std::string kind_name(PrimitiveKind k) {
  switch (k) {
    case PrimitiveKind::ConstantVelocity:
      return "constant_velocity";
    case PrimitiveKind::ConstantAcceleration:
      return "constant_acceleration";
    case PrimitiveKind::Sinusoid:
      return "sinusoid";
    case PrimitiveKind::Arc:
      return "arc";
  }
  return "?";
}

void check_keys(const json& obj, std::initializer_list<const char*> allowed, const std::string& where) {
  if (!obj.is_object()) throw SceneError(where + ": expected an object");
  const std::set<std::string> ok(allowed.begin(), allowed.end());
  for (const auto& [key, value] : obj.items()) {
    if (!ok.contains(key)) throw SceneError(where + ": unknown key '" + key + "'");
  }
}

double number(const json& obj, const char* key, const std::string& where) {
  if (!obj.contains(key)) throw SceneError(where + ": missing '" + key + "'");
  const json& v = obj.at(key);
  if (!v.is_number()) throw SceneError(where + ": '" + key + "' must be a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw SceneError(where + ": '" + key + "' must be finite");
  return d;
}

double number_or(const json& obj, const char* key, double fallback, const std::string& where) {
  return obj.contains(key) ? number(obj, key, where) : fallback;
}

void validate_agent(const AgentSpec& a) {
  const std::string who = "agent " + std::to_string(a.id);
  if (a.primitives.empty()) throw SceneError(who + ": no primitives");
  for (std::size_t i = 0; i < a.primitives.size(); ++i) {
    const MotionPrimitive& p = a.primitives[i];
    if (!(p.t_end > p.t_start)) throw SceneError(who + ": primitive with t1 <= t0");
    if (p.speed && *p.speed < 0.0) throw SceneError(who + ": negative speed");
    if (p.kind == PrimitiveKind::Arc && p.radius == 0.0) throw SceneError(who + ": zero arc radius");
    if (i == 0) continue;
    const MotionPrimitive& prev = a.primitives[i - 1];
    if (p.t_start < prev.t_end - kTimeEps) {
      throw SceneError(who + ": overlapping primitive intervals [" + std::to_string(prev.t_start) +
                       ", " + std::to_string(prev.t_end) + ") and [" +
                       std::to_string(p.t_start) + ", " + std::to_string(p.t_end) + ")");
    }
    if (p.t_start > prev.t_end + kTimeEps) {
      throw SceneError(who + ": gap between primitives at t=" + std::to_string(prev.t_end));
    }
  }
}

}  // namespace

SceneSpec parse_scene(const json& doc) {
  check_keys(doc, {"recording_id", "frame_rate", "speed_limit", "agents"}, "scene");
  SceneSpec scene;
  scene.recording_id = doc.value("recording_id", 0);
  scene.frame_rate = number_or(doc, "frame_rate", 25.0, "scene");
  if (!(scene.frame_rate > 0.0)) throw SceneError("scene: frame_rate must be positive");
  if (doc.contains("speed_limit") && !doc.at("speed_limit").is_null()) {
    scene.speed_limit = number(doc, "speed_limit", "scene");
  }
  if (!doc.contains("agents") || !doc.at("agents").is_array()) {
    throw SceneError("scene: 'agents' must be an array");
  }
  std::set<int> ids;
  for (const json& ja : doc.at("agents")) {
    check_keys(ja, {"id", "class", "length", "width", "start", "primitives"}, "agent");
    AgentSpec a;
    if (!ja.contains("id") || !ja.at("id").is_number_integer()) {
      throw SceneError("agent: integer 'id' required");
    }
    a.id = ja.at("id").get<int>();
    const std::string who = "agent " + std::to_string(a.id);
    if (!ids.insert(a.id).second) throw SceneError(who + ": duplicate id");
    if (!ja.contains("class") || !ja.at("class").is_string()) {
      throw SceneError(who + ": string 'class' required");
    }
    a.raw_class = ja.at("class").get<std::string>();
    a.length = number_or(ja, "length", 0.0, who);
    a.width = number_or(ja, "width", 0.0, who);
    if (!ja.contains("start")) throw SceneError(who + ": missing 'start'");
    const json& js = ja.at("start");
    check_keys(js, {"x", "y", "heading"}, who + " start");
    a.start = {number(js, "x", who), number(js, "y", who)};
    a.heading = number_or(js, "heading", 0.0, who);
    if (!ja.contains("primitives") || !ja.at("primitives").is_array()) {
      throw SceneError(who + ": 'primitives' must be an array");
    }
    for (const json& jp : ja.at("primitives")) {
      check_keys(jp,
                 {"type", "t0", "t1", "speed", "acceleration", "amplitude", "omega", "phase",
                  "radius"},
                 who + " primitive");
      MotionPrimitive p;
      if (!jp.contains("type") || !jp.at("type").is_string()) {
        throw SceneError(who + ": primitive 'type' required");
      }
      p.kind = kind_from_name(jp.at("type").get<std::string>());
      p.t_start = number(jp, "t0", who);
      p.t_end = number(jp, "t1", who);
      if (jp.contains("speed")) p.speed = number(jp, "speed", who);
      p.acceleration = number_or(jp, "acceleration", 0.0, who);
      p.amplitude = number_or(jp, "amplitude", 0.0, who);
      p.omega = number_or(jp, "omega", 0.0, who);
      p.phase = number_or(jp, "phase", 0.0, who);
      p.radius = number_or(jp, "radius", 0.0, who);
      a.primitives.push_back(p);
    }
    validate_agent(a);
    scene.agents.push_back(std::move(a));
  }
  return scene;
}

SceneSpec load_scene(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw SceneError("cannot open scene file: " + path.string());
  try {
    return parse_scene(json::parse(in));
  } catch (const json::exception& e) {
    throw SceneError("scene file " + path.string() + ": " + e.what());
  }
}

json scene_to_json(const SceneSpec& scene) {
  json doc;
  doc["recording_id"] = scene.recording_id;
  doc["frame_rate"] = scene.frame_rate;
  if (scene.speed_limit) doc["speed_limit"] = *scene.speed_limit;
  doc["agents"] = json::array();
  for (const AgentSpec& a : scene.agents) {
    json ja{{"id", a.id},
            {"class", a.raw_class},
            {"length", a.length},
            {"width", a.width},
            {"start", {{"x", a.start.x}, {"y", a.start.y}, {"heading", a.heading}}}};
    ja["primitives"] = json::array();
    for (const MotionPrimitive& p : a.primitives) {
      json jp{{"type", kind_name(p.kind)}, {"t0", p.t_start}, {"t1", p.t_end}};
      if (p.speed) jp["speed"] = *p.speed;
      switch (p.kind) {
        case PrimitiveKind::ConstantAcceleration:
          jp["acceleration"] = p.acceleration;
          break;
        case PrimitiveKind::Sinusoid:
          jp["amplitude"] = p.amplitude;
          jp["omega"] = p.omega;
          jp["phase"] = p.phase;
          break;
        case PrimitiveKind::Arc:
          jp["radius"] = p.radius;
          break;
        case PrimitiveKind::ConstantVelocity:
          break;
      }
      ja["primitives"].push_back(jp);
    }
    doc["agents"].push_back(ja);
  }
  return doc;
}

Recording generate_synthetic(const SceneSpec& scene) {
  if (!(scene.frame_rate > 0.0)) throw SceneError("frame_rate must be positive");
  std::vector<Track> tracks;
  tracks.reserve(scene.agents.size());
  for (const AgentSpec& a : scene.agents) {
    validate_agent(a);
    const auto group = class_group_from_label(a.raw_class);
    if (!group) throw SceneError("agent " + std::to_string(a.id) + ": unknown class '" + a.raw_class + "'");

    // Base pose at the start of every primitive.
    std::vector<Pose> bases;
    Pose pose{a.start, deg_to_rad(a.heading), 0.0};
    for (const MotionPrimitive& p : a.primitives) {
      bases.push_back(pose);
      pose = end_pose(p, pose);
    }

    const double t_first = a.primitives.front().t_start;
    const double t_last = a.primitives.back().t_end;
    const int f0 = static_cast<int>(std::ceil(t_first * scene.frame_rate - kTimeEps));
    const int f1 = static_cast<int>(std::floor(t_last * scene.frame_rate + kTimeEps));

    Track t;
    t.track_id = a.id;
    t.class_group = *group;
    t.raw_class = a.raw_class;
    t.length = a.length;
    t.width = a.width;
    std::size_t k = 0;
    for (int f = f0; f <= f1; ++f) {
      const double time = f / scene.frame_rate;
      while (k + 1 < a.primitives.size() && time >= a.primitives[k + 1].t_start - kTimeEps) ++k;
      const MotionPrimitive& p = a.primitives[k];
      const Sample s = evaluate(p, bases[k], time - p.t_start);
      t.states.push_back(
          {f, s.position, s.velocity, s.acceleration, normalize_heading(rad_to_deg(s.heading_rad))});
    }
    if (t.states.empty()) {
      throw SceneError("agent " + std::to_string(a.id) + ": active interval contains no frame");
    }
    tracks.push_back(std::move(t));
  }
  return make_recording(scene.recording_id, scene.frame_rate, std::move(tracks), scene.speed_limit,
                        ModelOptions{1});
}

}  // namespace rfb
