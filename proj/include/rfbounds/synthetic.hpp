#pragma once

#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "rfbounds/trajectory_model.hpp"

namespace rfb {

class SceneError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class PrimitiveKind { ConstantVelocity, ConstantAcceleration, Sinusoid, Arc };

/// One motion segment over [t_start, t_end) seconds (the last segment of an agent is closed).
/// Each segment starts from the pose the previous one ended in.
struct MotionPrimitive {
  PrimitiveKind kind = PrimitiveKind::ConstantVelocity;
  double t_start = 0.0;
  double t_end = 0.0;
  std::optional<double> speed;  // forward speed, m/s; carried over from the previous segment when unset
  double acceleration = 0.0;    // ConstantAcceleration, along heading; clamps at standstill
  double amplitude = 0.0;       // Sinusoid: lateral offset A*(sin(w*tau + phase) - sin(phase))
  double omega = 0.0;           // rad/s
  double phase = 0.0;           // rad
  double radius = 0.0;          // Arc: > 0 turns left, < 0 turns right
};

struct AgentSpec {
  int id = 0;
  std::string raw_class;
  double length = 0.0;
  double width = 0.0;
  Vec2 start;
  double heading = 0.0;  // degrees
  std::vector<MotionPrimitive> primitives;
};

struct SceneSpec {
  int recording_id = 0;
  double frame_rate = 25.0;
  std::optional<double> speed_limit;
  std::vector<AgentSpec> agents;
};

SceneSpec parse_scene(const nlohmann::json& doc);
SceneSpec load_scene(const std::filesystem::path& path);
nlohmann::json scene_to_json(const SceneSpec& scene);

/// Samples every agent analytically at t = frame / frame_rate. Velocity, acceleration and
/// heading come from the closed-form derivatives, never from differencing.
Recording generate_synthetic(const SceneSpec& scene);

}  // namespace rfb
