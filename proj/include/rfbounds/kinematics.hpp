#pragma once

#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "rfbounds/trajectory_model.hpp"

namespace rfb {

class KinematicsError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class DerivativeSource {
  Recorded,          // velocity/acceleration as stored in the track (analytic for synthetic scenes)
  FiniteDifference,  // recomputed from positions, second-order accurate everywhere
};

struct KinematicsConfig {
  int window = 5;        // moving-average width for acceleration, odd, >= 3
  double v_eps = 0.1;    // m/s; below this speed nothing counts as deceleration
  double zero_tol = 1e-9;  // body-frame components and h_rate smaller than this are 0
  DerivativeSource derivatives = DerivativeSource::Recorded;

  bool operator==(const KinematicsConfig&) const = default;
};

struct KinematicSample {
  int frame = 0;
  Vec2 position;
  double v_lon = 0.0;     // m/s, + forward
  double v_lat = 0.0;     // m/s, + left
  double a_lon = 0.0;     // m/s^2, smoothed
  double a_lat = 0.0;     // m/s^2, smoothed
  double beta_lon = 0.0;  // m/s^2, braking magnitude, 0 unless braking
  double beta_lat = 0.0;  // m/s^2, lateral-speed reduction magnitude
  double h = 0.0;         // deg in [0, 180] relative to the reference heading
  double h_rate = 0.0;    // deg/s, signed, from the unwrapped heading
  double speed = 0.0;     // m/s
};

struct BodyComponents {
  double lon = 0.0;
  double lat = 0.0;
};

/// Projects a world-frame vector onto the body frame of a user heading `heading_deg`.
BodyComponents body_frame_decompose(Vec2 vector, double heading_deg);

/// Heading series with every jump folded into (-180, 180], so the result is continuous.
std::vector<double> unwrap_headings(std::span<const double> headings_deg);

/// d/dt of `series` sampled at `frame_rate`: central differences inside, second-order
/// one-sided differences at both ends. Needs at least 3 samples.
std::vector<double> differentiate(std::span<const double> series, double frame_rate);

/// Second derivative with the same accuracy order; needs at least 4 samples.
std::vector<double> second_derivative(std::span<const double> series, double frame_rate);

/// Centred moving average of odd `window`; the window shrinks symmetrically near the ends.
std::vector<double> moving_average(std::span<const double> series, int window);

/// Per-frame attributes for a whole track. `reference_heading` only affects `h`.
std::vector<KinematicSample> compute_samples(const Track& track, double frame_rate,
                                             const KinematicsConfig& config,
                                             double reference_heading);

struct LateralFluctuation {
  double lambda_max = 0.0;
  Vec2 point;                // on the reference line (centroid of the gated positions)
  Vec2 direction{1.0, 0.0};  // unit
  std::size_t max_index = 0; // index into the input sequence of the farthest position
};

/// Total-least-squares line through the positions whose speed is >= v_min, and the largest
/// perpendicular residual. nullopt when fewer than two positions pass the gate.
std::optional<LateralFluctuation> lateral_fluctuation(std::span<const Vec2> positions,
                                                      std::span<const double> speeds,
                                                      double v_min);

}  // namespace rfb
