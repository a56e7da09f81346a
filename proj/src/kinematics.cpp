#include "rfbounds/kinematics.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace rfb {

BodyComponents body_frame_decompose(Vec2 vector, double heading_deg) {
  const double r = deg_to_rad(heading_deg);
  const double c = std::cos(r);
  const double s = std::sin(r);
  return {vector.x * c + vector.y * s, -vector.x * s + vector.y * c};
}

std::vector<double> unwrap_headings(std::span<const double> headings_deg) {
  std::vector<double> out(headings_deg.begin(), headings_deg.end());
  for (std::size_t i = 1; i < out.size(); ++i) {
    out[i] = out[i - 1] + heading_delta(headings_deg[i - 1], headings_deg[i]);
  }
  return out;
}

std::vector<double> differentiate(std::span<const double> x, double frame_rate) {
  const std::size_t n = x.size();
  if (n < 3) throw KinematicsError("differentiate needs at least 3 samples");
  const double k = frame_rate / 2.0;
  std::vector<double> d(n);
  d[0] = (-3.0 * x[0] + 4.0 * x[1] - x[2]) * k;
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - x[i - 1]) * k;
  d[n - 1] = (3.0 * x[n - 1] - 4.0 * x[n - 2] + x[n - 3]) * k;
  return d;
}

std::vector<double> second_derivative(std::span<const double> x, double frame_rate) {
  const std::size_t n = x.size();
  if (n < 3) throw KinematicsError("second_derivative needs at least 3 samples");
  const double k = frame_rate * frame_rate;
  std::vector<double> d(n);
  for (std::size_t i = 1; i + 1 < n; ++i) d[i] = (x[i + 1] - 2.0 * x[i] + x[i - 1]) * k;
  if (n >= 4) {
    d[0] = (2.0 * x[0] - 5.0 * x[1] + 4.0 * x[2] - x[3]) * k;
    d[n - 1] = (2.0 * x[n - 1] - 5.0 * x[n - 2] + 4.0 * x[n - 3] - x[n - 4]) * k;
  } else {
    d[0] = d[1];
    d[n - 1] = d[1];
  }
  return d;
}

std::vector<double> moving_average(std::span<const double> x, int window) {
  if (window < 1 || window % 2 == 0) throw KinematicsError("window must be odd and positive");
  const std::size_t n = x.size();
  const std::size_t half = static_cast<std::size_t>(window / 2);
  std::vector<double> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = std::min({half, i, n - 1 - i});
    double sum = 0.0;
    for (std::size_t j = i - k; j <= i + k; ++j) sum += x[j];
    out[i] = sum / static_cast<double>(2 * k + 1);
  }
  return out;
}

std::vector<KinematicSample> compute_samples(const Track& track, double frame_rate,
                                             const KinematicsConfig& config,
                                             double reference_heading) {
  if (config.window < 3 || config.window % 2 == 0) {
    throw KinematicsError("smoothing window must be odd and >= 3");
  }
  if (!(config.zero_tol >= 0.0)) throw KinematicsError("zero_tol must be >= 0");
  const std::size_t n = track.states.size();
  if (n < static_cast<std::size_t>(config.window)) {
    throw KinematicsError("track " + std::to_string(track.track_id) + " has " + std::to_string(n) +
                          " frames, fewer than the smoothing window " +
                          std::to_string(config.window));
  }

  std::vector<Vec2> vel(n);
  std::vector<Vec2> acc(n);
  if (config.derivatives == DerivativeSource::Recorded) {
    for (std::size_t i = 0; i < n; ++i) {
      vel[i] = track.states[i].velocity;
      acc[i] = track.states[i].acceleration;
    }
  } else {
    std::vector<double> xs(n);
    std::vector<double> ys(n);
    for (std::size_t i = 0; i < n; ++i) {
      xs[i] = track.states[i].position.x;
      ys[i] = track.states[i].position.y;
    }
    const auto vx = differentiate(xs, frame_rate);
    const auto vy = differentiate(ys, frame_rate);
    const auto ax = second_derivative(xs, frame_rate);
    const auto ay = second_derivative(ys, frame_rate);
    for (std::size_t i = 0; i < n; ++i) {
      vel[i] = {vx[i], vy[i]};
      acc[i] = {ax[i], ay[i]};
    }
  }

  std::vector<double> headings(n);
  for (std::size_t i = 0; i < n; ++i) headings[i] = track.states[i].heading;
  const auto h_rate = differentiate(unwrap_headings(headings), frame_rate);

  // Rounding residue from the body-frame rotation is not motion.
  const auto snap = [tol = config.zero_tol](double x) { return std::abs(x) < tol ? 0.0 : x; };

  std::vector<double> a_lon(n);
  std::vector<double> a_lat(n);
  std::vector<KinematicSample> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    const TrackState& s = track.states[i];
    const BodyComponents v = body_frame_decompose(vel[i], s.heading);
    const BodyComponents a = body_frame_decompose(acc[i], s.heading);
    a_lon[i] = snap(a.lon);
    a_lat[i] = snap(a.lat);
    KinematicSample& k = out[i];
    k.frame = s.frame;
    k.position = s.position;
    k.v_lon = snap(v.lon);
    k.v_lat = snap(v.lat);
    k.speed = norm(vel[i]);
    k.h = heading_difference(s.heading, reference_heading);
    k.h_rate = snap(h_rate[i]);
  }
  const auto a_lon_s = moving_average(a_lon, config.window);
  const auto a_lat_s = moving_average(a_lat, config.window);
  for (std::size_t i = 0; i < n; ++i) {
    KinematicSample& k = out[i];
    k.a_lon = snap(a_lon_s[i]);
    k.a_lat = snap(a_lat_s[i]);
    const bool moving = k.speed > config.v_eps;
    k.beta_lon = (moving && k.a_lon * k.v_lon < 0.0) ? std::abs(k.a_lon) : 0.0;
    k.beta_lat = (moving && k.a_lat * k.v_lat < 0.0) ? std::abs(k.a_lat) : 0.0;
  }
  return out;
}

std::optional<LateralFluctuation> lateral_fluctuation(std::span<const Vec2> positions,
                                                      std::span<const double> speeds,
                                                      double v_min) {
  if (positions.size() != speeds.size()) {
    throw KinematicsError("lateral_fluctuation: positions and speeds differ in length");
  }
  std::vector<std::size_t> gated;
  for (std::size_t i = 0; i < positions.size(); ++i) {
    if (speeds[i] >= v_min) gated.push_back(i);
  }
  if (gated.size() < 2) return std::nullopt;

  Vec2 c;
  for (std::size_t i : gated) c += positions[i];
  c = c * (1.0 / static_cast<double>(gated.size()));
  double sxx = 0.0;
  double sxy = 0.0;
  double syy = 0.0;
  for (std::size_t i : gated) {
    const Vec2 d = positions[i] - c;
    sxx += d.x * d.x;
    sxy += d.x * d.y;
    syy += d.y * d.y;
  }
  // Principal axis of the 2x2 scatter matrix.
  const double theta = 0.5 * std::atan2(2.0 * sxy, sxx - syy);
  LateralFluctuation out;
  out.point = c;
  out.direction = {std::cos(theta), std::sin(theta)};
  out.max_index = gated.front();
  out.lambda_max = -1.0;
  for (std::size_t i : gated) {
    const double r = std::abs(cross(out.direction, positions[i] - c));
    if (r > out.lambda_max) {
      out.lambda_max = r;
      out.max_index = i;
    }
  }
  return out;
}

}  // namespace rfb
