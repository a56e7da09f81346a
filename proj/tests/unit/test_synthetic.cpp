#include <doctest.h>

#include <cmath>
#include <fstream>
#include <numbers>

#include "rfbounds/kinematics.hpp"
#include "rfbounds/synthetic.hpp"
#include "test_support.hpp"

using namespace rfb;
using namespace rfbt;

TEST_CASE("constant velocity (2, 0) m/s: position at frame 25 is (2, 0)") {
  const Recording rec = build({car(1, {0, 0}, 0.0, {cv(0, 49.0 / 25.0, 2.0)})});
  const Track& t = rec.track(1);
  CHECK(t.states.size() == 50);
  const TrackState* s = t.state_at(25);
  REQUIRE(s != nullptr);
  CHECK(s->position.x == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(s->position.y == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(s->velocity == Vec2{2.0, 0.0});
}

TEST_CASE("sinusoid A = 0.5, w = 1 on 3 m/s: peak lateral acceleration A*w^2") {
  // Fine sampling so the grid hits the peak closely.
  const Recording rec = build({pedestrian(1, {0, 0}, 0.0, {sinusoid(0, 10, 3.0, 0.5, 1.0)})}, 1000.0);
  double peak = 0.0;
  for (const TrackState& s : rec.track(1).states) {
    peak = std::max(peak, std::abs(body_frame_decompose(s.acceleration, s.heading).lat));
  }
  CHECK(peak == doctest::Approx(0.5).epsilon(1e-6));
  // Analytic derivative oracle: central difference of the stored velocity matches the stored acceleration.
  const auto& st = rec.track(1).states;
  for (std::size_t i = 1; i + 1 < st.size(); i += 97) {
    const double ay = (st[i + 1].velocity.y - st[i - 1].velocity.y) * 1000.0 / 2.0;
    CHECK(ay == doctest::Approx(st[i].acceleration.y).epsilon(1e-5));
  }
}

TEST_CASE("arc R = 10, v = 5: heading rate 28.648 deg/s") {
  const Recording rec = build({car(1, {0, 0}, 0.0, {arc(0, 2, 5.0, 10.0)})});
  const auto& st = rec.track(1).states;
  const double expected = 5.0 / 10.0 * 180.0 / std::numbers::pi;
  CHECK(expected == doctest::Approx(28.648).epsilon(1e-4));
  for (std::size_t i = 1; i < st.size(); ++i) {
    const double rate = heading_delta(st[i - 1].heading, st[i].heading) * 25.0;
    CHECK(rate == doctest::Approx(expected).epsilon(1e-9));
  }
  // Stays on the circle centred 10 m to the left of the start.
  for (const TrackState& s : st) CHECK(norm(s.position - Vec2{0, 10}) == doctest::Approx(10.0));
  // Centripetal acceleration v^2/R.
  CHECK(norm(st[10].acceleration) == doctest::Approx(2.5));
}

TEST_CASE("constant acceleration clamps at standstill") {
  const Recording rec = build({car(1, {0, 0}, 0.0, {ca(0, 5, -2.0, 4.0)})});
  const auto& st = rec.track(1).states;
  CHECK(st.front().velocity.x == 4.0);
  CHECK(st.back().velocity.x == 0.0);
  CHECK(st.back().acceleration.x == 0.0);
  CHECK(st.back().position.x == doctest::Approx(4.0));  // v^2 / (2a)
  CHECK(st[25].velocity.x == doctest::Approx(2.0));
}

TEST_CASE("primitives chain from the previous end pose") {
  const Recording rec =
      build({car(1, {0, 0}, 0.0, {cv(0, 1, 2.0), arc(1, 2, std::nullopt, 5.0), cv(2, 3)})});
  const Track& t = rec.track(1);
  const TrackState* a = t.state_at(25);
  REQUIRE(a != nullptr);
  CHECK(a->position.x == doctest::Approx(2.0));
  const double turned = rad_to_deg(2.0 / 5.0);
  CHECK(t.state_at(50)->heading == doctest::Approx(turned));
  CHECK(t.state_at(75)->heading == doctest::Approx(turned));
  CHECK(norm(t.state_at(75)->velocity) == doctest::Approx(2.0));
}

TEST_CASE("scene errors") {
  CHECK_THROWS_AS(build({car(1, {0, 0}, 0, {cv(0, 2, 1.0), cv(1, 3)})}), SceneError);
  CHECK_THROWS_AS(build({car(1, {0, 0}, 0, {cv(0, 1, 1.0), cv(2, 3)})}), SceneError);
  CHECK_THROWS_AS(build({agent(1, "hoverboard", 1, 1, {0, 0}, 0, {cv(0, 1, 1.0)})}), SceneError);
  CHECK_THROWS_AS(parse_scene(nlohmann::json::parse(R"({"agents": [], "extra": 1})")), SceneError);
}

TEST_CASE("scene JSON round trip") {
  const SceneSpec s = scene({car(1, {1, 2}, 30, {cv(0, 1, 2.0), ca(1, 2, 0.5)}),
                             pedestrian(2, {0, 0}, 90, {sinusoid(0, 2, 1.0, 0.2, 3.0, 0.1)}),
                             bicycle(3, {5, 5}, 180, {arc(0, 2, 4.0, -8.0)})},
                            30.0, 4);
  const SceneSpec back = parse_scene(scene_to_json(s));
  CHECK(generate_synthetic(back) == generate_synthetic(s));
  const auto path = temp_dir("scene") / "scene.json";
  std::ofstream(path) << scene_to_json(s).dump(2);
  CHECK(generate_synthetic(load_scene(path)) == generate_synthetic(s));
}

TEST_CASE("golden scene file parses") {
  const SceneSpec s = load_scene(std::filesystem::path(RFB_TEST_DATA) / "golden_scene.json");
  const Recording rec = generate_synthetic(s);
  CHECK(rec.tracks().size() == 9);
  CHECK(rec.frame_rate() == 25.0);
  CHECK(rec.speed_limit() == 13.9);
}

TEST_CASE("property: finite-difference velocity converges to the analytic one at O(dt^2)") {
  auto max_err = [](double fps) {
    const Recording rec = build({car(1, {0, 0}, 20.0, {arc(0, 2, 5.0, 10.0)}),
                                 pedestrian(2, {0, 0}, 0.0, {sinusoid(0, 2, 1.0, 0.5, 3.0)})},
                                fps);
    double worst = 0.0;
    for (const auto& [id, t] : rec.tracks()) {
      std::vector<double> xs, ys;
      for (const TrackState& s : t.states) {
        xs.push_back(s.position.x);
        ys.push_back(s.position.y);
      }
      const auto vx = differentiate(xs, fps);
      const auto vy = differentiate(ys, fps);
      for (std::size_t i = 0; i < t.states.size(); ++i) {
        worst = std::max(worst, norm(Vec2{vx[i], vy[i]} - t.states[i].velocity));
      }
    }
    return worst;
  };
  const double e25 = max_err(25.0);
  const double e250 = max_err(250.0);
  MESSAGE("velocity error 25 fps " << e25 << ", 250 fps " << e250);
  CHECK(e25 / e250 > 50.0);  // second order: about 100
  CHECK(e25 / e250 < 200.0);
}
