#include <doctest.h>

#include <random>

#include "test_support.hpp"

using namespace glintgaze;
using namespace glintgaze::testing;

TEST_SUITE("simulator") {

TEST_CASE("glint for a light at the camera is the retro-reflection point") {
  const Sphered cornea{Vector3d(0.001, -0.002, 0.035), 7.8e-3};
  const Vector3d o(0, 0, 0);
  const GlintPoint g = solve_glint_point(o, o, cornea);
  CHECK(g.collinear);
  CHECK((g.point - (cornea.center + cornea.radius * (o - cornea.center).normalized())).norm() <
        1e-15);
}

TEST_CASE("glint stays in the plane of symmetry") {
  const GlintPoint g =
      solve_glint_point(Vector3d::Zero(), Vector3d(0.01, 0, 0), Sphered{Vector3d(0, 0, 0.035), 7.8e-3});
  CHECK_FALSE(g.collinear);
  CHECK(g.point.y() == 0.0);
}

TEST_CASE("glint solve matches a dense arc scan") {
  std::mt19937_64 rng(21);
  for (int i = 0; i < 20; ++i) {
    const GlintConfig c = random_glint_config(rng);
    const GlintPoint g = solve_glint_point(c.camera, c.led, c.cornea);
    CHECK(reflection_law_residual(c.camera, c.led, c.cornea, g.point) < 1e-9);
    CHECK(std::abs((g.point - c.cornea.center).norm() - c.cornea.radius) < 1e-15);
    CHECK(std::abs(glint_theta(c, g.point) - scan_glint_theta(c, 1000000)) < 1e-5);
  }
}

TEST_CASE("glint solve rejects a camera inside the sphere") {
  try {
    solve_glint_point(Vector3d::Zero(), Vector3d(0.01, 0, 0), Sphered{Vector3d(0, 0, 0.001), 0.01});
    FAIL("expected InsideSphere");
  } catch (const GazeError& e) {
    CHECK(e.code() == ErrorCode::kInsideSphere);
  }
}

TEST_CASE("zero noise observations equal the truth") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  for (const auto& rec : clean_sweep(scene, eye)) {
    for (std::size_t i = 0; i < kLedCount; ++i) {
      REQUIRE(rec.observation.glints[i]);
      CHECK(*rec.observation.glints[i] == rec.truth.glints[i]);
    }
    REQUIRE(rec.observation.pupil);
    CHECK(*rec.observation.pupil == rec.truth.pupil);
  }
}

TEST_CASE("full dropout removes every glint") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  NoiseModel noise;
  noise.dropout_prob = 1.0;
  for (const auto& t : make_target_grid().targets) {
    const FrameRecord rec = render_frame(scene, eye, t, noise, 0, 0);
    CHECK(rec.observation.present_glint_count() == 0);
    CHECK(rec.observation.pupil.has_value());
  }
}

TEST_CASE("clean glint lines pass through the projected cornea center") {
  const Scene scene = default_scene();
  for (const auto mode : {PupilMode::kConsistent, PupilMode::kPhysiological}) {
    const EyePhysiology eye = eye_for(scene, mode);
    for (const auto& rec : clean_sweep(scene, eye)) {
      const Vector2d c = project(scene.camera, rec.truth.pose.cornea_center);
      for (std::size_t i = 0; i < kLedCount; ++i) {
        const Line2d line(project(scene.camera, scene.leds.positions[i]), rec.truth.glints[i]);
        CHECK(point_to_line2_distance(c, line) < 1e-6);
      }
    }
  }
}

TEST_CASE("dataset sizes and ordering") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const TargetGrid grid = make_target_grid();
  CHECK(generate_dataset(scene, {eye}, grid, 1, {}).records.size() == 54);
  const auto big = generate_dataset(scene, make_subjects(eye, 2, 1), grid, 90, {});
  REQUIRE(big.records.size() == 9720);
  CHECK(big.records[90].observation.target_id == 1);
  CHECK(big.records[4860].observation.subject_id == 1);
  CHECK(big.records[4860].observation.frame_id == 0);
  CHECK_THROWS_AS(generate_dataset(scene, {eye}, grid, 0, {}), GazeError);
}

TEST_CASE("identical seeds give bit-identical datasets") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  NoiseModel noise{0.7, 0.4, 0.2, 99};
  const auto a = generate_dataset(scene, make_subjects(eye, 2, 5), make_target_grid(), 3, noise);
  const auto b = generate_dataset(scene, make_subjects(eye, 2, 5), make_target_grid(), 3, noise);
  REQUIRE(a.records.size() == b.records.size());
  for (std::size_t i = 0; i < a.records.size(); ++i) {
    const auto& x = a.records[i].observation;
    const auto& y = b.records[i].observation;
    for (std::size_t k = 0; k < kLedCount; ++k) {
      REQUIRE(x.glints[k].has_value() == y.glints[k].has_value());
      if (x.glints[k]) CHECK(*x.glints[k] == *y.glints[k]);
    }
    CHECK(*x.pupil == *y.pupil);
  }
  noise.seed = 100;
  const auto c = generate_dataset(scene, {eye}, make_target_grid(), 1, noise);
  CHECK(*c.records[0].observation.pupil != *a.records[0].observation.pupil);
}

TEST_CASE("frame noise does not depend on generation order") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const NoiseModel noise{1.0, 1.0, 0.0, 4};
  const TargetGrid grid = make_target_grid();
  const auto all = generate_dataset(scene, {eye}, grid, 2, noise);
  const FrameRecord single = render_frame(scene, eye, grid.targets[17], noise, 0, 1);
  CHECK(*single.observation.pupil == *all.records[17 * 2 + 1].observation.pupil);
}

TEST_CASE("noise statistics match the configured sigma") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const NoiseModel noise{0.8, 0.3, 0.0, 12};
  const auto data = generate_dataset(scene, {eye}, make_target_grid(), 40, noise);
  double g2 = 0, p2 = 0;
  std::size_t gn = 0, pn = 0;
  for (const auto& rec : data.records) {
    for (std::size_t i = 0; i < kLedCount; ++i) {
      if (!rec.observation.glints[i]) continue;
      g2 += (*rec.observation.glints[i] - rec.truth.glints[i]).squaredNorm();
      gn += 2;
    }
    p2 += (*rec.observation.pupil - rec.truth.pupil).squaredNorm();
    pn += 2;
  }
  CHECK(std::sqrt(g2 / gn) == doctest::Approx(0.8).epsilon(0.03));
  CHECK(std::sqrt(p2 / pn) == doctest::Approx(0.3).epsilon(0.05));
}

TEST_CASE("dropout rate") {
  const Scene scene = default_scene();
  const EyePhysiology eye = eye_for(scene);
  const auto data = generate_dataset(scene, {eye}, make_target_grid(), 20, NoiseModel{0, 0, 0.25, 3});
  std::size_t present = 0;
  for (const auto& rec : data.records) present += rec.observation.present_glint_count();
  const double rate = 1.0 - double(present) / (data.records.size() * kLedCount);
  CHECK(rate == doctest::Approx(0.25).epsilon(0.1));
}

TEST_CASE("noise model validation") {
  CHECK_THROWS_AS((NoiseModel{-1, 0, 0, 0}.validate()), GazeError);
  CHECK_THROWS_AS((NoiseModel{0, 0, 1.5, 0}.validate()), GazeError);
}

}  // TEST_SUITE
