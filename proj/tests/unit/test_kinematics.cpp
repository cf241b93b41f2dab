#include "support.hpp"

#include <cmath>
#include <random>

#include "pradkit/error.hpp"
#include "pradkit/kinematics.hpp"

using namespace pradkit;

namespace {

SurfaceProfile flat(std::size_t n, double pitch, double y, double t) {
  SurfaceProfile p;
  p.time_us = t;
  for (std::size_t c = 0; c < n; ++c) p.columns.push_back({c * pitch, y});
  return p;
}

// Mask with everything at or below height y (y-up, pixel centres) filled.
BinaryImage bar_below(std::size_t w, std::size_t h, double pitch, double y, double t) {
  std::vector<std::uint8_t> fg(w * h, 0);
  for (std::size_t r = 0; r < h; ++r) {
    const double py = static_cast<double>(h - 1 - r) * pitch;
    for (std::size_t c = 0; c < w; ++c) fg[r * w + c] = py <= y ? 1 : 0;
  }
  FrameMeta meta;
  meta.pixel_pitch_mm = pitch;
  meta.time_us = t;
  return {w, h, std::move(fg), 0.5, meta};
}

SurfaceProfile circle_profile(double cx, double cy, double radius, double pitch, std::size_t n,
                              double noise, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-noise, noise);
  SurfaceProfile p;
  for (std::size_t c = 0; c < n; ++c) {
    const double x = c * pitch;
    const double d = x - cx;
    ProfileSample s{x, std::nullopt};
    if (std::abs(d) < radius) {
      s.y_mm = cy + std::sqrt(radius * radius - d * d) + (noise > 0 ? u(rng) : 0.0);
    }
    p.columns.push_back(s);
  }
  return p;
}

}  // namespace

TEST_CASE("surface profile examples") {
  const auto bar = testing::mask_from({"......", "######", "######", "......"});
  const auto p = surface_profile(bar, ScanDirection::FromTop, 0.1, 2.0);
  REQUIRE(p.columns.size() == 6);
  for (const auto& s : p.columns) {
    REQUIRE(s.y_mm.has_value());
    CHECK(*s.y_mm == doctest::Approx(0.2));
  }
  CHECK(p.columns[3].x_mm == doctest::Approx(0.3));
  CHECK(p.time_us == 2.0);
  const auto q = surface_profile(bar, ScanDirection::FromBottom, 0.1, 2.0);
  CHECK(*q.columns[0].y_mm == doctest::Approx(0.1));
  CHECK(q.orientation == ScanDirection::FromBottom);

  const auto gap = testing::mask_from({"#..", "#.#"});
  const auto g = surface_profile(gap, ScanDirection::FromTop, 1.0, 0.0);
  CHECK(*g.columns[0].y_mm == 1.0);
  CHECK_FALSE(g.columns[1].y_mm.has_value());
  CHECK(*g.columns[2].y_mm == 0.0);
  CHECK(g.present_count() == 2);

  CHECK_THROWS_AS(surface_profile(BinaryImage::empty(4, 4), ScanDirection::FromTop, 0.1, 0.0),
                  DataError);
  CHECK_THROWS_AS(surface_profile(bar, ScanDirection::FromTop, 0.0, 0.0), ConfigError);
}

TEST_CASE("analytic cap profile follows the circle") {
  const std::size_t w = 200;
  const std::size_t h = 120;
  const double pitch = 0.1;
  const double cx = 10.0;
  const double cy = 2.0;
  const double radius = 7.5;
  std::vector<std::uint8_t> fg(w * h, 0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double x = c * pitch;
      const double y = static_cast<double>(h - 1 - r) * pitch;
      fg[r * w + c] = std::hypot(x - cx, y - cy) <= radius ? 1 : 0;
    }
  }
  const auto p = surface_profile(BinaryImage(w, h, fg), ScanDirection::FromTop, pitch, 0.0);
  std::size_t checked = 0;
  for (const auto& s : p.columns) {
    const double d = s.x_mm - cx;
    if (std::abs(d) >= radius) continue;
    REQUIRE(s.y_mm.has_value());
    CHECK(std::abs(*s.y_mm - (cy + std::sqrt(radius * radius - d * d))) <= pitch);
    ++checked;
  }
  CHECK(checked > 100);
}

TEST_CASE("velocity field examples") {
  const auto a = flat(10, 0.1, 5.0, 1.64);
  const auto b = flat(10, 0.1, 8.0, 4.64);
  const auto f = velocity_field(a, b);
  CHECK(f.mid_time_us == doctest::Approx(3.14));
  for (const auto& s : f.samples) CHECK(*s.v_mm_us == doctest::Approx(1.0));

  for (const auto& s : velocity_field(a, flat(10, 0.1, 5.0, 4.0)).samples) CHECK(*s.v_mm_us == 0.0);

  // bulged centre: 0.3 mm extra over 3 us
  auto c = flat(11, 0.1, 5.0, 0.0);
  auto d = flat(11, 0.1, 8.0, 3.0);
  *d.columns[5].y_mm += 0.3;
  const auto g = velocity_field(c, d);
  CHECK(*g.samples[5].v_mm_us - *g.samples[0].v_mm_us == doctest::Approx(0.1));

  c.columns[2].y_mm.reset();
  CHECK_FALSE(velocity_field(c, d).samples[2].v_mm_us.has_value());

  CHECK_THROWS_AS(velocity_field(a, flat(10, 0.1, 5.0, 1.64)), DataError);
  CHECK_THROWS_AS(velocity_field(b, a), DataError);
  CHECK_THROWS_AS(velocity_field(a, flat(9, 0.1, 5.0, 3.0)), DataError);
  CHECK_THROWS_AS(velocity_field(a, flat(10, 0.2, 5.0, 3.0)), DataError);
}

TEST_CASE("velocity invariants") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 10.0);
  SurfaceProfile p1;
  SurfaceProfile p2;
  p1.time_us = 1.5;
  p2.time_us = 4.25;
  for (std::size_t c = 0; c < 50; ++c) {
    p1.columns.push_back({c * 0.1, u(rng)});
    p2.columns.push_back({c * 0.1, u(rng)});
  }
  const auto f = velocity_field(p1, p2);
  // time reversal: same time slots, shapes played backwards
  auto r1 = p2;
  auto r2 = p1;
  r1.time_us = p1.time_us;
  r2.time_us = p2.time_us;
  const auto back = velocity_field(r1, r2);
  CHECK(back.mid_time_us == f.mid_time_us);
  auto shifted = p2;
  for (auto& s : shifted.columns) *s.y_mm += 0.7;
  const auto g = velocity_field(p1, shifted);
  for (std::size_t i = 0; i < 50; ++i) {
    CHECK(*back.samples[i].v_mm_us == -*f.samples[i].v_mm_us);
    CHECK(*g.samples[i].v_mm_us == doctest::Approx(*f.samples[i].v_mm_us + 0.7 / 2.75).epsilon(1e-12));
  }
}

TEST_CASE("apex velocity examples") {
  std::vector<SurfaceProfile> rigid;
  for (int k = 0; k < 5; ++k) rigid.push_back(flat(21, 0.1, 2.0 + 1.5 * 3 * k, 3.0 * k));
  for (std::size_t k : {0, 3, 10}) {
    for (const auto& a : apex_velocity(rigid, 1.0, k)) CHECK(a.v_mm_us == doctest::Approx(1.5));
  }

  auto a = flat(21, 0.1, 2.0, 0.0);
  auto b = flat(21, 0.1, 2.0, 2.0);
  for (std::size_t c = 0; c < 21; ++c) *b.columns[c].y_mm += 0.1 * static_cast<double>(c);
  const auto k0 = apex_velocity({a, b}, 1.0, 0);
  REQUIRE(k0.size() == 1);
  CHECK(k0[0].v_mm_us == doctest::Approx(0.5));
  CHECK(k0[0].mid_time_us == 1.0);
  CHECK(apex_velocity({a, b}, 1.0, 2)[0].v_mm_us == doctest::Approx(0.5));
  // band clipped at the image edge: columns 0..2
  CHECK(apex_velocity({a, b}, 0.0, 2)[0].v_mm_us == doctest::Approx(0.05));

  CHECK_THROWS_AS(apex_velocity({a}, 1.0), DataError);
  auto holes = a;
  for (std::size_t c = 8; c <= 12; ++c) holes.columns[c].y_mm.reset();
  CHECK_THROWS_AS(apex_velocity({holes, b}, 1.0, 2), DataError);
}

TEST_CASE("piecewise constant speed is recovered within quantization") {
  const double pitch = 0.1;
  const double dt = 3.0;
  const double switch_t = 12.0;
  auto height = [&](double t) {
    return t < switch_t ? 5.0 + 1.0 * t : 5.0 + 1.0 * switch_t + 1.5 * (t - switch_t);
  };
  std::vector<SurfaceProfile> profiles;
  for (int k = 0; k < 9; ++k) {
    const double t = 0.7 + dt * k;
    profiles.push_back(surface_profile(bar_below(41, 500, pitch, height(t), t),
                                       ScanDirection::FromTop));
  }
  const auto apex = apex_velocity(profiles, 2.0, 5);
  for (std::size_t k = 0; k < apex.size(); ++k) {
    const double t1 = profiles[k].time_us;
    const double t2 = profiles[k + 1].time_us;
    const double exact = (height(t2) - height(t1)) / (t2 - t1);
    CHECK(std::abs(apex[k].v_mm_us - exact) <= pitch / dt + 1e-12);
    if (t2 < switch_t) CHECK(std::abs(apex[k].v_mm_us - 1.0) <= pitch / dt + 1e-12);
    if (t1 >= switch_t) CHECK(std::abs(apex[k].v_mm_us - 1.5) <= pitch / dt + 1e-12);
  }
}

TEST_CASE("curvature fit examples") {
  std::mt19937_64 rng(12);
  const auto exact = circle_profile(10.0, 1.0, 5.0, 0.1, 200, 0.0, rng);
  const auto r = curvature_fit(exact, {0, 199});
  REQUIRE(std::holds_alternative<CurvatureFit>(r));
  const auto& fit = std::get<CurvatureFit>(r);
  CHECK(std::abs(fit.radius_mm - 5.0) < 1e-9);
  CHECK(fit.rms_residual_mm < 1e-9);
  CHECK(fit.center.x_mm == doctest::Approx(10.0));
  CHECK(fit.center.y_mm == doctest::Approx(1.0));
  CHECK(fit.points_used == 99);

  const auto noisy = circle_profile(10.0, 1.0, 5.0, 0.1, 200, 0.05, rng);
  const auto nr = curvature_fit(noisy, {0, 199});
  REQUIRE(std::holds_alternative<CurvatureFit>(nr));
  CHECK(std::abs(std::get<CurvatureFit>(nr).radius_mm - 5.0) / 5.0 < 0.02);
  CHECK(std::get<CurvatureFit>(nr).rms_residual_mm > 0.0);

  SurfaceProfile line;
  for (std::size_t c = 0; c < 20; ++c) line.columns.push_back({c * 0.1, 2.0 + 0.3 * c});
  const auto lr = curvature_fit(line, {0, 19});
  CHECK(std::holds_alternative<DegenerateFit>(lr));
  CHECK(std::get<DegenerateFit>(lr).points_used == 20);

  CHECK_THROWS_AS(curvature_fit(line, {0, 1}), DataError);
  CHECK_THROWS_AS(curvature_fit(line, {5, 20}), ConfigError);
  CHECK_THROWS_AS(curvature_fit(line, {6, 5}), ConfigError);
}

TEST_CASE("central window") {
  SurfaceProfile p;
  for (std::size_t c = 0; c < 30; ++c) {
    p.columns.push_back({c * 0.1, c >= 10 && c <= 20 ? std::optional<double>(1.0) : std::nullopt});
  }
  const auto w = central_window(p, 1.0);
  CHECK(w.first == 10);
  CHECK(w.last == 20);
  const auto h = central_window(p, 0.5);
  CHECK(h.first == 13);
  CHECK(h.last == 17);
  CHECK_THROWS_AS(central_window(p, 0.0), ConfigError);
}

TEST_CASE("scan direction names") {
  CHECK(parse_scan_direction("from_top") == ScanDirection::FromTop);
  CHECK(to_string(ScanDirection::FromBottom) == "from_bottom");
  CHECK_THROWS_AS(parse_scan_direction("sideways"), ConfigError);
}
