#include "support.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>

#include "pradkit/error.hpp"
#include "pradkit/io.hpp"

using namespace pradkit;

namespace {

void write_bytes(const std::filesystem::path& p, const std::string& header,
                 const std::vector<std::uint8_t>& payload) {
  std::ofstream out(p, std::ios::binary);
  out << header;
  out.write(reinterpret_cast<const char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
}

std::vector<std::uint8_t> read_bytes(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

// Independent PNG writer through libpng's simplified API.
void write_png(const std::filesystem::path& p, std::uint32_t w, std::uint32_t h,
               const std::vector<std::uint16_t>& px, bool sixteen) {
  png_image image{};
  image.version = PNG_IMAGE_VERSION;
  image.width = w;
  image.height = h;
  image.format = sixteen ? PNG_FORMAT_LINEAR_Y : PNG_FORMAT_GRAY;
  if (sixteen) {
    REQUIRE(png_image_write_to_file(&image, p.c_str(), 0, px.data(), 0, nullptr));
  } else {
    std::vector<std::uint8_t> bytes(px.begin(), px.end());
    REQUIRE(png_image_write_to_file(&image, p.c_str(), 0, bytes.data(), 0, nullptr));
  }
}

}  // namespace

TEST_CASE("8-bit P5 decode") {
  testing::TempDir dir("io");
  write_bytes(dir / "a.pgm", "P5\n3 2\n255\n", {0, 128, 255, 0, 128, 255});
  FrameMeta meta;
  meta.pixel_pitch_mm = 0.1;
  meta.time_us = 2.0;
  meta.exposure_us = 3.28;
  const auto img = load_gray(dir / "a.pgm", meta);
  REQUIRE(img.width() == 3);
  REQUIRE(img.height() == 2);
  const std::vector<double> expect{0.0, 128.0 / 255.0, 1.0, 0.0, 128.0 / 255.0, 1.0};
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(img.pixels()[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  }
  CHECK(img.pixels()[1] == doctest::Approx(0.50196).epsilon(1e-5));
  CHECK(img.time_us() == 2.0);
  CHECK(img.exposure_us() == 3.28);

  write_bytes(dir / "white.pgm", "P5 # comment\n2 2 # more\n255\n", {255, 255, 255, 255});
  const auto white = load_gray(dir / "white.pgm");
  CHECK(std::all_of(white.pixels().begin(), white.pixels().end(),
                    [](double v) { return v == 1.0; }));
}

TEST_CASE("16-bit P5 is big-endian") {
  testing::TempDir dir("io");
  write_bytes(dir / "b.pgm", "P5\n1 1\n65535\n", {0x80, 0x00});
  const auto img = load_gray(dir / "b.pgm");
  CHECK(img.at(0, 0) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("malformed inputs") {
  testing::TempDir dir("io");
  write_bytes(dir / "zero.pgm", "P5\n0 2\n255\n", {});
  CHECK_THROWS_AS(load_gray(dir / "zero.pgm"), DataError);
  write_bytes(dir / "short.pgm", "P5\n3 3\n255\n", {1, 2, 3});
  CHECK_THROWS_AS(load_gray(dir / "short.pgm"), DataError);
  write_bytes(dir / "maxval.pgm", "P5\n1 1\n1023\n", {0, 0});
  CHECK_THROWS_AS(load_gray(dir / "maxval.pgm"), DataError);
  write_bytes(dir / "ascii.pgm", "P2\n1 1\n255\n", {'0'});
  CHECK_THROWS_AS(load_gray(dir / "ascii.pgm"), DataError);
  CHECK_THROWS_AS(load_gray(dir / "missing.pgm"), IoError);

  png_image rgb{};
  rgb.version = PNG_IMAGE_VERSION;
  rgb.width = 1;
  rgb.height = 1;
  rgb.format = PNG_FORMAT_RGB;
  const std::uint8_t px[3] = {1, 2, 3};
  REQUIRE(png_image_write_to_file(&rgb, (dir / "rgb.png").c_str(), 0, px, 0, nullptr));
  CHECK_THROWS_AS(load_gray(dir / "rgb.png"), DataError);
}

TEST_CASE("grayscale PNG input") {
  testing::TempDir dir("io");
  write_png(dir / "g8.png", 3, 1, {0, 128, 255}, false);
  const auto g8 = load_gray(dir / "g8.png");
  REQUIRE(g8.width() == 3);
  CHECK(g8.at(1, 0) == doctest::Approx(128.0 / 255.0).epsilon(1e-15));
  CHECK(g8.at(2, 0) == 1.0);

  write_png(dir / "g16.png", 2, 2, {0, 32768, 65535, 1000}, true);
  const auto g16 = load_gray(dir / "g16.png");
  REQUIRE(g16.height() == 2);
  CHECK(g16.at(1, 0) == doctest::Approx(32768.0 / 65535.0).epsilon(1e-15));
  CHECK(g16.at(0, 1) == 1.0);
  CHECK(g16.at(1, 1) == doctest::Approx(1000.0 / 65535.0).epsilon(1e-15));
}

TEST_CASE("save_gray round trip") {
  testing::TempDir dir("io");
  const GrayImage ones = GrayImage::filled(4, 3, 1.0);
  save_gray(ones, dir / "ones.pgm");
  const auto bytes = read_bytes(dir / "ones.pgm");
  const std::string header = "P5\n4 3\n65535\n";
  REQUIRE(bytes.size() == header.size() + 24);
  CHECK(std::all_of(bytes.begin() + static_cast<std::ptrdiff_t>(header.size()), bytes.end(),
                    [](std::uint8_t b) { return b == 0xFF; }));

  std::mt19937_64 rng(5);
  const auto img = testing::random_gray(37, 23, rng);
  save_gray(img, dir / "r.pgm");
  const auto back = load_gray(dir / "r.pgm");
  double worst = 0.0;
  for (std::size_t i = 0; i < img.size(); ++i) {
    worst = std::max(worst, std::abs(back.pixels()[i] - img.pixels()[i]));
  }
  CHECK(worst <= 1.0 / 65535.0);
}

TEST_CASE("save_mask writes 0/255 bytes") {
  testing::TempDir dir("io");
  std::vector<std::uint8_t> fg(12, 0);
  fg[5] = 1;
  save_mask(BinaryImage(4, 3, fg), dir / "m.pgm");
  const auto bytes = read_bytes(dir / "m.pgm");
  const std::string header = "P5\n4 3\n255\n";
  REQUIRE(bytes.size() == header.size() + 12);
  CHECK(std::count(bytes.begin() + static_cast<std::ptrdiff_t>(header.size()), bytes.end(), 255) ==
        1);
  const auto back = load_gray(dir / "m.pgm");
  CHECK(back.at(1, 1) == 1.0);
  CHECK(back.at(0, 0) == 0.0);

  std::mt19937_64 rng(9);
  const auto mask = testing::random_binary(17, 9, 0.4, rng);
  save_mask(mask, dir / "r.pgm");
  const auto gray = load_gray(dir / "r.pgm");
  for (std::size_t r = 0; r < 9; ++r) {
    for (std::size_t c = 0; c < 17; ++c) {
      CHECK((gray.at(c, r) == 1.0) == mask.at(c, r));
    }
  }
}

TEST_CASE("sidecar metadata") {
  testing::TempDir dir("io");
  FrameMeta meta;
  meta.pixel_pitch_mm = 0.125;
  meta.time_us = 7.64;
  meta.exposure_us = 3.28;
  const auto img = GrayImage::filled(2, 2, 0.5, meta);
  const auto path = dir / "f.pgm";
  save_gray(img, path);
  CHECK_FALSE(read_sidecar(path).has_value());
  write_sidecar(meta, path);
  CHECK(sidecar_path(path).filename() == "f.pgm.meta");
  const auto back = read_sidecar(path);
  REQUIRE(back.has_value());
  CHECK(back->pixel_pitch_mm == 0.125);
  CHECK(back->time_us == 7.64);
  CHECK(back->exposure_us == 3.28);

  const auto loaded = load_frame(path);
  CHECK(loaded.time_us() == 7.64);
  FrameMeta fallback;
  fallback.time_us = 99.0;
  save_gray(img, dir / "g.pgm");
  CHECK(load_frame(dir / "g.pgm", fallback).time_us() == 99.0);
}
