#pragma once

#include <doctest.h>

#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "pradkit/image.hpp"

namespace testing {

/// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    std::random_device rd;
    path_ = std::filesystem::temp_directory_path() /
            ("pradkit_" + tag + "_" + std::to_string(rd()) + std::to_string(rd()));
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

inline pradkit::GrayImage random_gray(std::size_t w, std::size_t h, std::mt19937_64& rng,
                                      pradkit::FrameMeta meta = {}) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> px(w * h);
  for (auto& v : px) v = u(rng);
  return {w, h, std::move(px), meta};
}

inline pradkit::BinaryImage random_binary(std::size_t w, std::size_t h, double density,
                                          std::mt19937_64& rng) {
  std::bernoulli_distribution b(density);
  std::vector<std::uint8_t> fg(w * h);
  for (auto& v : fg) v = b(rng) ? 1 : 0;
  return {w, h, std::move(fg)};
}

/// Builds a mask from rows of '#' (foreground) and '.' (background).
inline pradkit::BinaryImage mask_from(const std::vector<std::string>& rows) {
  const std::size_t h = rows.size();
  const std::size_t w = rows.front().size();
  std::vector<std::uint8_t> fg;
  for (const auto& r : rows) {
    REQUIRE(r.size() == w);
    for (char c : r) fg.push_back(c == '#' ? 1 : 0);
  }
  return {w, h, std::move(fg)};
}

/// Gray image: '#' -> 0, '.' -> 1.
inline pradkit::GrayImage gray_from(const std::vector<std::string>& rows,
                                    pradkit::FrameMeta meta = {}) {
  std::vector<double> px;
  for (const auto& r : rows) {
    for (char c : r) px.push_back(c == '#' ? 0.0 : 1.0);
  }
  return {rows.front().size(), rows.size(), std::move(px), meta};
}

}  // namespace testing
