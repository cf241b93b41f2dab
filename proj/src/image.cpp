#include "pradkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "pradkit/error.hpp"

namespace pradkit {

namespace {

// Values this close outside [0,1] are rounding residue from arithmetic on
// in-range data and are snapped back; anything further is rejected.
constexpr double kRangeSlack = 1e-9;

void check_geometry(std::size_t width, std::size_t height, std::size_t length) {
  if (width == 0 || height == 0) {
    throw DataError("image has zero size");
  }
  if (length != width * height) {
    throw DataError("pixel grid length " + std::to_string(length) + " does not match " +
                    std::to_string(width) + "x" + std::to_string(height));
  }
}

void check_meta(const FrameMeta& meta) {
  if (!(meta.pixel_pitch_mm > 0.0) || !std::isfinite(meta.pixel_pitch_mm)) {
    throw ConfigError("pixel pitch must be positive");
  }
  if (!(meta.exposure_us >= 0.0) || !std::isfinite(meta.exposure_us)) {
    throw ConfigError("exposure must be non-negative");
  }
  if (!std::isfinite(meta.time_us)) {
    throw ConfigError("frame time must be finite");
  }
}

}  // namespace

PhysPoint to_physical(PixelCoord c, double pitch_mm) {
  return {static_cast<double>(c.col) * pitch_mm, static_cast<double>(c.row) * pitch_mm};
}

GrayImage::GrayImage(std::size_t width, std::size_t height, std::vector<double> intensities,
                     FrameMeta meta)
    : width_(width), height_(height), pixels_(std::move(intensities)), meta_(meta) {
  check_geometry(width_, height_, pixels_.size());
  check_meta(meta_);
  for (double& v : pixels_) {
    if (!(v >= -kRangeSlack && v <= 1.0 + kRangeSlack)) {
      throw DataError("intensity outside [0,1]: " + std::to_string(v));
    }
    v = std::clamp(v, 0.0, 1.0);
  }
}

GrayImage GrayImage::filled(std::size_t width, std::size_t height, double value, FrameMeta meta) {
  return GrayImage(width, height, std::vector<double>(width * height, value), meta);
}

PhysPoint GrayImage::to_physical(PixelCoord local) const {
  return pradkit::to_physical(
      {local.col + meta_.roi_offset.col, local.row + meta_.roi_offset.row}, meta_.pixel_pitch_mm);
}

GrayImage GrayImage::with_pixels(std::vector<double> intensities) const {
  return GrayImage(width_, height_, std::move(intensities), meta_);
}

GrayImage GrayImage::with_meta(FrameMeta meta) const {
  return GrayImage(width_, height_, pixels_, meta);
}

BinaryImage::BinaryImage(std::size_t width, std::size_t height,
                         std::vector<std::uint8_t> foreground, double threshold_used,
                         FrameMeta meta)
    : width_(width), height_(height), fg_(std::move(foreground)), threshold_(threshold_used),
      meta_(meta) {
  check_geometry(width_, height_, fg_.size());
  check_meta(meta_);
  for (auto& b : fg_) {
    b = b != 0 ? 1 : 0;
  }
}

BinaryImage BinaryImage::empty(std::size_t width, std::size_t height, double threshold_used,
                               FrameMeta meta) {
  return BinaryImage(width, height, std::vector<std::uint8_t>(width * height, 0), threshold_used,
                     meta);
}

std::size_t BinaryImage::count() const {
  return static_cast<std::size_t>(std::count(fg_.begin(), fg_.end(), std::uint8_t{1}));
}

BinaryImage BinaryImage::with_data(std::vector<std::uint8_t> foreground) const {
  return BinaryImage(width_, height_, std::move(foreground), threshold_, meta_);
}

GrayImage crop_roi(const GrayImage& img, const Rect& rect) {
  if (rect.cols == 0 || rect.rows == 0 || rect.col0 + rect.cols > img.width() ||
      rect.row0 + rect.rows > img.height()) {
    throw ConfigError("crop rectangle " + std::to_string(rect.cols) + "x" +
                      std::to_string(rect.rows) + "+" + std::to_string(rect.col0) + "+" +
                      std::to_string(rect.row0) + " is not inside the image");
  }
  std::vector<double> out;
  out.reserve(rect.cols * rect.rows);
  const auto src = img.pixels();
  for (std::size_t r = 0; r < rect.rows; ++r) {
    const auto first = src.begin() + static_cast<std::ptrdiff_t>((rect.row0 + r) * img.width() +
                                                                 rect.col0);
    out.insert(out.end(), first, first + static_cast<std::ptrdiff_t>(rect.cols));
  }
  FrameMeta meta = img.meta();
  meta.roi_offset.col += rect.col0;
  meta.roi_offset.row += rect.row0;
  return GrayImage(rect.cols, rect.rows, std::move(out), meta);
}

}  // namespace pradkit
