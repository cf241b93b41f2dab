#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace pradkit {

/// Integer pixel position. Row 0 is the top of the image; rows grow downward.
struct PixelCoord {
  std::size_t col = 0;
  std::size_t row = 0;

  friend auto operator<=>(const PixelCoord&, const PixelCoord&) = default;
};

/// Position in millimetres. Produced by to_physical() with the same
/// orientation as pixel space (y grows downward); kinematics flips to y-up.
struct PhysPoint {
  double x_mm = 0.0;
  double y_mm = 0.0;
};

/// Per-frame acquisition metadata carried alongside every image.
struct FrameMeta {
  double pixel_pitch_mm = 0.1;  ///< mm per pixel side
  double time_us = 0.0;         ///< exposure midpoint, us since ignition
  double exposure_us = 0.0;     ///< proton collection window
  PixelCoord roi_offset{};      ///< position of local (0,0) in the uncropped frame
};

/// Linear pixel-to-millimetre conversion at a fixed pitch.
PhysPoint to_physical(PixelCoord c, double pitch_mm);

/// Axis-aligned pixel rectangle.
struct Rect {
  std::size_t col0 = 0;
  std::size_t row0 = 0;
  std::size_t cols = 0;
  std::size_t rows = 0;
};

/// Immutable grayscale frame with intensities in [0,1].
///
/// Dense material is dark (low intensity), matching radiographic
/// attenuation. Pixels are stored row-major.
class GrayImage {
 public:
  GrayImage(std::size_t width, std::size_t height, std::vector<double> intensities,
            FrameMeta meta = {});

  static GrayImage filled(std::size_t width, std::size_t height, double value,
                          FrameMeta meta = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return pixels_.size(); }
  std::span<const double> pixels() const { return pixels_; }
  double at(std::size_t col, std::size_t row) const { return pixels_[row * width_ + col]; }

  const FrameMeta& meta() const { return meta_; }
  double pitch_mm() const { return meta_.pixel_pitch_mm; }
  double time_us() const { return meta_.time_us; }
  double exposure_us() const { return meta_.exposure_us; }

  /// Physical position of a local pixel, accounting for any crop offset so
  /// that coordinates agree with the parent frame.
  PhysPoint to_physical(PixelCoord local) const;

  /// Same geometry and metadata, new pixel values.
  GrayImage with_pixels(std::vector<double> intensities) const;
  GrayImage with_meta(FrameMeta meta) const;

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> pixels_;
  FrameMeta meta_;
};

/// Thresholded foreground grid. Foreground bytes are 0 or 1.
class BinaryImage {
 public:
  BinaryImage(std::size_t width, std::size_t height, std::vector<std::uint8_t> foreground,
              double threshold_used = 0.0, FrameMeta meta = {});

  static BinaryImage empty(std::size_t width, std::size_t height, double threshold_used = 0.0,
                           FrameMeta meta = {});

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::size_t size() const { return fg_.size(); }
  std::span<const std::uint8_t> data() const { return fg_; }
  bool at(std::size_t col, std::size_t row) const { return fg_[row * width_ + col] != 0; }
  bool contains(std::ptrdiff_t col, std::ptrdiff_t row) const {
    return col >= 0 && row >= 0 && static_cast<std::size_t>(col) < width_ &&
           static_cast<std::size_t>(row) < height_;
  }

  double threshold_used() const { return threshold_; }
  const FrameMeta& meta() const { return meta_; }

  std::size_t count() const;
  BinaryImage with_data(std::vector<std::uint8_t> foreground) const;

  friend bool operator==(const BinaryImage& a, const BinaryImage& b) {
    return a.width_ == b.width_ && a.height_ == b.height_ && a.fg_ == b.fg_;
  }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<std::uint8_t> fg_;
  double threshold_;
  FrameMeta meta_;
};

/// Copies a sub-rectangle. The crop offset accumulates into roi_offset.
GrayImage crop_roi(const GrayImage& img, const Rect& rect);

}  // namespace pradkit
