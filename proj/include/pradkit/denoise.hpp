#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "pradkit/image.hpp"

namespace pradkit {

/// Per-pixel diffusivity in [0,1] with the geometry of the image it drives.
class DiffusivityMap {
 public:
  DiffusivityMap(std::size_t width, std::size_t height, std::vector<double> values);
  static DiffusivityMap constant(std::size_t width, std::size_t height, double value);

  std::size_t width() const { return width_; }
  std::size_t height() const { return height_; }
  std::span<const double> values() const { return values_; }
  double at(std::size_t col, std::size_t row) const { return values_[row * width_ + col]; }
  double max() const { return max_; }

 private:
  std::size_t width_;
  std::size_t height_;
  std::vector<double> values_;
  double max_ = 0.0;
};

/// Explicit five-point heat-equation steps, I <- I + dt * div(g grad I),
/// with zero-flux borders. The conductance across a pixel face is the mean
/// of the two pixel diffusivities, so the intensity sum is conserved for any
/// map and the max principle holds whenever dt * max(g) <= 0.25.
///
/// Throws ConfigError on a stability violation or negative step count and
/// DataError when the map geometry differs from the image.
GrayImage diffuse(const GrayImage& img, const DiffusivityMap& g, int steps, double dt);

/// Constant-diffusivity overload (the plain heat equation).
GrayImage diffuse(const GrayImage& img, double g, int steps, double dt);

/// Edge-stopping map g = 1 / (1 + (|grad I| / lambda)^2). The gradient uses
/// central differences in the interior and one-sided differences at borders.
DiffusivityMap adaptive_diffusivity(const GrayImage& img, double edge_sensitivity);

struct HeatDenoiseParams {
  double edge_sensitivity = 0.15;  ///< lambda
  int steps = 20;
  double dt = 0.2;
};

/// Edge-preserving smoothing: the map is recomputed from the current iterate
/// before every single diffusion step.
GrayImage heat_denoise(const GrayImage& img, const HeatDenoiseParams& params = {});

}  // namespace pradkit
