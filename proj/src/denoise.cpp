#include "pradkit/denoise.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "pradkit/error.hpp"

namespace pradkit {

namespace {

constexpr double kStabilityLimit = 0.25;

void check_step_params(int steps, double dt, double g_max) {
  if (steps < 0) {
    throw ConfigError("diffusion step count must be non-negative");
  }
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw ConfigError("diffusion time step must be positive");
  }
  if (dt * g_max > kStabilityLimit) {
    throw ConfigError("unstable diffusion: dt * max(g) = " + std::to_string(dt * g_max) +
                      " exceeds 0.25");
  }
}

// One explicit step in flux form. `g` is null for a constant diffusivity of
// `g_const`. Border faces carry no flux (mirrored neighbour).
void diffusion_step(std::span<const double> in, std::span<double> out, const double* g,
                    double g_const, std::size_t w, std::size_t h, double dt) {
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const std::size_t i = r * w + c;
      const double v = in[i];
      const double gi = g ? g[i] : g_const;
      double flux = 0.0;
      auto face = [&](std::size_t j) {
        const double gf = g ? 0.5 * (gi + g[j]) : g_const;
        flux += gf * (in[j] - v);
      };
      if (c > 0) face(i - 1);
      if (c + 1 < w) face(i + 1);
      if (r > 0) face(i - w);
      if (r + 1 < h) face(i + w);
      out[i] = v + dt * flux;
    }
  }
}

GrayImage run_diffusion(const GrayImage& img, const double* g, double g_const, int steps,
                        double dt) {
  std::vector<double> cur(img.pixels().begin(), img.pixels().end());
  std::vector<double> next(cur.size());
  for (int s = 0; s < steps; ++s) {
    diffusion_step(cur, next, g, g_const, img.width(), img.height(), dt);
    cur.swap(next);
  }
  return img.with_pixels(std::move(cur));
}

}  // namespace

DiffusivityMap::DiffusivityMap(std::size_t width, std::size_t height, std::vector<double> values)
    : width_(width), height_(height), values_(std::move(values)) {
  if (values_.size() != width_ * height_ || width_ == 0 || height_ == 0) {
    throw DataError("diffusivity map size does not match its geometry");
  }
  for (double v : values_) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw ConfigError("diffusivity outside [0,1]: " + std::to_string(v));
    }
    max_ = std::max(max_, v);
  }
}

DiffusivityMap DiffusivityMap::constant(std::size_t width, std::size_t height, double value) {
  return DiffusivityMap(width, height, std::vector<double>(width * height, value));
}

GrayImage diffuse(const GrayImage& img, const DiffusivityMap& g, int steps, double dt) {
  if (g.width() != img.width() || g.height() != img.height()) {
    throw DataError("diffusivity map geometry does not match the image");
  }
  check_step_params(steps, dt, g.max());
  return run_diffusion(img, g.values().data(), 0.0, steps, dt);
}

GrayImage diffuse(const GrayImage& img, double g, int steps, double dt) {
  if (!(g >= 0.0 && g <= 1.0)) {
    throw ConfigError("diffusivity outside [0,1]: " + std::to_string(g));
  }
  check_step_params(steps, dt, g);
  return run_diffusion(img, nullptr, g, steps, dt);
}

DiffusivityMap adaptive_diffusivity(const GrayImage& img, double edge_sensitivity) {
  if (!(edge_sensitivity > 0.0) || !std::isfinite(edge_sensitivity)) {
    throw ConfigError("edge sensitivity must be positive");
  }
  const std::size_t w = img.width();
  const std::size_t h = img.height();
  const auto px = img.pixels();
  // Central difference inside, one-sided at the borders, zero on a 1-wide axis.
  auto derivative = [](std::size_t k, std::size_t n, auto value_at) {
    if (n == 1) return 0.0;
    if (k == 0) return value_at(1) - value_at(0);
    if (k == n - 1) return value_at(n - 1) - value_at(n - 2);
    return 0.5 * (value_at(k + 1) - value_at(k - 1));
  };
  const double inv_l2 = 1.0 / (edge_sensitivity * edge_sensitivity);
  std::vector<double> g(px.size());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      const double gx = derivative(c, w, [&](std::size_t k) { return px[r * w + k]; });
      const double gy = derivative(r, h, [&](std::size_t k) { return px[k * w + c]; });
      g[r * w + c] = 1.0 / (1.0 + (gx * gx + gy * gy) * inv_l2);
    }
  }
  return DiffusivityMap(w, h, std::move(g));
}

GrayImage heat_denoise(const GrayImage& img, const HeatDenoiseParams& params) {
  check_step_params(params.steps, params.dt, 1.0);
  if (!(params.edge_sensitivity > 0.0)) {
    throw ConfigError("edge sensitivity must be positive");
  }
  GrayImage cur = img;
  for (int s = 0; s < params.steps; ++s) {
    const auto g = adaptive_diffusivity(cur, params.edge_sensitivity);
    cur = diffuse(cur, g, 1, params.dt);
  }
  return cur;
}

}  // namespace pradkit
