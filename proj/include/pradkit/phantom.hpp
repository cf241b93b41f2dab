#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "pradkit/image.hpp"
#include "pradkit/keyvalue.hpp"
#include "pradkit/visar.hpp"

namespace pradkit {

/// Velocimeter oscillation: after `onset_us` the record carries
/// amplitude * exp(-damping * dt) * sin(2 pi f dt).
struct FluctuationSpec {
  double onset_us = 12.0;
  double amplitude_km_s = 0.0;
  double frequency_mhz = 0.5;
  double damping_per_us = 0.0;
};

/// Parametric melt scene. Physical coordinates are y-up with y = 0 at the
/// bottom pixel row; pixel (col, row) samples the point
/// (col * pitch, (height - 1 - row) * pitch).
///
/// Top surface: y_s(x,t) = base + speed * t + bulge_rate * t * exp(-(x - cx)^2 / (2 w^2)).
/// Material fills floor <= y <= y_s. The bubble is a disc of radius
/// R0 + growth * t centred at (cx, cy0 + bubble_speed * t), painted over
/// the material at its own (darkest) intensity.
struct PhantomSpec {
  std::size_t width_px = 512;
  std::size_t height_px = 512;
  double pixel_pitch_mm = 0.1;

  std::optional<double> center_x_mm;  ///< defaults to the image centre column
  double surface_base_mm = 10.0;
  double surface_speed_mm_us = 1.0;
  double bulge_rate_mm_us = 0.0;
  double bulge_width_mm = 5.0;
  double material_floor_mm = 0.0;

  double bubble_radius_mm = 0.0;  ///< 0 disables the bubble
  double bubble_growth_mm_us = 0.0;
  double bubble_center_y_mm = 5.0;
  double bubble_speed_mm_us = 0.0;

  double background_intensity = 0.9;
  double material_intensity = 0.5;
  double bubble_intensity = 0.15;

  double exposure_us = 3.28;
  int substeps = 32;
  double ringing_amplitude = 0.0;
  double ringing_width_px = 1.5;
  double grain_sigma = 0.0;
  int grain_cell_px = 3;
  double noise_sigma = 0.0;
  std::uint64_t seed = 1;

  // Sequence and experiment bookkeeping.
  int frame_count = 20;
  double frame_interval_us = 3.0;
  double first_frame_us = 0.0;
  double thickness_in = 0.25;
  std::string label = "phantom";

  // Velocimeter record.
  double visar_period_us = 0.1;
  double visar_end_us = 40.0;
  double visar_noise_sigma = 0.0;
  FluctuationSpec fluctuation;

  double resolved_center_x_mm() const;
  /// Exact top-surface height.
  double surface_y(double x_mm, double t_us) const;
  /// d y_s / dt at the surface centre.
  double apex_speed() const { return surface_speed_mm_us + bulge_rate_mm_us; }
  double bubble_radius(double t_us) const;
  PhysPoint bubble_center(double t_us) const;
  std::vector<double> frame_start_times() const;

  /// Throws ConfigError when an invariant is broken.
  void validate() const;

  static PhantomSpec from_keyvalue(const KeyValueFile& kv);
  static PhantomSpec load(const std::filesystem::path& path);
  KeyValueFile to_keyvalue() const;
};

struct GroundTruthFrame {
  std::size_t index = 0;
  double t_start_us = 0.0;
  double t_mid_us = 0.0;
  double apex_velocity_mm_us = 0.0;
  double bubble_radius_mm = 0.0;
  PhysPoint bubble_center;
  std::vector<double> top_surface_mm;                ///< per column
  std::vector<std::optional<double>> bubble_cap_mm;  ///< per column, upper half of the disc
};

struct GroundTruth {
  std::vector<double> x_mm;  ///< column positions
  std::vector<GroundTruthFrame> frames;
};

struct PhantomSequence {
  std::vector<GrayImage> frames;
  GroundTruth truth;
};

/// Deterministic generator behind every stochastic artifact: a 64-bit
/// Mersenne Twister seeded through splitmix64, 53-bit uniforms, and
/// Box-Muller normals (cosine branch only).
class PhantomRng {
 public:
  explicit PhantomRng(std::uint64_t seed);
  double uniform();  ///< [0,1)
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// Exposure-averaged frame starting at t_start_us. Artifacts are applied in
/// order: motion blur (substep average), ringing, grain, Gaussian noise,
/// clamp. The frame time is the exposure midpoint.
GrayImage render_frame(const PhantomSpec& spec, double t_start_us, std::size_t frame_index = 0);

GroundTruthFrame ground_truth_frame(const PhantomSpec& spec, double t_start_us,
                                    std::size_t frame_index = 0);

/// Frames for strictly increasing start times plus exact truth at each
/// exposure midpoint. `jobs` > 1 renders frames concurrently.
PhantomSequence generate_sequence(const PhantomSpec& spec, const std::vector<double>& frame_times,
                                  int jobs = 1);

/// Apex velocity plus the configured fluctuation and seeded noise, sampled
/// every `sample_period_us` from 0 to `t_end_us`.
VisarSeries generate_visar(const PhantomSpec& spec, double sample_period_us, double t_end_us,
                           const FluctuationSpec& fluct);
VisarSeries generate_visar(const PhantomSpec& spec);

void write_truth_summary(const GroundTruth& truth, const std::filesystem::path& path);
void write_truth_profiles(const GroundTruth& truth, const std::filesystem::path& path);

}  // namespace pradkit
