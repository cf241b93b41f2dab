#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "pradkit/kinematics.hpp"

namespace pradkit {

struct VisarSample {
  double t_us = 0.0;
  double v_km_s = 0.0;
};

/// Dense point-velocimetry record. Times strictly increase; at least two
/// samples. Velocities are in km/s, numerically equal to mm/us.
class VisarSeries {
 public:
  VisarSeries(std::vector<VisarSample> samples, double thickness_in = 1.0, std::string label = {});

  const std::vector<VisarSample>& samples() const { return samples_; }
  std::size_t size() const { return samples_.size(); }
  double thickness_in() const { return thickness_in_; }
  const std::string& label() const { return label_; }
  double t_min() const { return samples_.front().t_us; }
  double t_max() const { return samples_.back().t_us; }

  /// Samples with t in [t0, t1].
  VisarSeries window(double t0, double t1) const;

 private:
  std::vector<VisarSample> samples_;
  double thickness_in_;
  std::string label_;
};

/// Reads a CSV with the exact header `time_us,velocity_km_s`.
VisarSeries load_visar(const std::filesystem::path& path, double thickness_in = 1.0,
                       std::string label = {});
void save_visar(const VisarSeries& s, const std::filesystem::path& path);

/// Piecewise-linear value at t. No extrapolation: t outside the sampled
/// range is a DataError.
double resample_linear(const VisarSeries& s, double t);

/// Time-weighted mean of the piecewise-linear signal over [t0, t1]
/// (trapezoid rule on the interpolant). Needs two samples in the window.
double plateau_mean(const VisarSeries& s, double t0, double t1);

/// RMS of the residual after a centred moving-average detrend of half-width
/// w (windows truncated at the ends). Needs more than 2w+1 samples.
double noise_rms(const VisarSeries& s, int detrend_halfwidth);

struct FluctuationParams {
  double baseline_t0 = 0.0;
  double baseline_t1 = 10.0;
  double k = 3.0;          ///< exceedance threshold in baseline noise units
  int m = 3;               ///< consecutive exceedances required
  int detrend_halfwidth = 5;
};

/// Earliest sample time after the baseline window that starts a run of m
/// consecutive samples with |v - plateau| > k * noise, where plateau and
/// noise are measured on the baseline window. Empty when no run exists.
std::optional<double> first_fluctuation_time(const VisarSeries& s, const FluctuationParams& p);

struct FeatureSet {
  double plateau_v_km_s = 0.0;
  double noise_rms_km_s = 0.0;
  double fluct_amplitude_km_s = 0.0;
  std::optional<double> first_fluct_t_us;
};

/// Plateau and noise from the baseline window; fluctuation amplitude is
/// sqrt(2) times the RMS deviation from the plateau from the fluctuation
/// onset onward (the amplitude of a sinusoid with that RMS), 0 if none.
FeatureSet extract_features(const VisarSeries& s, const FluctuationParams& p);

struct ComparisonReport {
  std::size_t n = 0;
  double bias = 0.0;  ///< mean(v_apex - v_visar)
  double rms = 0.0;
};

/// Compares radiograph apex velocities to the velocimeter at the apex times
/// that fall inside the series' time range.
ComparisonReport compare_prad_visar(const std::vector<ApexSample>& apex, const VisarSeries& s);

std::vector<ApexSample> load_apex_csv(const std::filesystem::path& path);

}  // namespace pradkit
