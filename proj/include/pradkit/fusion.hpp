#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "pradkit/keyvalue.hpp"
#include "pradkit/pipeline.hpp"
#include "pradkit/visar.hpp"

namespace pradkit {

/// Everything needed to assemble one experiment. Parsed from a key=value
/// file; relative paths resolve against the descriptor's directory.
struct ExperimentDescriptor {
  double thickness_in = 0.0;
  std::string label;
  std::optional<std::filesystem::path> visar_path;
  std::vector<std::filesystem::path> frame_paths;
  std::vector<double> frame_times_us;  ///< overrides sidecar times when non-empty
  FrameMeta frame_defaults;            ///< used for frames without a sidecar
  TrackingParams tracking;
  std::optional<double> apex_center_x_mm;  ///< defaults to the frame centre
  std::size_t apex_half_width = 5;
  FluctuationParams fluctuation;

  static ExperimentDescriptor from_keyvalue(const KeyValueFile& kv,
                                            const std::filesystem::path& base_dir = {});
  static ExperimentDescriptor load(const std::filesystem::path& path);
};

struct ExperimentRecord {
  double thickness_in = 0.0;
  std::string label;
  std::vector<GrayImage> frames;
  std::optional<VisarSeries> visar;
  std::optional<FeatureSet> features;
  std::optional<std::vector<ApexSample>> prad_apex;
};

/// Loads frames and the velocimeter record, extracts velocimeter features
/// and runs the apex pipeline. Errors carry the experiment label and the
/// failing source.
ExperimentRecord build_record(const ExperimentDescriptor& desc, int jobs = 1);

enum class Feature { PlateauV, NoiseRms, FluctAmplitude, FirstFluctT, MeanApexV };
inline constexpr std::array<Feature, 5> kAllFeatures = {
    Feature::PlateauV, Feature::NoiseRms, Feature::FluctAmplitude, Feature::FirstFluctT,
    Feature::MeanApexV};

std::string_view feature_name(Feature f);
Feature parse_feature(std::string_view name);

struct FeatureRow {
  double thickness_in = 0.0;
  std::string label;
  std::array<std::optional<double>, kAllFeatures.size()> values;

  const std::optional<double>& operator[](Feature f) const {
    return values[static_cast<std::size_t>(f)];
  }
  std::optional<double>& operator[](Feature f) { return values[static_cast<std::size_t>(f)]; }
};

/// Thickness-indexed table of per-experiment summary features; rows are
/// sorted by thickness and keys are unique. Empty cells mark missing sources.
struct FeatureTable {
  std::vector<FeatureRow> rows;
};

FeatureTable feature_table(const std::vector<ExperimentRecord>& records);

/// Builds a table directly from rows (sorted, duplicate keys rejected).
FeatureTable make_feature_table(std::vector<FeatureRow> rows);

/// Piecewise-linear interpolation of `feature` in thickness across the rows
/// where it is present. No extrapolation.
double interpolate_missing(const FeatureTable& table, Feature feature, double thickness_in);

struct TrendViolation {
  double thickness_lo = 0.0;
  double thickness_hi = 0.0;
  double value_lo = 0.0;
  double value_hi = 0.0;
};

struct TrendCheck {
  std::string name;
  Feature feature = Feature::PlateauV;
  bool increasing = true;
  bool passed = false;
  std::size_t rows_used = 0;
  std::vector<TrendViolation> violations;
};

struct TrendReport {
  std::vector<TrendCheck> checks;

  std::size_t passed_count() const;
  bool all_passed() const { return passed_count() == checks.size(); }
};

/// The four thickness trends of the velocimeter record, each checked as weak
/// monotonicity across consecutive present rows:
/// plateau velocity decreases; noise, fluctuation magnitude and time to the
/// first fluctuation increase. Each feature needs three present rows.
TrendReport trend_report(const FeatureTable& table);

}  // namespace pradkit
