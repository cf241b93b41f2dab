#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include <json.hpp>

#include "pradkit/contour.hpp"
#include "pradkit/fusion.hpp"
#include "pradkit/kinematics.hpp"
#include "pradkit/visar.hpp"

namespace pradkit {

// CSV writers. Numbers use the shortest round-trip representation and
// missing values are empty cells.

/// frame_time_us,structure_label,point_index,x_mm,y_mm
void write_contours_csv(const std::vector<Contour>& contours, const std::filesystem::path& path);
/// time_us,x_mm,y_mm
void write_profiles_csv(const std::vector<SurfaceProfile>& profiles,
                        const std::filesystem::path& path);
/// time_us,x_mm,v_mm_us
void write_velocity_csv(const std::vector<VelocityField>& fields, const std::filesystem::path& path);
/// mid_time_us,v_km_s
void write_apex_csv(const std::vector<ApexSample>& apex, const std::filesystem::path& path);
/// thickness_in,label,plateau_v,noise_rms,fluct_amplitude,first_fluct_t,mean_apex_v
void write_feature_table_csv(const FeatureTable& table, const std::filesystem::path& path);

nlohmann::ordered_json to_json(const FeatureSet& f);
nlohmann::ordered_json to_json(const ComparisonReport& r);
nlohmann::ordered_json to_json(const TrendReport& r);

/// Pretty-printed JSON with a trailing newline.
void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path);

struct PlotSeries {
  std::string name;
  std::vector<double> x;
  std::vector<double> y;  ///< NaN breaks the line
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  std::vector<PlotSeries> series;
};

/// Static SVG line chart; the same input always produces the same bytes.
std::string render_svg(const PlotSpec& plot);
void write_svg(const PlotSpec& plot, const std::filesystem::path& path);

/// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);

}  // namespace pradkit
