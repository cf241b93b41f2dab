#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pradkit/contour.hpp"
#include "pradkit/image.hpp"

namespace pradkit {

enum class ScanDirection { FromTop, FromBottom };

std::string_view to_string(ScanDirection d);
ScanDirection parse_scan_direction(std::string_view text);

struct ProfileSample {
  double x_mm = 0.0;
  std::optional<double> y_mm;  ///< y-up physical height; empty where the column is absent
};

/// Per-column surface height of one frame, in y-up physical coordinates
/// (row 0 maps to the largest y).
struct SurfaceProfile {
  double time_us = 0.0;
  ScanDirection orientation = ScanDirection::FromTop;
  std::vector<ProfileSample> columns;

  std::size_t present_count() const;
};

struct VelocitySample {
  double x_mm = 0.0;
  std::optional<double> v_mm_us;
};

struct VelocityField {
  double mid_time_us = 0.0;
  std::vector<VelocitySample> samples;
};

struct ApexSample {
  double mid_time_us = 0.0;
  double v_mm_us = 0.0;
};

/// Inclusive column index range.
struct ColumnRange {
  std::size_t first = 0;
  std::size_t last = 0;
};

struct CurvatureFit {
  PhysPoint center;  ///< y-up, same frame as the profile
  double radius_mm = 0.0;
  double rms_residual_mm = 0.0;
  ColumnRange window;
  std::size_t points_used = 0;
};

/// Returned instead of a fit when the points are collinear (infinite radius).
struct DegenerateFit {
  ColumnRange window;
  std::size_t points_used = 0;
};

using CurvatureResult = std::variant<CurvatureFit, DegenerateFit>;

/// First foreground row per column scanning in `direction`, as y-up mm:
/// y = (height - 1 - row) * pitch. Throws DataError for an all-background mask.
SurfaceProfile surface_profile(const BinaryImage& bin, ScanDirection direction, double pitch_mm,
                               double time_us);
/// Same, with pitch and time from the mask's frame metadata.
SurfaceProfile surface_profile(const BinaryImage& bin, ScanDirection direction);
SurfaceProfile surface_profile(const ContourMask& mask, ScanDirection direction);

/// Per-column vertical velocity (y2 - y1) / (t2 - t1) in mm/us (= km/s).
/// Throws DataError unless t2 > t1 and both profiles share one column grid.
VelocityField velocity_field(const SurfaceProfile& p1, const SurfaceProfile& p2);

/// Mean velocity over the band of columns within +-half_width of the column
/// nearest `center_x_mm`, for every consecutive pair of profiles.
std::vector<ApexSample> band_velocity(const std::vector<SurfaceProfile>& profiles,
                                      double center_x_mm, std::size_t half_width);

/// Band velocity at the surface centre: the radiographic analogue of the
/// point velocimeter reading.
std::vector<ApexSample> apex_velocity(const std::vector<SurfaceProfile>& profiles,
                                      double center_x_mm, std::size_t half_width = 5);

/// Algebraic least-squares circle (Kasa) through the present samples in
/// `window`. Fewer than three points is a DataError.
CurvatureResult curvature_fit(const SurfaceProfile& p, ColumnRange window);

/// The central `fraction` of the span between the first and last present
/// columns, useful for fitting a cap away from its steep flanks.
ColumnRange central_window(const SurfaceProfile& p, double fraction);

}  // namespace pradkit
