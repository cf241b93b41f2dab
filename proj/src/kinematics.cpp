#include "pradkit/kinematics.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>

#include "pradkit/error.hpp"
#include "pradkit/keyvalue.hpp"

namespace pradkit {

namespace {

void check_grids(const SurfaceProfile& a, const SurfaceProfile& b) {
  if (a.columns.size() != b.columns.size()) {
    throw DataError("profiles have different column counts");
  }
  for (std::size_t i = 0; i < a.columns.size(); ++i) {
    if (std::abs(a.columns[i].x_mm - b.columns[i].x_mm) > 1e-9) {
      throw DataError("profiles have different column positions");
    }
  }
}

std::size_t nearest_column(const SurfaceProfile& p, double x_mm) {
  if (p.columns.empty()) {
    throw DataError("profile has no columns");
  }
  std::size_t best = 0;
  for (std::size_t i = 1; i < p.columns.size(); ++i) {
    if (std::abs(p.columns[i].x_mm - x_mm) < std::abs(p.columns[best].x_mm - x_mm)) {
      best = i;
    }
  }
  return best;
}

}  // namespace

std::string_view to_string(ScanDirection d) {
  return d == ScanDirection::FromTop ? "from_top" : "from_bottom";
}

ScanDirection parse_scan_direction(std::string_view text) {
  if (text == "from_top") return ScanDirection::FromTop;
  if (text == "from_bottom") return ScanDirection::FromBottom;
  throw ConfigError("scan direction must be from_top or from_bottom, got '" + std::string(text) +
                    "'");
}

std::size_t SurfaceProfile::present_count() const {
  return static_cast<std::size_t>(
      std::count_if(columns.begin(), columns.end(), [](const auto& s) { return s.y_mm.has_value(); }));
}

SurfaceProfile surface_profile(const BinaryImage& bin, ScanDirection direction, double pitch_mm,
                               double time_us) {
  if (!(pitch_mm > 0.0)) {
    throw ConfigError("pixel pitch must be positive");
  }
  const std::size_t w = bin.width();
  const std::size_t h = bin.height();
  SurfaceProfile out;
  out.time_us = time_us;
  out.orientation = direction;
  out.columns.resize(w);
  for (std::size_t c = 0; c < w; ++c) {
    out.columns[c].x_mm = static_cast<double>(c) * pitch_mm;
    for (std::size_t k = 0; k < h; ++k) {
      const std::size_t r = direction == ScanDirection::FromTop ? k : h - 1 - k;
      if (bin.at(c, r)) {
        out.columns[c].y_mm = static_cast<double>(h - 1 - r) * pitch_mm;
        break;
      }
    }
  }
  if (out.present_count() == 0) {
    throw DataError("surface profile of an all-background mask");
  }
  return out;
}

SurfaceProfile surface_profile(const BinaryImage& bin, ScanDirection direction) {
  return surface_profile(bin, direction, bin.meta().pixel_pitch_mm, bin.meta().time_us);
}

SurfaceProfile surface_profile(const ContourMask& mask, ScanDirection direction) {
  return surface_profile(mask.mask, direction);
}

VelocityField velocity_field(const SurfaceProfile& p1, const SurfaceProfile& p2) {
  const double dt = p2.time_us - p1.time_us;
  if (!(dt > 0.0) || !std::isfinite(dt)) {
    throw DataError("velocity needs increasing frame times, got " + format_number(p1.time_us) +
                    " then " + format_number(p2.time_us) + " us");
  }
  check_grids(p1, p2);
  VelocityField out;
  out.mid_time_us = 0.5 * (p1.time_us + p2.time_us);
  out.samples.resize(p1.columns.size());
  for (std::size_t i = 0; i < p1.columns.size(); ++i) {
    out.samples[i].x_mm = p1.columns[i].x_mm;
    const auto& a = p1.columns[i].y_mm;
    const auto& b = p2.columns[i].y_mm;
    if (a && b) {
      out.samples[i].v_mm_us = (*b - *a) / dt;
    }
  }
  return out;
}

std::vector<ApexSample> band_velocity(const std::vector<SurfaceProfile>& profiles,
                                      double center_x_mm, std::size_t half_width) {
  if (profiles.size() < 2) {
    throw DataError("band velocity needs at least two profiles");
  }
  const std::size_t center = nearest_column(profiles.front(), center_x_mm);
  const std::size_t lo = center >= half_width ? center - half_width : 0;
  const std::size_t hi = std::min(center + half_width, profiles.front().columns.size() - 1);
  std::vector<ApexSample> out;
  out.reserve(profiles.size() - 1);
  for (std::size_t k = 0; k + 1 < profiles.size(); ++k) {
    const auto field = velocity_field(profiles[k], profiles[k + 1]);
    double sum = 0.0;
    std::size_t n = 0;
    for (std::size_t c = lo; c <= hi; ++c) {
      if (const auto& v = field.samples[c].v_mm_us) {
        sum += *v;
        ++n;
      }
    }
    if (n == 0) {
      throw DataError("velocity band at x=" + std::to_string(center_x_mm) +
                      " mm is absent in frame pair " + std::to_string(k));
    }
    out.push_back({field.mid_time_us, sum / static_cast<double>(n)});
  }
  return out;
}

std::vector<ApexSample> apex_velocity(const std::vector<SurfaceProfile>& profiles,
                                      double center_x_mm, std::size_t half_width) {
  return band_velocity(profiles, center_x_mm, half_width);
}

CurvatureResult curvature_fit(const SurfaceProfile& p, ColumnRange window) {
  if (window.first > window.last || window.last >= p.columns.size()) {
    throw ConfigError("curvature window outside the profile");
  }
  std::vector<double> xs;
  std::vector<double> ys;
  for (std::size_t c = window.first; c <= window.last; ++c) {
    if (const auto& y = p.columns[c].y_mm) {
      xs.push_back(p.columns[c].x_mm);
      ys.push_back(*y);
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) {
    throw DataError("curvature fit needs at least three present columns");
  }
  // Centre the data for conditioning, then solve
  //   x^2 + y^2 + D x + E y + F = 0
  // in the least-squares sense.
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  Eigen::MatrixXd a(n, 3);
  Eigen::VectorXd b(n);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    scale = std::max({scale, std::abs(xs[i] - mx), std::abs(ys[i] - my)});
  }
  if (scale == 0.0) {
    return DegenerateFit{window, n};
  }
  for (std::size_t i = 0; i < n; ++i) {
    const double u = (xs[i] - mx) / scale;
    const double v = (ys[i] - my) / scale;
    const auto row = static_cast<Eigen::Index>(i);
    a(row, 0) = u;
    a(row, 1) = v;
    a(row, 2) = 1.0;
    b(row) = -(u * u + v * v);
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(a);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3) {
    return DegenerateFit{window, n};
  }
  const Eigen::Vector3d sol = qr.solve(b);
  const double cu = -0.5 * sol(0);
  const double cv = -0.5 * sol(1);
  const double r2 = cu * cu + cv * cv - sol(2);
  if (!(r2 > 0.0) || !std::isfinite(r2)) {
    return DegenerateFit{window, n};
  }
  CurvatureFit fit;
  fit.window = window;
  fit.points_used = n;
  fit.center = {mx + cu * scale, my + cv * scale};
  fit.radius_mm = std::sqrt(r2) * scale;
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::hypot(xs[i] - fit.center.x_mm, ys[i] - fit.center.y_mm) - fit.radius_mm;
    ss += d * d;
  }
  fit.rms_residual_mm = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

ColumnRange central_window(const SurfaceProfile& p, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0)) {
    throw ConfigError("window fraction must lie in (0,1]");
  }
  std::optional<std::size_t> first;
  std::size_t last = 0;
  for (std::size_t c = 0; c < p.columns.size(); ++c) {
    if (p.columns[c].y_mm) {
      if (!first) first = c;
      last = c;
    }
  }
  if (!first) {
    throw DataError("profile has no present columns");
  }
  const double mid = 0.5 * static_cast<double>(*first + last);
  const double half = 0.5 * fraction * static_cast<double>(last - *first);
  return {static_cast<std::size_t>(std::ceil(mid - half)),
          static_cast<std::size_t>(std::floor(mid + half))};
}

}  // namespace pradkit
