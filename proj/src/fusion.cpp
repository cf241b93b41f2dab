#include "pradkit/fusion.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <set>

#include "pradkit/error.hpp"
#include "pradkit/io.hpp"
#include "pradkit/parallel.hpp"

namespace pradkit {

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  const std::filesystem::path path(p);
  return path.is_absolute() || base.empty() ? path : base / path;
}

// Re-throws the active exception with `context` prefixed, keeping its category.
[[noreturn]] void rethrow_with_context(const std::string& context) {
  try {
    throw;
  } catch (const ConfigError& e) {
    throw ConfigError(context + ": " + e.what());
  } catch (const IoError& e) {
    throw IoError(context + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError(context + ": " + e.what());
  }
}

}  // namespace

ExperimentDescriptor ExperimentDescriptor::from_keyvalue(const KeyValueFile& kv,
                                                         const std::filesystem::path& base_dir) {
  kv.require_known({"thickness_in", "label", "visar", "frames", "frame_times_us", "time_us",
                    "exposure_us", "pixel_pitch_mm", "denoise", "lambda", "steps", "dt",
                    "threshold", "connectivity", "direction", "apex_center_x_mm",
                    "apex_half_width", "baseline_t0", "baseline_t1", "detrend_halfwidth",
                    "fluct_k", "fluct_m"});
  ExperimentDescriptor d;
  d.thickness_in = kv.get_double("thickness_in");
  if (!(d.thickness_in > 0.0)) {
    throw ConfigError("experiment thickness_in must be positive");
  }
  d.label = kv.get_string("label", format_number(d.thickness_in) + " in");
  if (kv.contains("visar") && !kv.get_string("visar").empty()) {
    d.visar_path = resolve(base_dir, kv.get_string("visar"));
  }
  if (kv.contains("frames")) {
    for (const auto& f : kv.get_strings("frames")) {
      d.frame_paths.push_back(resolve(base_dir, f));
    }
  }
  if (kv.contains("frame_times_us")) {
    d.frame_times_us = kv.get_doubles("frame_times_us");
    if (d.frame_times_us.size() != d.frame_paths.size()) {
      throw ConfigError("frame_times_us must list one time per frame");
    }
  }
  d.frame_defaults.time_us = kv.get_double("time_us", d.frame_defaults.time_us);
  d.frame_defaults.exposure_us = kv.get_double("exposure_us", d.frame_defaults.exposure_us);
  d.frame_defaults.pixel_pitch_mm = kv.get_double("pixel_pitch_mm", d.frame_defaults.pixel_pitch_mm);

  auto& t = d.tracking;
  t.denoise = kv.get_bool("denoise", t.denoise);
  t.denoise_params.edge_sensitivity = kv.get_double("lambda", t.denoise_params.edge_sensitivity);
  t.denoise_params.steps = static_cast<int>(kv.get_int("steps", t.denoise_params.steps));
  t.denoise_params.dt = kv.get_double("dt", t.denoise_params.dt);
  t.threshold = kv.get_double("threshold", t.threshold);
  t.connectivity = parse_connectivity(static_cast<int>(kv.get_int("connectivity", 4)));
  t.direction = parse_scan_direction(kv.get_string("direction", "from_top"));

  d.apex_center_x_mm = kv.find_double("apex_center_x_mm");
  const auto hw = kv.get_int("apex_half_width", static_cast<long long>(d.apex_half_width));
  if (hw < 0) {
    throw ConfigError("apex_half_width must be non-negative");
  }
  d.apex_half_width = static_cast<std::size_t>(hw);

  auto& f = d.fluctuation;
  f.baseline_t0 = kv.get_double("baseline_t0", f.baseline_t0);
  f.baseline_t1 = kv.get_double("baseline_t1", f.baseline_t1);
  f.detrend_halfwidth = static_cast<int>(kv.get_int("detrend_halfwidth", f.detrend_halfwidth));
  f.k = kv.get_double("fluct_k", f.k);
  f.m = static_cast<int>(kv.get_int("fluct_m", f.m));
  return d;
}

ExperimentDescriptor ExperimentDescriptor::load(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::load(path), path.parent_path());
}

ExperimentRecord build_record(const ExperimentDescriptor& desc, int jobs) {
  const std::string who = "experiment '" + desc.label + "'";
  if (!desc.visar_path && desc.frame_paths.empty()) {
    throw ConfigError(who + ": descriptor names no velocimeter record and no frames");
  }
  ExperimentRecord rec;
  rec.thickness_in = desc.thickness_in;
  rec.label = desc.label;

  if (desc.visar_path) {
    try {
      rec.visar = load_visar(*desc.visar_path, desc.thickness_in, desc.label);
      rec.features = extract_features(*rec.visar, desc.fluctuation);
    } catch (const Error&) {
      rethrow_with_context(who + ": velocimeter " + desc.visar_path->string());
    }
  }

  std::vector<std::optional<GrayImage>> slots(desc.frame_paths.size());
  parallel_for(slots.size(), jobs, [&](std::size_t i) {
    try {
      auto img = load_frame(desc.frame_paths[i], desc.frame_defaults);
      if (!desc.frame_times_us.empty()) {
        auto meta = img.meta();
        meta.time_us = desc.frame_times_us[i];
        img = img.with_meta(meta);
      }
      slots[i].emplace(std::move(img));
    } catch (const Error&) {
      rethrow_with_context(who + ": frame " + desc.frame_paths[i].string());
    }
  });
  for (auto& s : slots) {
    rec.frames.push_back(std::move(*s));
  }

  if (rec.frames.size() >= 2) {
    try {
      const auto profiles = track_sequence(rec.frames, desc.tracking, jobs);
      const auto& f0 = rec.frames.front();
      const double center = desc.apex_center_x_mm.value_or(
          0.5 * static_cast<double>(f0.width() - 1) * f0.pitch_mm());
      rec.prad_apex = apex_velocity(profiles, center, desc.apex_half_width);
    } catch (const Error&) {
      rethrow_with_context(who + ": apex pipeline");
    }
  }
  return rec;
}

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::PlateauV: return "plateau_v";
    case Feature::NoiseRms: return "noise_rms";
    case Feature::FluctAmplitude: return "fluct_amplitude";
    case Feature::FirstFluctT: return "first_fluct_t";
    case Feature::MeanApexV: return "mean_apex_v";
  }
  return "unknown";
}

Feature parse_feature(std::string_view name) {
  for (auto f : kAllFeatures) {
    if (feature_name(f) == name) {
      return f;
    }
  }
  throw ConfigError("unknown feature '" + std::string(name) + "'");
}

FeatureTable make_feature_table(std::vector<FeatureRow> rows) {
  if (rows.empty()) {
    throw DataError("feature table needs at least one record");
  }
  std::sort(rows.begin(), rows.end(),
            [](const FeatureRow& a, const FeatureRow& b) { return a.thickness_in < b.thickness_in; });
  for (std::size_t i = 1; i < rows.size(); ++i) {
    if (rows[i].thickness_in == rows[i - 1].thickness_in) {
      throw DataError("duplicate thickness " + format_number(rows[i].thickness_in) +
                      " in in feature table");
    }
  }
  return {std::move(rows)};
}

FeatureTable feature_table(const std::vector<ExperimentRecord>& records) {
  std::vector<FeatureRow> rows;
  rows.reserve(records.size());
  for (const auto& rec : records) {
    FeatureRow row;
    row.thickness_in = rec.thickness_in;
    row.label = rec.label;
    if (rec.features) {
      row[Feature::PlateauV] = rec.features->plateau_v_km_s;
      row[Feature::NoiseRms] = rec.features->noise_rms_km_s;
      row[Feature::FluctAmplitude] = rec.features->fluct_amplitude_km_s;
      row[Feature::FirstFluctT] = rec.features->first_fluct_t_us;
    }
    if (rec.prad_apex && !rec.prad_apex->empty()) {
      double sum = 0.0;
      for (const auto& a : *rec.prad_apex) {
        sum += a.v_mm_us;
      }
      row[Feature::MeanApexV] = sum / static_cast<double>(rec.prad_apex->size());
    }
    rows.push_back(std::move(row));
  }
  return make_feature_table(std::move(rows));
}

double interpolate_missing(const FeatureTable& table, Feature feature, double thickness_in) {
  std::vector<std::pair<double, double>> pts;
  for (const auto& row : table.rows) {
    if (const auto& v = row[feature]) {
      pts.emplace_back(row.thickness_in, *v);
    }
  }
  if (pts.size() < 2) {
    throw DataError("interpolating " + std::string(feature_name(feature)) +
                    " needs at least two present values");
  }
  if (!(thickness_in >= pts.front().first && thickness_in <= pts.back().first)) {
    throw DataError("thickness " + format_number(thickness_in) + " in is outside [" +
                    format_number(pts.front().first) + ", " + format_number(pts.back().first) +
                    "]");
  }
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    const auto [x0, y0] = pts[i];
    const auto [x1, y1] = pts[i + 1];
    if (thickness_in == x0) return y0;
    if (thickness_in == x1) return y1;
    if (thickness_in > x0 && thickness_in < x1) {
      return y0 + (y1 - y0) * ((thickness_in - x0) / (x1 - x0));
    }
  }
  return pts.back().second;
}

std::size_t TrendReport::passed_count() const {
  return static_cast<std::size_t>(
      std::count_if(checks.begin(), checks.end(), [](const TrendCheck& c) { return c.passed; }));
}

TrendReport trend_report(const FeatureTable& table) {
  struct Spec {
    const char* name;
    Feature feature;
    bool increasing;
  };
  static constexpr std::array<Spec, 4> kTrends = {{
      {"average_velocity_decreases", Feature::PlateauV, false},
      {"noise_increases", Feature::NoiseRms, true},
      {"fluctuation_magnitude_increases", Feature::FluctAmplitude, true},
      {"time_to_first_fluctuation_increases", Feature::FirstFluctT, true},
  }};
  TrendReport report;
  for (const auto& spec : kTrends) {
    TrendCheck check;
    check.name = spec.name;
    check.feature = spec.feature;
    check.increasing = spec.increasing;
    std::vector<std::pair<double, double>> pts;
    for (const auto& row : table.rows) {
      if (const auto& v = row[spec.feature]) {
        pts.emplace_back(row.thickness_in, *v);
      }
    }
    if (pts.size() < 3) {
      throw DataError("trend '" + std::string(spec.name) + "' needs at least three rows with " +
                      std::string(feature_name(spec.feature)) + ", found " +
                      std::to_string(pts.size()));
    }
    check.rows_used = pts.size();
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double a = pts[i].second;
      const double b = pts[i + 1].second;
      const bool ok = spec.increasing ? b >= a : b <= a;
      if (!ok) {
        check.violations.push_back({pts[i].first, pts[i + 1].first, a, b});
      }
    }
    check.passed = check.violations.empty();
    report.checks.push_back(std::move(check));
  }
  return report;
}

}  // namespace pradkit
