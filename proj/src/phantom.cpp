#include "pradkit/phantom.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include "pradkit/error.hpp"
#include "pradkit/parallel.hpp"

namespace pradkit {

namespace {

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ull;
constexpr std::uint64_t kVisarStream = 0x5649534152ull;

enum class Region : std::uint8_t { Background, Material, Bubble };

std::uint64_t frame_seed(std::uint64_t seed, std::size_t frame_index) {
  return splitmix64(seed + kGolden * (static_cast<std::uint64_t>(frame_index) + 1));
}

// Reflect-101 style mirror for indices that fall off either end.
std::size_t mirror(std::ptrdiff_t i, std::size_t n) {
  const auto m = static_cast<std::ptrdiff_t>(n);
  if (m == 1) return 0;
  while (i < 0 || i >= m) {
    i = i < 0 ? -i : 2 * (m - 1) - i;
  }
  return static_cast<std::size_t>(i);
}

std::vector<double> gaussian_blur(const std::vector<double>& src, std::size_t w, std::size_t h,
                                  double sigma) {
  const auto radius = static_cast<std::ptrdiff_t>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double sum = 0.0;
  for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
    const double v = std::exp(-0.5 * static_cast<double>(k * k) / (sigma * sigma));
    kernel[static_cast<std::size_t>(k + radius)] = v;
    sum += v;
  }
  for (double& v : kernel) v /= sum;

  std::vector<double> tmp(src.size());
  std::vector<double> out(src.size());
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               src[r * w + mirror(static_cast<std::ptrdiff_t>(c) + k, w)];
      }
      tmp[r * w + c] = acc;
    }
  }
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      double acc = 0.0;
      for (std::ptrdiff_t k = -radius; k <= radius; ++k) {
        acc += kernel[static_cast<std::size_t>(k + radius)] *
               tmp[mirror(static_cast<std::ptrdiff_t>(r) + k, h) * w + c];
      }
      out[r * w + c] = acc;
    }
  }
  return out;
}

Region classify(const PhantomSpec& spec, double x, double y, double surface_y, bool bubble_on,
                PhysPoint bubble_c, double bubble_r2) {
  if (bubble_on) {
    const double dx = x - bubble_c.x_mm;
    const double dy = y - bubble_c.y_mm;
    if (dx * dx + dy * dy <= bubble_r2) {
      return Region::Bubble;
    }
  }
  if (y >= spec.material_floor_mm && y <= surface_y) {
    return Region::Material;
  }
  return Region::Background;
}

}  // namespace

std::uint64_t splitmix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

PhantomRng::PhantomRng(std::uint64_t seed) : engine_(splitmix64(seed)) {}

double PhantomRng::uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

double PhantomRng::normal() {
  const double u1 = 1.0 - uniform();  // (0, 1]
  const double u2 = uniform();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double PhantomSpec::resolved_center_x_mm() const {
  return center_x_mm.value_or(0.5 * static_cast<double>(width_px - 1) * pixel_pitch_mm);
}

double PhantomSpec::surface_y(double x_mm, double t_us) const {
  double y = surface_base_mm + surface_speed_mm_us * t_us;
  if (bulge_rate_mm_us != 0.0) {
    const double d = (x_mm - resolved_center_x_mm()) / bulge_width_mm;
    y += bulge_rate_mm_us * t_us * std::exp(-0.5 * d * d);
  }
  return y;
}

double PhantomSpec::bubble_radius(double t_us) const {
  return bubble_radius_mm + bubble_growth_mm_us * t_us;
}

PhysPoint PhantomSpec::bubble_center(double t_us) const {
  return {resolved_center_x_mm(), bubble_center_y_mm + bubble_speed_mm_us * t_us};
}

std::vector<double> PhantomSpec::frame_start_times() const {
  std::vector<double> out(static_cast<std::size_t>(frame_count));
  for (int i = 0; i < frame_count; ++i) {
    out[static_cast<std::size_t>(i)] = first_frame_us + frame_interval_us * i;
  }
  return out;
}

void PhantomSpec::validate() const {
  auto require = [](bool ok, const char* what) {
    if (!ok) throw ConfigError(std::string("phantom spec: ") + what);
  };
  require(width_px > 0 && height_px > 0, "image size must be positive");
  require(pixel_pitch_mm > 0.0, "pixel_pitch_mm must be positive");
  require(surface_speed_mm_us >= 0.0 && bulge_rate_mm_us >= 0.0 && bubble_growth_mm_us >= 0.0 &&
              bubble_speed_mm_us >= 0.0,
          "speeds must be non-negative");
  require(bulge_width_mm > 0.0, "bulge_width_mm must be positive");
  require(bubble_radius_mm >= 0.0, "bubble_radius_mm must be non-negative");
  for (double v : {background_intensity, material_intensity, bubble_intensity}) {
    require(v >= 0.0 && v <= 1.0, "intensities must lie in [0,1]");
  }
  require(exposure_us >= 0.0, "exposure_us must be non-negative");
  require(substeps >= 1 && substeps <= 65535, "substeps must be in [1, 65535]");
  require(ringing_amplitude >= 0.0 && ringing_width_px > 0.0, "invalid ringing parameters");
  require(grain_sigma >= 0.0 && grain_cell_px >= 1, "invalid grain parameters");
  require(noise_sigma >= 0.0 && visar_noise_sigma >= 0.0, "noise sigmas must be non-negative");
  require(frame_count >= 1 && frame_interval_us > 0.0, "invalid frame schedule");
  require(thickness_in > 0.0, "thickness_in must be positive");
  require(visar_period_us > 0.0 && visar_end_us > 0.0, "invalid velocimeter sampling");
  require(fluctuation.amplitude_km_s >= 0.0 && fluctuation.frequency_mhz >= 0.0 &&
              fluctuation.damping_per_us >= 0.0,
          "invalid fluctuation parameters");
}

PhantomSpec PhantomSpec::from_keyvalue(const KeyValueFile& kv) {
  kv.require_known({"width_px", "height_px", "pixel_pitch_mm", "center_x_mm", "surface_base_mm",
                    "surface_speed_mm_us", "bulge_rate_mm_us", "bulge_width_mm",
                    "material_floor_mm", "bubble_radius_mm", "bubble_growth_mm_us",
                    "bubble_center_y_mm", "bubble_speed_mm_us", "background_intensity",
                    "material_intensity", "bubble_intensity", "exposure_us", "substeps",
                    "ringing_amplitude", "ringing_width_px", "grain_sigma", "grain_cell_px",
                    "noise_sigma", "seed", "frame_count", "frame_interval_us", "first_frame_us",
                    "thickness_in", "label", "visar_period_us", "visar_end_us",
                    "visar_noise_sigma", "fluct_onset_us", "fluct_amplitude_km_s",
                    "fluct_frequency_mhz", "fluct_damping_per_us"});
  PhantomSpec s;
  auto size_key = [&](const char* key, std::size_t fallback) {
    const auto v = kv.get_int(key, static_cast<long long>(fallback));
    if (v <= 0) throw ConfigError(std::string("phantom spec: ") + key + " must be positive");
    return static_cast<std::size_t>(v);
  };
  s.width_px = size_key("width_px", s.width_px);
  s.height_px = size_key("height_px", s.height_px);
  s.pixel_pitch_mm = kv.get_double("pixel_pitch_mm", s.pixel_pitch_mm);
  s.center_x_mm = kv.find_double("center_x_mm");
  s.surface_base_mm = kv.get_double("surface_base_mm", s.surface_base_mm);
  s.surface_speed_mm_us = kv.get_double("surface_speed_mm_us", s.surface_speed_mm_us);
  s.bulge_rate_mm_us = kv.get_double("bulge_rate_mm_us", s.bulge_rate_mm_us);
  s.bulge_width_mm = kv.get_double("bulge_width_mm", s.bulge_width_mm);
  s.material_floor_mm = kv.get_double("material_floor_mm", s.material_floor_mm);
  s.bubble_radius_mm = kv.get_double("bubble_radius_mm", s.bubble_radius_mm);
  s.bubble_growth_mm_us = kv.get_double("bubble_growth_mm_us", s.bubble_growth_mm_us);
  s.bubble_center_y_mm = kv.get_double("bubble_center_y_mm", s.bubble_center_y_mm);
  s.bubble_speed_mm_us = kv.get_double("bubble_speed_mm_us", s.bubble_speed_mm_us);
  s.background_intensity = kv.get_double("background_intensity", s.background_intensity);
  s.material_intensity = kv.get_double("material_intensity", s.material_intensity);
  s.bubble_intensity = kv.get_double("bubble_intensity", s.bubble_intensity);
  s.exposure_us = kv.get_double("exposure_us", s.exposure_us);
  s.substeps = static_cast<int>(kv.get_int("substeps", s.substeps));
  s.ringing_amplitude = kv.get_double("ringing_amplitude", s.ringing_amplitude);
  s.ringing_width_px = kv.get_double("ringing_width_px", s.ringing_width_px);
  s.grain_sigma = kv.get_double("grain_sigma", s.grain_sigma);
  s.grain_cell_px = static_cast<int>(kv.get_int("grain_cell_px", s.grain_cell_px));
  s.noise_sigma = kv.get_double("noise_sigma", s.noise_sigma);
  const auto seed = kv.get_int("seed", static_cast<long long>(s.seed));
  if (seed < 0) throw ConfigError("phantom spec: seed must be non-negative");
  s.seed = static_cast<std::uint64_t>(seed);
  s.frame_count = static_cast<int>(kv.get_int("frame_count", s.frame_count));
  s.frame_interval_us = kv.get_double("frame_interval_us", s.frame_interval_us);
  s.first_frame_us = kv.get_double("first_frame_us", s.first_frame_us);
  s.thickness_in = kv.get_double("thickness_in", s.thickness_in);
  s.label = kv.get_string("label", s.label);
  s.visar_period_us = kv.get_double("visar_period_us", s.visar_period_us);
  s.visar_end_us = kv.get_double("visar_end_us", s.visar_end_us);
  s.visar_noise_sigma = kv.get_double("visar_noise_sigma", s.visar_noise_sigma);
  s.fluctuation.onset_us = kv.get_double("fluct_onset_us", s.fluctuation.onset_us);
  s.fluctuation.amplitude_km_s = kv.get_double("fluct_amplitude_km_s", s.fluctuation.amplitude_km_s);
  s.fluctuation.frequency_mhz = kv.get_double("fluct_frequency_mhz", s.fluctuation.frequency_mhz);
  s.fluctuation.damping_per_us =
      kv.get_double("fluct_damping_per_us", s.fluctuation.damping_per_us);
  s.validate();
  return s;
}

PhantomSpec PhantomSpec::load(const std::filesystem::path& path) {
  return from_keyvalue(KeyValueFile::load(path));
}

KeyValueFile PhantomSpec::to_keyvalue() const {
  KeyValueFile kv;
  auto num = [&](const char* key, double v) { kv.set(key, format_number(v)); };
  kv.set("width_px", std::to_string(width_px));
  kv.set("height_px", std::to_string(height_px));
  num("pixel_pitch_mm", pixel_pitch_mm);
  if (center_x_mm) num("center_x_mm", *center_x_mm);
  num("surface_base_mm", surface_base_mm);
  num("surface_speed_mm_us", surface_speed_mm_us);
  num("bulge_rate_mm_us", bulge_rate_mm_us);
  num("bulge_width_mm", bulge_width_mm);
  num("material_floor_mm", material_floor_mm);
  num("bubble_radius_mm", bubble_radius_mm);
  num("bubble_growth_mm_us", bubble_growth_mm_us);
  num("bubble_center_y_mm", bubble_center_y_mm);
  num("bubble_speed_mm_us", bubble_speed_mm_us);
  num("background_intensity", background_intensity);
  num("material_intensity", material_intensity);
  num("bubble_intensity", bubble_intensity);
  num("exposure_us", exposure_us);
  kv.set("substeps", std::to_string(substeps));
  num("ringing_amplitude", ringing_amplitude);
  num("ringing_width_px", ringing_width_px);
  num("grain_sigma", grain_sigma);
  kv.set("grain_cell_px", std::to_string(grain_cell_px));
  num("noise_sigma", noise_sigma);
  kv.set("seed", std::to_string(seed));
  kv.set("frame_count", std::to_string(frame_count));
  num("frame_interval_us", frame_interval_us);
  num("first_frame_us", first_frame_us);
  num("thickness_in", thickness_in);
  kv.set("label", label);
  num("visar_period_us", visar_period_us);
  num("visar_end_us", visar_end_us);
  num("visar_noise_sigma", visar_noise_sigma);
  num("fluct_onset_us", fluctuation.onset_us);
  num("fluct_amplitude_km_s", fluctuation.amplitude_km_s);
  num("fluct_frequency_mhz", fluctuation.frequency_mhz);
  num("fluct_damping_per_us", fluctuation.damping_per_us);
  return kv;
}

GrayImage render_frame(const PhantomSpec& spec, double t_start_us, std::size_t frame_index) {
  spec.validate();
  const std::size_t w = spec.width_px;
  const std::size_t h = spec.height_px;
  const double pitch = spec.pixel_pitch_mm;
  const int substeps = spec.substeps;

  // Per-pixel visit counts of the material and bubble regions.
  std::vector<std::uint16_t> n_mat(w * h, 0);
  std::vector<std::uint16_t> n_bub(w * h, 0);
  std::vector<double> surface(w);
  for (int j = 0; j < substeps; ++j) {
    const double t = t_start_us + (j + 0.5) / substeps * spec.exposure_us;
    for (std::size_t c = 0; c < w; ++c) {
      surface[c] = spec.surface_y(static_cast<double>(c) * pitch, t);
    }
    const double radius = spec.bubble_radius(t);
    const bool bubble_on = radius > 0.0;
    const PhysPoint bc = spec.bubble_center(t);
    const double r2 = radius * radius;
    for (std::size_t r = 0; r < h; ++r) {
      const double y = static_cast<double>(h - 1 - r) * pitch;
      for (std::size_t c = 0; c < w; ++c) {
        switch (classify(spec, static_cast<double>(c) * pitch, y, surface[c], bubble_on, bc, r2)) {
          case Region::Material: ++n_mat[r * w + c]; break;
          case Region::Bubble: ++n_bub[r * w + c]; break;
          case Region::Background: break;
        }
      }
    }
  }

  std::vector<double> px(w * h);
  const auto s = static_cast<unsigned>(substeps);
  for (std::size_t i = 0; i < px.size(); ++i) {
    const unsigned m = n_mat[i];
    const unsigned b = n_bub[i];
    if (m == s) {
      px[i] = spec.material_intensity;
    } else if (b == s) {
      px[i] = spec.bubble_intensity;
    } else if (m == 0 && b == 0) {
      px[i] = spec.background_intensity;
    } else {
      const unsigned g = s - m - b;
      px[i] = (m * spec.material_intensity + b * spec.bubble_intensity +
               g * spec.background_intensity) /
              static_cast<double>(s);
    }
  }

  // Under/overshoot at density borders: unsharp masking, I + a (I - G * I).
  if (spec.ringing_amplitude > 0.0) {
    const auto blurred = gaussian_blur(px, w, h, spec.ringing_width_px);
    for (std::size_t i = 0; i < px.size(); ++i) {
      px[i] += spec.ringing_amplitude * (px[i] - blurred[i]);
    }
  }

  PhantomRng rng(frame_seed(spec.seed, frame_index));
  if (spec.grain_sigma > 0.0) {
    const auto cell = static_cast<std::size_t>(spec.grain_cell_px);
    const std::size_t cw = (w + cell - 1) / cell;
    const std::size_t ch = (h + cell - 1) / cell;
    std::vector<double> factor(cw * ch);
    for (double& f : factor) {
      f = 1.0 + spec.grain_sigma * rng.normal();
    }
    for (std::size_t r = 0; r < h; ++r) {
      for (std::size_t c = 0; c < w; ++c) {
        px[r * w + c] *= factor[(r / cell) * cw + c / cell];
      }
    }
  }
  if (spec.noise_sigma > 0.0) {
    for (double& v : px) {
      v += spec.noise_sigma * rng.normal();
    }
  }
  for (double& v : px) {
    v = std::clamp(v, 0.0, 1.0);
  }

  FrameMeta meta;
  meta.pixel_pitch_mm = pitch;
  meta.exposure_us = spec.exposure_us;
  meta.time_us = t_start_us + 0.5 * spec.exposure_us;
  return GrayImage(w, h, std::move(px), meta);
}

GroundTruthFrame ground_truth_frame(const PhantomSpec& spec, double t_start_us,
                                    std::size_t frame_index) {
  GroundTruthFrame g;
  g.index = frame_index;
  g.t_start_us = t_start_us;
  g.t_mid_us = t_start_us + 0.5 * spec.exposure_us;
  g.apex_velocity_mm_us = spec.apex_speed();
  g.bubble_radius_mm = spec.bubble_radius_mm > 0.0 ? spec.bubble_radius(g.t_mid_us) : 0.0;
  g.bubble_center = spec.bubble_center(g.t_mid_us);
  g.top_surface_mm.resize(spec.width_px);
  g.bubble_cap_mm.resize(spec.width_px);
  for (std::size_t c = 0; c < spec.width_px; ++c) {
    const double x = static_cast<double>(c) * spec.pixel_pitch_mm;
    g.top_surface_mm[c] = spec.surface_y(x, g.t_mid_us);
    const double dx = x - g.bubble_center.x_mm;
    if (g.bubble_radius_mm > 0.0 && std::abs(dx) < g.bubble_radius_mm) {
      g.bubble_cap_mm[c] =
          g.bubble_center.y_mm + std::sqrt(g.bubble_radius_mm * g.bubble_radius_mm - dx * dx);
    }
  }
  return g;
}

PhantomSequence generate_sequence(const PhantomSpec& spec, const std::vector<double>& frame_times,
                                  int jobs) {
  spec.validate();
  if (frame_times.empty()) {
    throw ConfigError("phantom sequence needs at least one frame time");
  }
  for (std::size_t i = 1; i < frame_times.size(); ++i) {
    if (!(frame_times[i] > frame_times[i - 1])) {
      throw ConfigError("phantom frame times must strictly increase");
    }
  }
  PhantomSequence seq;
  seq.truth.x_mm.resize(spec.width_px);
  for (std::size_t c = 0; c < spec.width_px; ++c) {
    seq.truth.x_mm[c] = static_cast<double>(c) * spec.pixel_pitch_mm;
  }
  std::vector<std::optional<GrayImage>> frames(frame_times.size());
  parallel_for(frame_times.size(), jobs,
               [&](std::size_t i) { frames[i].emplace(render_frame(spec, frame_times[i], i)); });
  for (std::size_t i = 0; i < frame_times.size(); ++i) {
    seq.frames.push_back(std::move(*frames[i]));
    seq.truth.frames.push_back(ground_truth_frame(spec, frame_times[i], i));
  }
  return seq;
}

VisarSeries generate_visar(const PhantomSpec& spec, double sample_period_us, double t_end_us,
                           const FluctuationSpec& fluct) {
  if (!(sample_period_us > 0.0) || !(t_end_us > 0.0)) {
    throw ConfigError("velocimeter sampling needs a positive period and end time");
  }
  PhantomRng rng(splitmix64(spec.seed ^ kVisarStream));
  const double base = spec.apex_speed();
  const auto n = static_cast<std::size_t>(std::floor(t_end_us / sample_period_us + 1e-9)) + 1;
  std::vector<VisarSample> samples(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = static_cast<double>(i) * sample_period_us;
    double v = base;
    if (t >= fluct.onset_us) {
      const double dt = t - fluct.onset_us;
      v += fluct.amplitude_km_s * std::exp(-fluct.damping_per_us * dt) *
           std::sin(2.0 * std::numbers::pi * fluct.frequency_mhz * dt);
    }
    if (spec.visar_noise_sigma > 0.0) {
      v += spec.visar_noise_sigma * rng.normal();
    }
    samples[i] = {t, v};
  }
  return VisarSeries(std::move(samples), spec.thickness_in, spec.label);
}

VisarSeries generate_visar(const PhantomSpec& spec) {
  return generate_visar(spec, spec.visar_period_us, spec.visar_end_us, spec.fluctuation);
}

void write_truth_summary(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "frame_index,t_start_us,t_mid_us,apex_velocity_mm_us,bubble_radius_mm,"
         "bubble_center_x_mm,bubble_center_y_mm\n";
  for (const auto& f : truth.frames) {
    out << f.index << ',' << format_number(f.t_start_us) << ',' << format_number(f.t_mid_us)
        << ',' << format_number(f.apex_velocity_mm_us) << ','
        << format_number(f.bubble_radius_mm) << ',' << format_number(f.bubble_center.x_mm) << ','
        << format_number(f.bubble_center.y_mm) << '\n';
  }
}

void write_truth_profiles(const GroundTruth& truth, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "frame_index,t_mid_us,x_mm,top_surface_mm,bubble_cap_mm\n";
  for (const auto& f : truth.frames) {
    for (std::size_t c = 0; c < truth.x_mm.size(); ++c) {
      out << f.index << ',' << format_number(f.t_mid_us) << ',' << format_number(truth.x_mm[c])
          << ',' << format_number(f.top_surface_mm[c]) << ',';
      if (f.bubble_cap_mm[c]) {
        out << format_number(*f.bubble_cap_mm[c]);
      }
      out << '\n';
    }
  }
}

}  // namespace pradkit
