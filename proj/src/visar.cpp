#include "pradkit/visar.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <string>

#include "pradkit/error.hpp"
#include "pradkit/keyvalue.hpp"

namespace pradkit {

namespace {

std::string strip_cr(std::string line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == ' ')) {
    line.pop_back();
  }
  return line;
}

double parse_field(const std::string& text, const std::string& where) {
  double value = 0.0;
  const auto first = text.find_first_not_of(' ');
  if (first == std::string::npos) {
    throw DataError(where + ": empty field");
  }
  const char* b = text.data() + first;
  const char* e = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(b, e, value);
  if (ec != std::errc{} || ptr != e || !std::isfinite(value)) {
    throw DataError(where + ": malformed number '" + text + "'");
  }
  return value;
}

// Rows of a two-column numeric CSV with a fixed header.
std::vector<std::pair<double, double>> read_two_column_csv(const std::filesystem::path& path,
                                                           const std::string& header) {
  std::ifstream in(path);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::string line;
  if (!std::getline(in, line) || strip_cr(line) != header) {
    throw DataError(path.string() + ": expected header '" + header + "'");
  }
  std::vector<std::pair<double, double>> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    line = strip_cr(line);
    if (line.empty()) {
      continue;
    }
    const auto where = path.string() + ":" + std::to_string(line_no);
    const auto comma = line.find(',');
    if (comma == std::string::npos || line.find(',', comma + 1) != std::string::npos) {
      throw DataError(where + ": expected two comma-separated fields");
    }
    rows.emplace_back(parse_field(line.substr(0, comma), where),
                      parse_field(line.substr(comma + 1), where));
  }
  return rows;
}

}  // namespace

VisarSeries::VisarSeries(std::vector<VisarSample> samples, double thickness_in, std::string label)
    : samples_(std::move(samples)), thickness_in_(thickness_in), label_(std::move(label)) {
  if (samples_.size() < 2) {
    throw DataError("velocimetry series needs at least two samples");
  }
  if (!(thickness_in_ > 0.0)) {
    throw ConfigError("coupon thickness must be positive");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!std::isfinite(samples_[i].t_us) || !std::isfinite(samples_[i].v_km_s)) {
      throw DataError("velocimetry series contains a non-finite value");
    }
    if (i > 0 && !(samples_[i].t_us > samples_[i - 1].t_us)) {
      throw DataError("velocimetry times must strictly increase (sample " + std::to_string(i) +
                      " at t=" + format_number(samples_[i].t_us) + ")");
    }
  }
}

VisarSeries VisarSeries::window(double t0, double t1) const {
  std::vector<VisarSample> out;
  for (const auto& s : samples_) {
    if (s.t_us >= t0 && s.t_us <= t1) {
      out.push_back(s);
    }
  }
  if (out.size() < 2) {
    throw DataError("window [" + format_number(t0) + ", " + format_number(t1) +
                    "] holds fewer than two samples");
  }
  return VisarSeries(std::move(out), thickness_in_, label_);
}

VisarSeries load_visar(const std::filesystem::path& path, double thickness_in, std::string label) {
  std::vector<VisarSample> samples;
  for (const auto& [t, v] : read_two_column_csv(path, "time_us,velocity_km_s")) {
    samples.push_back({t, v});
  }
  try {
    return VisarSeries(std::move(samples), thickness_in, std::move(label));
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void save_visar(const VisarSeries& s, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  out << "time_us,velocity_km_s\n";
  for (const auto& x : s.samples()) {
    out << format_number(x.t_us) << ',' << format_number(x.v_km_s) << '\n';
  }
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

double resample_linear(const VisarSeries& s, double t) {
  const auto& x = s.samples();
  if (!(t >= x.front().t_us && t <= x.back().t_us)) {
    throw DataError("time " + format_number(t) + " us is outside the series range [" +
                    format_number(x.front().t_us) + ", " + format_number(x.back().t_us) + "]");
  }
  const auto it = std::lower_bound(x.begin(), x.end(), t,
                                   [](const VisarSample& a, double v) { return a.t_us < v; });
  if (it->t_us == t) {
    return it->v_km_s;
  }
  const auto& hi = *it;
  const auto& lo = *(it - 1);
  const double f = (t - lo.t_us) / (hi.t_us - lo.t_us);
  return lo.v_km_s + f * (hi.v_km_s - lo.v_km_s);
}

double plateau_mean(const VisarSeries& s, double t0, double t1) {
  if (!(t1 > t0)) {
    throw ConfigError("plateau window must have t1 > t0");
  }
  std::size_t inside = 0;
  for (const auto& x : s.samples()) {
    inside += x.t_us >= t0 && x.t_us <= t1;
  }
  if (inside < 2) {
    throw DataError("plateau window holds fewer than two samples");
  }
  const double a = std::max(t0, s.t_min());
  const double b = std::min(t1, s.t_max());
  const auto& x = s.samples();
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double lo = std::max(a, x[i].t_us);
    const double hi = std::min(b, x[i + 1].t_us);
    if (hi <= lo) {
      continue;
    }
    const double slope = (x[i + 1].v_km_s - x[i].v_km_s) / (x[i + 1].t_us - x[i].t_us);
    const double vlo = x[i].v_km_s + slope * (lo - x[i].t_us);
    const double vhi = x[i].v_km_s + slope * (hi - x[i].t_us);
    integral += 0.5 * (vlo + vhi) * (hi - lo);
  }
  return integral / (b - a);
}

double noise_rms(const VisarSeries& s, int detrend_halfwidth) {
  if (detrend_halfwidth < 0) {
    throw ConfigError("detrend half-width must be non-negative");
  }
  const auto w = static_cast<std::size_t>(detrend_halfwidth);
  const auto& x = s.samples();
  const std::size_t n = x.size();
  if (n <= 2 * w + 1) {
    throw DataError("series of " + std::to_string(n) + " samples is too short for detrend half-width " +
                    std::to_string(w));
  }
  std::vector<double> prefix(n + 1, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    prefix[i + 1] = prefix[i] + x[i].v_km_s;
  }
  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t lo = i >= w ? i - w : 0;
    const std::size_t hi = std::min(n - 1, i + w);
    const double mean = (prefix[hi + 1] - prefix[lo]) / static_cast<double>(hi - lo + 1);
    const double r = x[i].v_km_s - mean;
    ss += r * r;
  }
  return std::sqrt(ss / static_cast<double>(n));
}

std::optional<double> first_fluctuation_time(const VisarSeries& s, const FluctuationParams& p) {
  if (!(p.k > 0.0) || p.m < 1) {
    throw ConfigError("fluctuation detection needs k > 0 and m >= 1");
  }
  const auto baseline = s.window(p.baseline_t0, p.baseline_t1);
  const double plateau = plateau_mean(s, p.baseline_t0, p.baseline_t1);
  // The floor keeps rounding residue of a noise-free record from counting.
  const double limit =
      std::max(p.k * noise_rms(baseline, p.detrend_halfwidth),
               1e-12 * std::max(1.0, std::abs(plateau)));
  const auto& x = s.samples();
  int run = 0;
  std::size_t run_start = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i].t_us > p.baseline_t1)) {
      continue;
    }
    if (std::abs(x[i].v_km_s - plateau) > limit) {
      if (run == 0) {
        run_start = i;
      }
      if (++run >= p.m) {
        return x[run_start].t_us;
      }
    } else {
      run = 0;
    }
  }
  return std::nullopt;
}

FeatureSet extract_features(const VisarSeries& s, const FluctuationParams& p) {
  FeatureSet f;
  f.plateau_v_km_s = plateau_mean(s, p.baseline_t0, p.baseline_t1);
  f.noise_rms_km_s = noise_rms(s.window(p.baseline_t0, p.baseline_t1), p.detrend_halfwidth);
  f.first_fluct_t_us = first_fluctuation_time(s, p);
  if (f.first_fluct_t_us) {
    double ss = 0.0;
    std::size_t n = 0;
    for (const auto& x : s.samples()) {
      if (x.t_us >= *f.first_fluct_t_us) {
        const double d = x.v_km_s - f.plateau_v_km_s;
        ss += d * d;
        ++n;
      }
    }
    f.fluct_amplitude_km_s = std::sqrt(2.0 * ss / static_cast<double>(n));
  }
  return f;
}

ComparisonReport compare_prad_visar(const std::vector<ApexSample>& apex, const VisarSeries& s) {
  ComparisonReport r;
  double sum = 0.0;
  double ss = 0.0;
  for (const auto& a : apex) {
    if (a.mid_time_us < s.t_min() || a.mid_time_us > s.t_max()) {
      continue;
    }
    const double d = a.v_mm_us - resample_linear(s, a.mid_time_us);
    sum += d;
    ss += d * d;
    ++r.n;
  }
  if (r.n == 0) {
    throw DataError("no apex time overlaps the velocimetry record");
  }
  r.bias = sum / static_cast<double>(r.n);
  r.rms = std::sqrt(ss / static_cast<double>(r.n));
  return r;
}

std::vector<ApexSample> load_apex_csv(const std::filesystem::path& path) {
  std::vector<ApexSample> out;
  for (const auto& [t, v] : read_two_column_csv(path, "mid_time_us,v_km_s")) {
    out.push_back({t, v});
  }
  return out;
}

}  // namespace pradkit
