#include "pradkit/export.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <memory>

#include <fmt/format.h>

#include "pradkit/error.hpp"
#include "pradkit/keyvalue.hpp"

namespace pradkit {

namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) {
    throw IoError("cannot write " + path.string());
  }
  return out;
}

void finish(std::ofstream& out, const std::filesystem::path& path) {
  out.flush();
  if (!out) {
    throw IoError("write failed for " + path.string());
  }
}

std::string cell(const std::optional<double>& v) { return v ? format_number(*v) : std::string(); }

nlohmann::ordered_json opt(const std::optional<double>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

void write_contours_csv(const std::vector<Contour>& contours, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "frame_time_us,structure_label,point_index,x_mm,y_mm\n";
  for (const auto& c : contours) {
    for (std::size_t i = 0; i < c.points.size(); ++i) {
      out << format_number(c.time_us) << ',' << to_string(c.structure_label) << ',' << i << ','
          << format_number(c.points[i].x_mm) << ',' << format_number(c.points[i].y_mm) << '\n';
    }
  }
  finish(out, path);
}

void write_profiles_csv(const std::vector<SurfaceProfile>& profiles,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_us,x_mm,y_mm\n";
  for (const auto& p : profiles) {
    for (const auto& s : p.columns) {
      out << format_number(p.time_us) << ',' << format_number(s.x_mm) << ',' << cell(s.y_mm)
          << '\n';
    }
  }
  finish(out, path);
}

void write_velocity_csv(const std::vector<VelocityField>& fields,
                        const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "time_us,x_mm,v_mm_us\n";
  for (const auto& f : fields) {
    for (const auto& s : f.samples) {
      out << format_number(f.mid_time_us) << ',' << format_number(s.x_mm) << ','
          << cell(s.v_mm_us) << '\n';
    }
  }
  finish(out, path);
}

void write_apex_csv(const std::vector<ApexSample>& apex, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "mid_time_us,v_km_s\n";
  for (const auto& a : apex) {
    out << format_number(a.mid_time_us) << ',' << format_number(a.v_mm_us) << '\n';
  }
  finish(out, path);
}

void write_feature_table_csv(const FeatureTable& table, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << "thickness_in,label";
  for (auto f : kAllFeatures) {
    out << ',' << feature_name(f);
  }
  out << '\n';
  for (const auto& row : table.rows) {
    out << format_number(row.thickness_in) << ',' << row.label;
    for (auto f : kAllFeatures) {
      out << ',' << cell(row[f]);
    }
    out << '\n';
  }
  finish(out, path);
}

nlohmann::ordered_json to_json(const FeatureSet& f) {
  nlohmann::ordered_json j;
  j["plateau_v_km_s"] = f.plateau_v_km_s;
  j["noise_rms_km_s"] = f.noise_rms_km_s;
  j["fluct_amplitude_km_s"] = f.fluct_amplitude_km_s;
  j["first_fluct_t_us"] = opt(f.first_fluct_t_us);
  return j;
}

nlohmann::ordered_json to_json(const ComparisonReport& r) {
  nlohmann::ordered_json j;
  j["n"] = r.n;
  j["bias_km_s"] = r.bias;
  j["rms_km_s"] = r.rms;
  return j;
}

nlohmann::ordered_json to_json(const TrendReport& r) {
  nlohmann::ordered_json j;
  j["passed"] = r.passed_count();
  j["total"] = r.checks.size();
  auto& checks = j["checks"] = nlohmann::ordered_json::array();
  for (const auto& c : r.checks) {
    nlohmann::ordered_json cj;
    cj["name"] = c.name;
    cj["feature"] = std::string(feature_name(c.feature));
    cj["direction"] = c.increasing ? "increasing" : "decreasing";
    cj["passed"] = c.passed;
    cj["rows_used"] = c.rows_used;
    auto& v = cj["violations"] = nlohmann::ordered_json::array();
    for (const auto& x : c.violations) {
      v.push_back({{"thickness_lo_in", x.thickness_lo},
                   {"thickness_hi_in", x.thickness_hi},
                   {"value_lo", x.value_lo},
                   {"value_hi", x.value_hi}});
    }
    checks.push_back(std::move(cj));
  }
  return j;
}

void write_json(const nlohmann::ordered_json& j, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << j.dump(2) << '\n';
  finish(out, path);
}

std::string render_svg(const PlotSpec& plot) {
  constexpr double kWidth = 720.0;
  constexpr double kHeight = 440.0;
  constexpr double kLeft = 70.0;
  constexpr double kRight = 20.0;
  constexpr double kTop = 40.0;
  constexpr double kBottom = 50.0;
  static constexpr std::array<const char*, 8> kColors = {
      "#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};

  double xmin = std::numeric_limits<double>::infinity();
  double xmax = -xmin;
  double ymin = xmin;
  double ymax = -xmin;
  for (const auto& s : plot.series) {
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (std::isfinite(s.x[i]) && std::isfinite(s.y[i])) {
        xmin = std::min(xmin, s.x[i]);
        xmax = std::max(xmax, s.x[i]);
        ymin = std::min(ymin, s.y[i]);
        ymax = std::max(ymax, s.y[i]);
      }
    }
  }
  if (!std::isfinite(xmin)) {
    xmin = ymin = 0.0;
    xmax = ymax = 1.0;
  }
  if (xmax == xmin) xmax = xmin + 1.0;
  if (ymax == ymin) ymax = ymin + 1.0;
  const double pw = kWidth - kLeft - kRight;
  const double ph = kHeight - kTop - kBottom;
  auto sx = [&](double x) { return kLeft + (x - xmin) / (xmax - xmin) * pw; };
  auto sy = [&](double y) { return kTop + (1.0 - (y - ymin) / (ymax - ymin)) * ph; };

  std::string svg = fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{0}\" height=\"{1}\" "
      "viewBox=\"0 0 {0} {1}\">\n"
      "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
      "<text x=\"{2}\" y=\"24\" font-family=\"sans-serif\" font-size=\"15\" "
      "text-anchor=\"middle\">{3}</text>\n"
      "<rect x=\"{4}\" y=\"{5}\" width=\"{6}\" height=\"{7}\" fill=\"none\" stroke=\"black\"/>\n",
      kWidth, kHeight, kWidth / 2, escape_xml(plot.title), kLeft, kTop, pw, ph);
  for (int k = 0; k <= 4; ++k) {
    const double fx = xmin + (xmax - xmin) * k / 4.0;
    const double fy = ymin + (ymax - ymin) * k / 4.0;
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"middle\">{:.4g}</text>\n",
        sx(fx), kTop + ph + 16, fx);
    svg += fmt::format(
        "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"11\" "
        "text-anchor=\"end\">{:.4g}</text>\n",
        kLeft - 6, sy(fy) + 4, fy);
  }
  svg += fmt::format(
      "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\">{}</text>\n",
      kLeft + pw / 2, kHeight - 12, escape_xml(plot.x_label));
  svg += fmt::format(
      "<text x=\"16\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"12\" "
      "text-anchor=\"middle\" transform=\"rotate(-90 16 {:.1f})\">{}</text>\n",
      kTop + ph / 2, kTop + ph / 2, escape_xml(plot.y_label));

  for (std::size_t si = 0; si < plot.series.size(); ++si) {
    const auto& s = plot.series[si];
    const char* color = kColors[si % kColors.size()];
    std::string points;
    auto flush = [&] {
      if (!points.empty()) {
        svg += fmt::format(
            "<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.2\" points=\"{}\"/>\n", color,
            points);
        points.clear();
      }
    };
    for (std::size_t i = 0; i < std::min(s.x.size(), s.y.size()); ++i) {
      if (!std::isfinite(s.x[i]) || !std::isfinite(s.y[i])) {
        flush();
        continue;
      }
      if (!points.empty()) points += ' ';
      points += fmt::format("{:.2f},{:.2f}", sx(s.x[i]), sy(s.y[i]));
    }
    flush();
    if (plot.series.size() <= 12) {
      svg += fmt::format(
          "<text x=\"{:.1f}\" y=\"{:.1f}\" font-family=\"sans-serif\" font-size=\"10\" "
          "fill=\"{}\">{}</text>\n",
          kLeft + pw - 120, kTop + 14 + 12.0 * static_cast<double>(si), color, escape_xml(s.name));
    }
  }
  svg += "</svg>\n";
  return svg;
}

void write_svg(const PlotSpec& plot, const std::filesystem::path& path) {
  auto out = open_out(path);
  out << render_svg(plot);
  finish(out, path);
}

std::string sha256_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::unique_ptr<EVP_MD_CTX, decltype(&EVP_MD_CTX_free)> ctx(EVP_MD_CTX_new(), EVP_MD_CTX_free);
  if (!ctx || EVP_DigestInit_ex(ctx.get(), EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 initialisation failed");
  }
  std::array<char, 1 << 16> buf{};
  while (in) {
    in.read(buf.data(), buf.size());
    const auto got = in.gcount();
    if (got > 0) {
      EVP_DigestUpdate(ctx.get(), buf.data(), static_cast<std::size_t>(got));
    }
  }
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  EVP_DigestFinal_ex(ctx.get(), md.data(), &len);
  std::string hex;
  for (unsigned int i = 0; i < len; ++i) {
    hex += fmt::format("{:02x}", md[i]);
  }
  return hex;
}

}  // namespace pradkit
