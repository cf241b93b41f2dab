#include "pradkit/cli.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <set>

#include "pradkit/contour.hpp"
#include "pradkit/denoise.hpp"
#include "pradkit/error.hpp"
#include "pradkit/export.hpp"
#include "pradkit/fusion.hpp"
#include "pradkit/io.hpp"
#include "pradkit/keyvalue.hpp"
#include "pradkit/parallel.hpp"
#include "pradkit/phantom.hpp"
#include "pradkit/pipeline.hpp"

namespace pradkit::cli {

namespace fs = std::filesystem;

namespace {

struct KeyInfo {
  const char* name;
  const char* fallback;  // empty: no default
  const char* help;
};

// Every configuration key; each one is also a --<key> flag.
constexpr KeyInfo kKeys[] = {
    {"output_dir", "", "directory receiving every artifact"},
    {"input", "", "comma-separated input frames (P5 or PNG)"},
    {"frame_times_us", "", "comma-separated frame midpoint times overriding sidecars"},
    {"pixel_pitch_mm", "0.1", "pixel pitch for frames without a sidecar"},
    {"time_us", "0", "frame time for frames without a sidecar"},
    {"exposure_us", "0", "exposure for frames without a sidecar"},
    {"denoise", "true", "apply heat denoising before thresholding"},
    {"lambda", "0.15", "edge sensitivity of the adaptive diffusivity"},
    {"steps", "20", "diffusion steps"},
    {"dt", "0.2", "diffusion time step"},
    {"thresholds", "0.5", "comma-separated increasing thresholds for contour"},
    {"threshold", "0.7", "threshold for surface tracking"},
    {"connectivity", "4", "erosion connectivity (4 or 8)"},
    {"structure", "top_surface", "structure label attached to contours"},
    {"direction", "from_top", "profile scan direction (from_top or from_bottom)"},
    {"apex_center_x_mm", "", "apex band centre (default: frame centre)"},
    {"apex_half_width", "5", "apex band half-width in columns"},
    {"visar", "", "velocimeter CSV (time_us,velocity_km_s)"},
    {"thickness_in", "1", "coupon thickness of the velocimeter record"},
    {"label", "", "record label"},
    {"baseline_t0", "0", "plateau window start (us)"},
    {"baseline_t1", "10", "plateau window end (us)"},
    {"detrend_halfwidth", "5", "moving-average half-width for noise"},
    {"fluct_k", "3", "fluctuation threshold in noise units"},
    {"fluct_m", "3", "consecutive exceedances for a fluctuation"},
    {"apex", "", "apex velocity CSV (mid_time_us,v_km_s) for compare"},
    {"phantom_spec", "", "phantom spec file"},
    {"seed", "", "override the phantom seed"},
    {"experiments", "", "comma-separated experiment descriptors for report"},
    {"svg", "true", "also emit SVG line charts"},
    {"jobs", "1", "worker threads for per-frame work"},
};

class Artifacts {
 public:
  Artifacts(fs::path dir, std::vector<fs::path> inputs)
      : dir_(std::move(dir)), inputs_(std::move(inputs)) {
    std::error_code ec;
    fs::create_directories(dir_, ec);
    if (ec) {
      throw IoError("cannot create output directory " + dir_.string() + ": " + ec.message());
    }
    for (const auto& in : inputs_) {
      input_canon_.insert(fs::weakly_canonical(in).string());
    }
  }

  /// Registers an artifact and returns where to write it.
  fs::path add(const std::string& name) {
    names_.push_back(name);
    return reserve(name);
  }

  /// Path check without listing the file in the manifest.
  fs::path reserve(const std::string& name) const {
    const fs::path p = dir_ / name;
    if (input_canon_.contains(fs::weakly_canonical(p).string())) {
      throw ConfigError("refusing to overwrite input " + p.string());
    }
    return p;
  }

  const std::vector<fs::path>& inputs() const { return inputs_; }
  const std::vector<std::string>& names() const { return names_; }
  const fs::path& dir() const { return dir_; }

 private:
  fs::path dir_;
  std::vector<fs::path> inputs_;
  std::set<std::string> input_canon_;
  std::vector<std::string> names_;
};

struct Context {
  std::string subcommand;
  KeyValueFile config;  // effective: defaults < config file < flags
  int jobs = 1;

  bool has(const std::string& key) const {
    return config.contains(key) && !config.get_string(key).empty();
  }
  std::string require(const std::string& key) const {
    if (!has(key)) {
      throw ConfigError(subcommand + ": missing required key '" + key + "'");
    }
    return config.get_string(key);
  }
  std::vector<fs::path> paths(const std::string& key) const {
    std::vector<fs::path> out;
    for (const auto& s : split_list(require(key))) {
      out.emplace_back(s);
    }
    return out;
  }
};

void require_exists(const std::vector<fs::path>& paths) {
  for (const auto& p : paths) {
    if (!fs::exists(p)) {
      throw ConfigError("input does not exist: " + p.string());
    }
  }
}

FrameMeta fallback_meta(const Context& ctx) {
  FrameMeta m;
  m.pixel_pitch_mm = ctx.config.get_double("pixel_pitch_mm");
  m.time_us = ctx.config.get_double("time_us");
  m.exposure_us = ctx.config.get_double("exposure_us");
  return m;
}

HeatDenoiseParams denoise_params(const Context& ctx) {
  HeatDenoiseParams p;
  p.edge_sensitivity = ctx.config.get_double("lambda");
  p.steps = static_cast<int>(ctx.config.get_int("steps"));
  p.dt = ctx.config.get_double("dt");
  return p;
}

TrackingParams tracking_params(const Context& ctx) {
  TrackingParams t;
  t.denoise = ctx.config.get_bool("denoise", true);
  t.denoise_params = denoise_params(ctx);
  t.threshold = ctx.config.get_double("threshold");
  t.connectivity = parse_connectivity(static_cast<int>(ctx.config.get_int("connectivity")));
  t.direction = parse_scan_direction(ctx.config.get_string("direction"));
  return t;
}

FluctuationParams fluctuation_params(const Context& ctx) {
  FluctuationParams f;
  f.baseline_t0 = ctx.config.get_double("baseline_t0");
  f.baseline_t1 = ctx.config.get_double("baseline_t1");
  f.detrend_halfwidth = static_cast<int>(ctx.config.get_int("detrend_halfwidth"));
  f.k = ctx.config.get_double("fluct_k");
  f.m = static_cast<int>(ctx.config.get_int("fluct_m"));
  return f;
}

std::vector<GrayImage> load_frames(const Context& ctx, const std::vector<fs::path>& paths) {
  const auto meta = fallback_meta(ctx);
  std::vector<double> times;
  if (ctx.has("frame_times_us")) {
    times = ctx.config.get_doubles("frame_times_us");
    if (times.size() != paths.size()) {
      throw ConfigError("frame_times_us must list one time per input frame");
    }
  }
  std::vector<std::optional<GrayImage>> slots(paths.size());
  parallel_for(paths.size(), ctx.jobs, [&](std::size_t i) {
    auto img = load_frame(paths[i], meta);
    if (!times.empty()) {
      auto m = img.meta();
      m.time_us = times[i];
      img = img.with_meta(m);
    }
    slots[i].emplace(std::move(img));
  });
  std::vector<GrayImage> out;
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

std::string stem_of(const fs::path& p) { return p.stem().string(); }

double apex_center(const Context& ctx, const GrayImage& frame) {
  if (ctx.has("apex_center_x_mm")) {
    return ctx.config.get_double("apex_center_x_mm");
  }
  return 0.5 * static_cast<double>(frame.width() - 1) * frame.pitch_mm();
}

PlotSpec profile_plot(const std::vector<SurfaceProfile>& profiles) {
  PlotSpec plot{"Surface profiles", "x (mm)", "y (mm)", {}};
  for (const auto& p : profiles) {
    PlotSeries s{"t=" + format_number(p.time_us) + " us", {}, {}};
    for (const auto& c : p.columns) {
      s.x.push_back(c.x_mm);
      s.y.push_back(c.y_mm.value_or(std::nan("")));
    }
    plot.series.push_back(std::move(s));
  }
  return plot;
}

// --- subcommands ---------------------------------------------------------

void cmd_denoise(const Context& ctx, Artifacts& out, const std::vector<fs::path>& inputs) {
  const auto frames = load_frames(ctx, inputs);
  const auto params = denoise_params(ctx);
  std::vector<fs::path> targets;
  for (const auto& in : inputs) {
    targets.push_back(out.add(stem_of(in) + ".denoised.pgm"));
    out.add(stem_of(in) + ".denoised.pgm.meta");
  }
  parallel_for(frames.size(), ctx.jobs, [&](std::size_t i) {
    const auto result = heat_denoise(frames[i], params);
    save_gray(result, targets[i]);
    write_sidecar(result.meta(), targets[i]);
  });
}

void cmd_contour(const Context& ctx, Artifacts& out, const std::vector<fs::path>& inputs) {
  const auto frames = load_frames(ctx, inputs);
  const auto thresholds = ctx.config.get_doubles("thresholds");
  const auto conn = parse_connectivity(static_cast<int>(ctx.config.get_int("connectivity")));
  const auto label = parse_structure_label(ctx.config.get_string("structure"));
  const bool denoise = ctx.config.get_bool("denoise", true);
  const auto params = denoise_params(ctx);
  std::vector<Contour> contours;
  for (std::size_t f = 0; f < frames.size(); ++f) {
    const GrayImage work = denoise ? heat_denoise(frames[f], params) : frames[f];
    const auto masks = threshold_sweep(work, thresholds, conn);
    for (std::size_t t = 0; t < masks.size(); ++t) {
      save_mask(masks[t].mask, out.add(stem_of(inputs[f]) + ".t" + std::to_string(t) + ".mask.pgm"));
      const auto comps = label_components(masks[t].mask, Connectivity::Eight);
      if (comps.empty()) {
        continue;
      }
      const auto largest = std::max_element(
          comps.begin(), comps.end(),
          [](const ComponentInfo& a, const ComponentInfo& b) { return a.size < b.size; });
      contours.push_back(trace_boundary(masks[t], largest->anchor, label));
    }
  }
  write_contours_csv(contours, out.add("contours.csv"));
}

void cmd_track(const Context& ctx, Artifacts& out, const std::vector<fs::path>& inputs,
               bool velocities) {
  const auto frames = load_frames(ctx, inputs);
  const auto profiles = track_sequence(frames, tracking_params(ctx), ctx.jobs);
  const bool svg = ctx.config.get_bool("svg", true);
  write_profiles_csv(profiles, out.add("profiles.csv"));
  if (svg) {
    write_svg(profile_plot(profiles), out.add("profiles.svg"));
  }
  if (!velocities) {
    return;
  }
  if (profiles.size() < 2) {
    throw DataError("velocity needs at least two frames");
  }
  std::vector<VelocityField> fields;
  for (std::size_t i = 0; i + 1 < profiles.size(); ++i) {
    fields.push_back(velocity_field(profiles[i], profiles[i + 1]));
  }
  const auto half = ctx.config.get_int("apex_half_width");
  if (half < 0) {
    throw ConfigError("apex_half_width must be non-negative");
  }
  const auto apex =
      apex_velocity(profiles, apex_center(ctx, frames.front()), static_cast<std::size_t>(half));
  write_velocity_csv(fields, out.add("velocity.csv"));
  write_apex_csv(apex, out.add("apex.csv"));
  if (svg) {
    PlotSpec vplot{"Velocity fields", "x (mm)", "v (mm/us)", {}};
    for (const auto& f : fields) {
      PlotSeries s{"t=" + format_number(f.mid_time_us) + " us", {}, {}};
      for (const auto& v : f.samples) {
        s.x.push_back(v.x_mm);
        s.y.push_back(v.v_mm_us.value_or(std::nan("")));
      }
      vplot.series.push_back(std::move(s));
    }
    write_svg(vplot, out.add("velocity.svg"));
  }
}

void cmd_visar_features(const Context& ctx, Artifacts& out, const fs::path& visar_path) {
  const auto series = load_visar(visar_path, ctx.config.get_double("thickness_in"),
                                 ctx.config.get_string("label", ""));
  const auto features = extract_features(series, fluctuation_params(ctx));
  auto j = to_json(features);
  j["thickness_in"] = series.thickness_in();
  j["samples"] = series.size();
  write_json(j, out.add("features.json"));
  if (ctx.config.get_bool("svg", true)) {
    PlotSeries s{"velocity", {}, {}};
    for (const auto& x : series.samples()) {
      s.x.push_back(x.t_us);
      s.y.push_back(x.v_km_s);
    }
    write_svg({"Velocimeter record", "t (us)", "v (km/s)", {s}}, out.add("visar.svg"));
  }
}

void cmd_compare(const Context& ctx, Artifacts& out, const fs::path& apex_path,
                 const fs::path& visar_path) {
  const auto apex = load_apex_csv(apex_path);
  const auto series = load_visar(visar_path, ctx.config.get_double("thickness_in"),
                                 ctx.config.get_string("label", ""));
  write_json(to_json(compare_prad_visar(apex, series)), out.add("comparison.json"));
}

void cmd_phantom(const Context& ctx, Artifacts& out, const fs::path& spec_path) {
  auto kv = KeyValueFile::load(spec_path);
  if (ctx.has("seed")) {
    kv.set("seed", ctx.config.get_string("seed"));
  }
  const auto spec = PhantomSpec::from_keyvalue(kv);
  const auto seq = generate_sequence(spec, spec.frame_start_times(), ctx.jobs);
  std::vector<std::string> frame_names;
  for (std::size_t i = 0; i < seq.frames.size(); ++i) {
    const auto name = fmt::format("frame_{:03}.pgm", i);
    frame_names.push_back(name);
    const auto path = out.add(name);
    out.add(name + ".meta");
    save_gray(seq.frames[i], path);
    write_sidecar(seq.frames[i].meta(), path);
  }
  write_truth_summary(seq.truth, out.add("truth_summary.csv"));
  write_truth_profiles(seq.truth, out.add("truth_profiles.csv"));
  save_visar(generate_visar(spec), out.add("visar.csv"));

  // Descriptor ready for `report`, with a threshold halfway between the
  // background and material levels and a baseline that ends before the
  // fluctuation onset.
  KeyValueFile exp;
  exp.set("thickness_in", format_number(spec.thickness_in));
  exp.set("label", spec.label);
  exp.set("visar", "visar.csv");
  std::string frames;
  for (const auto& n : frame_names) {
    frames += (frames.empty() ? "" : ",") + n;
  }
  exp.set("frames", frames);
  exp.set("threshold",
          format_number(0.5 * (spec.background_intensity + spec.material_intensity)));
  exp.set("apex_center_x_mm", format_number(spec.resolved_center_x_mm()));
  exp.set("baseline_t0", "0");
  exp.set("baseline_t1", format_number(0.75 * spec.fluctuation.onset_us));
  exp.save(out.add("experiment.txt"));
}

void cmd_report(const Context& ctx, Artifacts& out, const std::vector<fs::path>& descriptors) {
  std::vector<ExperimentRecord> records;
  for (const auto& d : descriptors) {
    records.push_back(build_record(ExperimentDescriptor::load(d), ctx.jobs));
  }
  const auto table = feature_table(records);
  write_feature_table_csv(table, out.add("feature_table.csv"));
  write_json(to_json(trend_report(table)), out.add("trends.json"));
}

void write_manifest(const Context& ctx, const Artifacts& out) {
  nlohmann::ordered_json j;
  j["subcommand"] = ctx.subcommand;
  auto& cfg = j["effective_config"] = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ctx.config.entries()) {
    cfg[k] = v;
  }
  auto& inputs = j["inputs"] = nlohmann::ordered_json::array();
  for (const auto& p : out.inputs()) {
    inputs.push_back({{"path", p.string()}, {"sha256", sha256_file(p)}});
  }
  auto& arts = j["artifacts"] = nlohmann::ordered_json::array();
  for (const auto& n : out.names()) {
    const auto p = out.dir() / n;
    arts.push_back({{"path", n}, {"bytes", fs::file_size(p)}, {"sha256", sha256_file(p)}});
  }
  write_json(j, out.dir() / "manifest.json");
}

int dispatch(Context& ctx) {
  ctx.jobs = static_cast<int>(ctx.config.get_int("jobs"));
  if (ctx.jobs < 1) {
    throw ConfigError("jobs must be at least 1");
  }
  const fs::path out_dir = ctx.require("output_dir");
  const auto& sub = ctx.subcommand;

  std::vector<fs::path> inputs;
  if (sub == "denoise" || sub == "contour" || sub == "track" || sub == "velocity") {
    inputs = ctx.paths("input");
  } else if (sub == "visar-features") {
    inputs = {ctx.require("visar")};
  } else if (sub == "compare") {
    inputs = {ctx.require("apex"), ctx.require("visar")};
  } else if (sub == "phantom") {
    inputs = {ctx.require("phantom_spec")};
  } else if (sub == "report") {
    inputs = ctx.paths("experiments");
  }
  require_exists(inputs);
  Artifacts out(out_dir, inputs);
  out.reserve("manifest.json");

  if (sub == "denoise") cmd_denoise(ctx, out, inputs);
  else if (sub == "contour") cmd_contour(ctx, out, inputs);
  else if (sub == "track") cmd_track(ctx, out, inputs, false);
  else if (sub == "velocity") cmd_track(ctx, out, inputs, true);
  else if (sub == "visar-features") cmd_visar_features(ctx, out, inputs[0]);
  else if (sub == "compare") cmd_compare(ctx, out, inputs[0], inputs[1]);
  else if (sub == "phantom") cmd_phantom(ctx, out, inputs[0]);
  else if (sub == "report") cmd_report(ctx, out, inputs);

  write_manifest(ctx, out);
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args) {
  CLI::App app{"Radiograph sequence kinematics toolkit", "prad"};
  app.require_subcommand(1, 1);
  app.fallthrough();

  std::string config_path;
  app.add_option("--config", config_path, "key=value configuration file");
  std::map<std::string, std::string> flag_values;
  std::set<std::string> known;
  for (const auto& key : kKeys) {
    known.insert(key.name);
    std::string help = key.help;
    if (*key.fallback) {
      help += std::string(" [default: ") + key.fallback + "]";
    }
    app.add_option(std::string("--") + key.name, flag_values[key.name], help);
  }
  for (const char* name : {"denoise", "contour", "track", "velocity", "visar-features", "compare",
                           "phantom", "report"}) {
    app.add_subcommand(name);
  }

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kBadConfig;
  }

  Context ctx;
  ctx.subcommand = app.get_subcommands().front()->get_name();
  try {
    for (const auto& key : kKeys) {
      if (*key.fallback) {
        ctx.config.set(key.name, key.fallback);
      }
    }
    if (!config_path.empty()) {
      const auto file = KeyValueFile::load(config_path);
      file.require_known(known);
      ctx.config.merge(file);
    }
    for (const auto& key : kKeys) {
      if (app.count(std::string("--") + key.name) > 0) {
        ctx.config.set(key.name, flag_values[key.name]);
      }
    }
    return dispatch(ctx);
  } catch (const ConfigError& e) {
    std::cerr << "prad " << ctx.subcommand << ": configuration error: " << e.what() << '\n';
    return kBadConfig;
  } catch (const DataError& e) {
    std::cerr << "prad " << ctx.subcommand << ": data error: " << e.what() << '\n';
    return kDataError;
  } catch (const std::exception& e) {
    std::cerr << "prad " << ctx.subcommand << ": internal error: " << e.what() << '\n';
    return kInternalError;
  }
}

}  // namespace pradkit::cli
