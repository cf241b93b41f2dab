#include "support.hpp"

#include <cmath>

#include "pradkit/error.hpp"
#include "pradkit/fusion.hpp"
#include "pradkit/io.hpp"
#include "pradkit/phantom.hpp"

using namespace pradkit;

namespace {

FeatureRow row(double thickness, std::optional<double> plateau, std::optional<double> noise = {},
               std::optional<double> amp = {}, std::optional<double> t = {}) {
  FeatureRow r;
  r.thickness_in = thickness;
  r.label = format_number(thickness);
  r[Feature::PlateauV] = plateau;
  r[Feature::NoiseRms] = noise;
  r[Feature::FluctAmplitude] = amp;
  r[Feature::FirstFluctT] = t;
  return r;
}

}  // namespace

TEST_CASE("interpolate_missing examples") {
  const auto table = make_feature_table({row(0.25, 2.0), row(0.5, 1.0)});
  CHECK(interpolate_missing(table, Feature::PlateauV, 0.375) == doctest::Approx(1.5));
  CHECK(interpolate_missing(table, Feature::PlateauV, 0.25) == 2.0);
  CHECK(interpolate_missing(table, Feature::PlateauV, 0.5) == 1.0);
  CHECK_THROWS_AS(interpolate_missing(table, Feature::PlateauV, 0.6), DataError);
  CHECK_THROWS_AS(interpolate_missing(table, Feature::NoiseRms, 0.3), DataError);

  // missing cells are skipped
  const auto gappy = make_feature_table({row(0.2, 1.0), row(0.3, std::nullopt), row(0.4, 3.0)});
  CHECK(interpolate_missing(gappy, Feature::PlateauV, 0.3) == doctest::Approx(2.0));
}

TEST_CASE("feature table ordering and keys") {
  const auto t = make_feature_table({row(0.5, 1.0), row(0.1875, 2.0), row(0.25, 1.5)});
  REQUIRE(t.rows.size() == 3);
  CHECK(t.rows[0].thickness_in == 0.1875);
  CHECK(t.rows[2].thickness_in == 0.5);
  CHECK_THROWS_AS(make_feature_table({row(0.25, 1.0), row(0.25, 2.0)}), DataError);
  CHECK_THROWS_AS(make_feature_table({}), DataError);
}

TEST_CASE("feature_table from records") {
  ExperimentRecord a;
  a.thickness_in = 0.5;
  a.label = "thick";
  a.features = FeatureSet{1.2, 0.03, 0.3, 14.0};
  ExperimentRecord b;
  b.thickness_in = 0.25;
  b.label = "thin";
  b.prad_apex = std::vector<ApexSample>{{1.0, 1.0}, {2.0, 2.0}};
  const auto t = feature_table({a, b});
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0].label == "thin");
  CHECK_FALSE(t.rows[0][Feature::PlateauV].has_value());
  CHECK(*t.rows[0][Feature::MeanApexV] == 1.5);
  CHECK(*t.rows[1][Feature::FirstFluctT] == 14.0);
  CHECK_FALSE(t.rows[1][Feature::MeanApexV].has_value());

  const auto one = feature_table({a});
  CHECK(one.rows.size() == 1);
}

TEST_CASE("trend_report examples") {
  const auto good = make_feature_table({row(0.2, 2.3, 0.01, 0.1, 5.0), row(0.3, 2.0, 0.02, 0.2, 6.0),
                                        row(0.4, 2.0, 0.03, 0.3, 7.0)});
  const auto r = trend_report(good);
  CHECK(r.checks.size() == 4);
  CHECK(r.all_passed());
  CHECK(r.passed_count() == 4);

  const auto bad = make_feature_table({row(0.2, 2.3, 0.01, 0.1, 5.0), row(0.3, 2.0, 0.02, 0.2, 6.0),
                                       row(0.4, 2.1, 0.03, 0.3, 7.0)});
  const auto rb = trend_report(bad);
  CHECK(rb.passed_count() == 3);
  const auto& v = rb.checks[0];
  CHECK(v.name == "average_velocity_decreases");
  CHECK_FALSE(v.passed);
  REQUIRE(v.violations.size() == 1);
  CHECK(v.violations[0].thickness_lo == 0.3);
  CHECK(v.violations[0].thickness_hi == 0.4);
  CHECK(v.violations[0].value_lo == 2.0);
  CHECK(v.violations[0].value_hi == 2.1);

  CHECK_THROWS_AS(trend_report(make_feature_table({row(0.2, 2.0, 0.1, 0.1, 1.0),
                                                   row(0.3, 1.0, 0.2, 0.2, 2.0)})),
                  DataError);
}

TEST_CASE("trend_report is invariant under positive scaling") {
  std::vector<FeatureRow> rows{row(0.2, 2.3, 0.01, 0.1, 5.0), row(0.3, 2.4, 0.02, 0.05, 6.0),
                               row(0.4, 2.0, 0.03, 0.3, 5.5), row(0.5, 1.9, 0.02, 0.4, 8.0)};
  const auto base = trend_report(make_feature_table(rows));
  for (auto& r : rows) {
    for (auto f : kAllFeatures) {
      if (r[f]) *r[f] *= 3.7;
    }
  }
  const auto scaled = trend_report(make_feature_table(rows));
  for (std::size_t i = 0; i < 4; ++i) {
    CHECK(base.checks[i].passed == scaled.checks[i].passed);
    CHECK(base.checks[i].violations.size() == scaled.checks[i].violations.size());
  }
}

TEST_CASE("feature names") {
  for (auto f : kAllFeatures) CHECK(parse_feature(feature_name(f)) == f);
  CHECK(feature_name(Feature::MeanApexV) == "mean_apex_v");
  CHECK_THROWS_AS(parse_feature("speed"), ConfigError);
}

TEST_CASE("descriptor parsing") {
  const auto kv = KeyValueFile::parse(
      "thickness_in = 0.375\nvisar = v.csv\nframes = a.pgm, b.pgm\nthreshold = 0.6\n"
      "connectivity = 8\napex_half_width = 3\nbaseline_t1 = 9\nfluct_m = 4\n");
  const auto d = ExperimentDescriptor::from_keyvalue(kv, "/data/exp");
  CHECK(d.thickness_in == 0.375);
  CHECK(d.label == "0.375 in");
  CHECK(*d.visar_path == std::filesystem::path("/data/exp/v.csv"));
  REQUIRE(d.frame_paths.size() == 2);
  CHECK(d.frame_paths[1] == std::filesystem::path("/data/exp/b.pgm"));
  CHECK(d.tracking.threshold == 0.6);
  CHECK(d.tracking.connectivity == Connectivity::Eight);
  CHECK(d.apex_half_width == 3);
  CHECK(d.fluctuation.baseline_t1 == 9.0);
  CHECK(d.fluctuation.m == 4);

  CHECK_THROWS_AS(ExperimentDescriptor::from_keyvalue(KeyValueFile::parse("visar = v.csv\n")),
                  ConfigError);
  CHECK_THROWS_AS(
      ExperimentDescriptor::from_keyvalue(KeyValueFile::parse("thickness_in = 1\ncolour = red\n")),
      ConfigError);
  CHECK_THROWS_AS(ExperimentDescriptor::from_keyvalue(KeyValueFile::parse(
                      "thickness_in = 1\nframes = a.pgm\nframe_times_us = 1,2\n")),
                  ConfigError);
}

TEST_CASE("build_record") {
  testing::TempDir dir("fusion");
  PhantomSpec spec;
  spec.width_px = 96;
  spec.height_px = 96;
  spec.surface_base_mm = 2.0;
  spec.visar_end_us = 20.0;
  spec.visar_noise_sigma = 0.01;
  save_visar(generate_visar(spec), dir / "v.csv");

  SUBCASE("velocimeter only") {
    ExperimentDescriptor d;
    d.thickness_in = 0.25;
    d.label = "v";
    d.visar_path = dir / "v.csv";
    const auto rec = build_record(d);
    CHECK(rec.frames.empty());
    REQUIRE(rec.features.has_value());
    CHECK(rec.features->plateau_v_km_s == doctest::Approx(1.0).epsilon(0.01));
    CHECK_FALSE(rec.prad_apex.has_value());
  }

  SUBCASE("two phantom frames") {
    const auto seq = generate_sequence(spec, {0.0, 3.0});
    for (std::size_t i = 0; i < 2; ++i) {
      const auto p = dir / ("f" + std::to_string(i) + ".pgm");
      save_gray(seq.frames[i], p);
      write_sidecar(seq.frames[i].meta(), p);
    }
    ExperimentDescriptor d;
    d.thickness_in = 0.25;
    d.frame_paths = {dir / "f0.pgm", dir / "f1.pgm"};
    const auto rec = build_record(d);
    CHECK(rec.frames.size() == 2);
    REQUIRE(rec.prad_apex.has_value());
    REQUIRE(rec.prad_apex->size() == 1);
    CHECK((*rec.prad_apex)[0].mid_time_us == doctest::Approx(3.14));
    CHECK((*rec.prad_apex)[0].v_mm_us == doctest::Approx(1.0).epsilon(0.05));
    CHECK_FALSE(rec.features.has_value());
  }

  SUBCASE("errors carry context") {
    ExperimentDescriptor empty;
    empty.thickness_in = 0.25;
    empty.label = "nothing";
    CHECK_THROWS_AS(build_record(empty), ConfigError);

    ExperimentDescriptor missing;
    missing.thickness_in = 0.3;
    missing.label = "lost";
    missing.visar_path = dir / "nope.csv";
    try {
      build_record(missing);
      FAIL("expected an error");
    } catch (const IoError& e) {
      CHECK(std::string(e.what()).find("lost") != std::string::npos);
      CHECK(std::string(e.what()).find("nope.csv") != std::string::npos);
    }
  }

  SUBCASE("deterministic") {
    ExperimentDescriptor d;
    d.thickness_in = 0.25;
    d.visar_path = dir / "v.csv";
    const auto a = feature_table({build_record(d)});
    const auto b = feature_table({build_record(d)});
    CHECK(a.rows[0].values == b.rows[0].values);
  }
}
