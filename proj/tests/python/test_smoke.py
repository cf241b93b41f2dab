import math
import os

import numpy as np
import pytest

import pradkit

DATA = os.environ.get("PRADKIT_DATA_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "data"))


def test_gray_image_round_trip(tmp_path):
    px = np.linspace(0.0, 1.0, 12).reshape(3, 4)
    img = pradkit.GrayImage(px, pixel_pitch_mm=0.2, time_us=1.5)
    assert (img.width, img.height) == (4, 3)
    assert img.pixel_pitch_mm == 0.2
    np.testing.assert_array_equal(img.to_numpy(), px)
    path = tmp_path / "ramp.pgm"
    pradkit.save_gray(img, str(path))
    back = pradkit.load_gray(str(path))
    assert np.max(np.abs(back.to_numpy() - px)) <= 0.5 / 65535 + 1e-12


def test_rejects_out_of_range_pixels():
    with pytest.raises(pradkit.DataError):
        pradkit.GrayImage(np.array([[0.0, 1.5]]))


def test_one_bit_erosion_matches_brute_force():
    rng = np.random.default_rng(4)
    fg = rng.random((20, 24)) < 0.6
    img = pradkit.GrayImage(np.where(fg, 0.0, 1.0))
    got = pradkit.one_bit_erosion(img, 0.5).mask.to_numpy().astype(bool)
    padded = np.pad(fg, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    np.testing.assert_array_equal(got, fg & ~interior)


def test_threshold_sweep_requires_increasing():
    img = pradkit.GrayImage(np.full((4, 4), 0.5))
    with pytest.raises(pradkit.ConfigError):
        pradkit.threshold_sweep(img, [0.6, 0.4])


def test_constant_diffusion_conserves_mass():
    rng = np.random.default_rng(5)
    px = rng.random((32, 32))
    out = pradkit.diffuse(pradkit.GrayImage(px), 1.0, 50, 0.25).to_numpy()
    assert abs(out.sum() - px.sum()) <= 1e-9 * px.sum()
    assert out.min() >= px.min() - 1e-12 and out.max() <= px.max() + 1e-12
    with pytest.raises(pradkit.ConfigError):
        pradkit.diffuse(pradkit.GrayImage(px), 1.0, 1, 0.3)


def test_phantom_to_apex_velocity():
    spec = pradkit.PhantomSpec(
        {"width_px": 96, "height_px": 128, "pixel_pitch_mm": 0.25, "surface_base_mm": 2,
         "surface_speed_mm_us": 1.0, "frame_count": 4, "noise_sigma": 0.02}
    )
    frames, truth = pradkit.generate_sequence(spec)
    assert len(frames) == 4
    profiles = []
    for f in frames:
        mask = pradkit.select_component(pradkit.one_bit_erosion(pradkit.heat_denoise(f), 0.7).mask)
        profiles.append(pradkit.surface_profile(mask))
    center = 0.5 * (96 - 1) * 0.25
    apex = pradkit.apex_velocity(profiles, center)
    assert len(apex) == 3
    mean = sum(v for _, v in apex) / len(apex)
    assert mean == pytest.approx(1.0, rel=0.1)
    t_mid, x, v = pradkit.velocity_field(profiles[0], profiles[1])
    assert t_mid == pytest.approx(0.5 * (frames[0].time_us + frames[1].time_us))
    assert len(x) == len(v) == 96


def test_fixture_spec_loads():
    spec = pradkit.PhantomSpec.load(os.path.join(DATA, "phantom", "fixture.spec"))
    d = spec.to_dict()
    assert d["width_px"] == "512"
    assert spec.apex_speed() == 1.0
    assert len(spec.frame_start_times()) == 20


def test_visar_features(tmp_path):
    spec = pradkit.PhantomSpec(
        {"surface_speed_mm_us": 1.5, "visar_end_us": 30, "visar_noise_sigma": 0.01,
         "fluct_onset_us": 12, "fluct_amplitude_km_s": 0.05, "fluct_frequency_mhz": 0.8333}
    )
    series = pradkit.generate_visar(spec)
    path = tmp_path / "v.csv"
    pradkit.save_visar(series, str(path))
    loaded = pradkit.load_visar(str(path), thickness_in=0.25, label="t")
    assert len(loaded) == len(series)
    f = pradkit.extract_features(loaded, baseline_t0=0, baseline_t1=10)
    assert f["plateau_v_km_s"] == pytest.approx(1.5, rel=0.01)
    assert f["first_fluct_t_us"] == pytest.approx(12.0, abs=0.2)
    report = pradkit.compare_prad_visar([(5.0, 1.6), (40.0, 1.0)], loaded)
    assert report["n"] == 1
    assert report["bias_km_s"] == pytest.approx(0.1, abs=0.05)


def test_curvature_fit_on_circle():
    r = 20.0
    px = np.ones((64, 64))
    rows, cols = np.mgrid[0:64, 0:64]
    px[(cols - 32) ** 2 + (rows - 40) ** 2 <= r * r] = 0.0
    mask = pradkit.binarize(pradkit.GrayImage(px, pixel_pitch_mm=1.0), 0.5)
    profile = pradkit.surface_profile(mask)
    fit = pradkit.curvature_fit(profile, 22, 42)
    assert fit is not None
    assert fit["radius_mm"] == pytest.approx(r, rel=0.05)
    assert math.isnan(profile.y_mm[0])
