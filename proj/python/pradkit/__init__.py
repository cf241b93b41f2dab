"""Contours, surface kinematics and velocimeter features for radiograph sequences."""

from ._pradkit import *  # noqa: F401,F403
from ._pradkit import (
    BinaryImage,
    ConfigError,
    DataError,
    Error,
    GrayImage,
    IoError,
    PhantomSpec,
    VisarSeries,
)

__all__ = [
    "BinaryImage",
    "ConfigError",
    "DataError",
    "Error",
    "GrayImage",
    "IoError",
    "PhantomSpec",
    "VisarSeries",
    "adaptive_diffusivity",
    "apex_velocity",
    "binarize",
    "compare_prad_visar",
    "curvature_fit",
    "diffuse",
    "erode_once",
    "extract_features",
    "first_fluctuation_time",
    "generate_sequence",
    "generate_visar",
    "heat_denoise",
    "load_gray",
    "load_visar",
    "noise_rms",
    "one_bit_erosion",
    "plateau_mean",
    "render_frame",
    "resample_linear",
    "save_gray",
    "save_mask",
    "save_visar",
    "select_component",
    "surface_profile",
    "threshold_sweep",
    "trace_boundary",
    "velocity_field",
]
