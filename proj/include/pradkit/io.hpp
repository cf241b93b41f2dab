#pragma once

#include <filesystem>
#include <optional>

#include "pradkit/image.hpp"

namespace pradkit {

/// Reads an 8- or 16-bit single-channel raster (binary PGM `P5` with maxval
/// 255 or 65535, or grayscale PNG). Intensities are divided by the bit-depth
/// maximum; `meta` is attached verbatim.
GrayImage load_gray(const std::filesystem::path& path, const FrameMeta& meta = {});

/// Writes a 16-bit P5 file with samples round(i * 65535).
void save_gray(const GrayImage& img, const std::filesystem::path& path);

/// Writes an 8-bit P5 file with foreground 255 and background 0.
void save_mask(const BinaryImage& bin, const std::filesystem::path& path);

/// Sidecar path for a frame: `<frame path>.meta`.
std::filesystem::path sidecar_path(const std::filesystem::path& frame_path);

/// Sidecar holds time_us, exposure_us and pixel_pitch_mm as key=value text.
void write_sidecar(const FrameMeta& meta, const std::filesystem::path& frame_path);
std::optional<FrameMeta> read_sidecar(const std::filesystem::path& frame_path);

/// load_gray with metadata taken from the sidecar when present, else `fallback`.
GrayImage load_frame(const std::filesystem::path& path, const FrameMeta& fallback = {});

}  // namespace pradkit
