#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "pradkit/image.hpp"

namespace pradkit {

enum class Connectivity { Four = 4, Eight = 8 };

Connectivity parse_connectivity(int value);

/// Named regions of a melting-coupon radiograph.
enum class StructureLabel { TopSurface, Bubble, Bottom, Trunk, HorizontalStructure, Unknown };

std::string_view to_string(StructureLabel label);
StructureLabel parse_structure_label(std::string_view text);

/// One-pixel-wide contour produced by 1-bit erosion.
struct ContourMask {
  BinaryImage mask;
  double source_threshold = 0.0;
  Connectivity connectivity = Connectivity::Four;
};

/// Ordered boundary curve in physical coordinates.
struct Contour {
  StructureLabel structure_label = StructureLabel::Unknown;
  std::vector<PhysPoint> points;
  std::vector<PixelCoord> pixels;  ///< the traced pixels, same order as points
  double time_us = 0.0;
  bool closed = false;
};

/// Foreground where intensity <= threshold (dense material is dark).
BinaryImage binarize(const GrayImage& img, double threshold);

/// A pixel stays foreground iff it and all of its 4- or 8-neighbours are
/// foreground. Neighbours outside the image count as background.
BinaryImage erode_once(const BinaryImage& bin, Connectivity connectivity = Connectivity::Four);

/// Foreground minus its one-pixel erosion.
ContourMask contour_of(const BinaryImage& bin, Connectivity connectivity = Connectivity::Four);

/// Binarize at `threshold`, erode the foreground one pixel deep and subtract.
ContourMask one_bit_erosion(const GrayImage& img, double threshold,
                            Connectivity connectivity = Connectivity::Four);

/// One contour mask per threshold. Thresholds must be strictly increasing.
std::vector<ContourMask> threshold_sweep(const GrayImage& img, const std::vector<double>& thresholds,
                                         Connectivity connectivity = Connectivity::Four);

/// `count` evenly spaced thresholds covering [lo, hi] inclusive.
std::vector<double> even_thresholds(double lo, double hi, int count);

struct LargestComponent {};
struct SeededComponent {
  PixelCoord seed;
};
using ComponentMode = std::variant<LargestComponent, SeededComponent>;

struct ComponentInfo {
  PixelCoord anchor;  ///< topmost-leftmost pixel
  std::size_t size = 0;
};

/// Connected components in raster order of their anchors.
std::vector<ComponentInfo> label_components(const BinaryImage& bin,
                                            Connectivity connectivity = Connectivity::Eight);

/// Keeps a single connected component: the one containing the seed, or the
/// largest (ties go to the smallest anchor in (row, col) order).
BinaryImage select_component(const BinaryImage& bin, const ComponentMode& mode,
                             Connectivity connectivity = Connectivity::Eight);

/// Moore-neighbour trace of the 8-connected contour component containing
/// `anchor`, clockwise on screen, starting at its topmost-leftmost pixel.
///
/// Closed curves list each boundary pixel in trace order. When the trace has
/// to walk back over pixels (open arcs and spurs) the result is open, starts
/// at the first end point met on the trace and lists each pixel once.
Contour trace_boundary(const ContourMask& mask, PixelCoord anchor,
                       StructureLabel label = StructureLabel::Unknown);

}  // namespace pradkit
