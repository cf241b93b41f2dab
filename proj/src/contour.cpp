#include "pradkit/contour.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <string>

#include "pradkit/error.hpp"

namespace pradkit {

namespace {

struct Offset {
  int dr;
  int dc;
};

constexpr std::array<Offset, 4> kNeighbors4 = {{{-1, 0}, {0, -1}, {0, 1}, {1, 0}}};
constexpr std::array<Offset, 8> kNeighbors8 = {
    {{-1, -1}, {-1, 0}, {-1, 1}, {0, -1}, {0, 1}, {1, -1}, {1, 0}, {1, 1}}};

// Clockwise on screen (row grows downward), starting west.
constexpr std::array<Offset, 8> kMoore = {
    {{0, -1}, {-1, -1}, {-1, 0}, {-1, 1}, {0, 1}, {1, 1}, {1, 0}, {1, -1}}};

int moore_index(int dr, int dc) {
  for (int i = 0; i < 8; ++i) {
    if (kMoore[i].dr == dr && kMoore[i].dc == dc) {
      return i;
    }
  }
  return -1;
}

template <typename Fn>
void for_each_neighbor(Connectivity conn, Fn&& fn) {
  if (conn == Connectivity::Four) {
    for (const auto& o : kNeighbors4) fn(o);
  } else {
    for (const auto& o : kNeighbors8) fn(o);
  }
}

// Labels every component; returns per-pixel labels (0 = background) and the
// component table indexed by label - 1.
std::vector<std::uint32_t> label_pixels(const BinaryImage& bin, Connectivity conn,
                                        std::vector<ComponentInfo>& comps) {
  const std::size_t w = bin.width();
  const std::size_t h = bin.height();
  const auto fg = bin.data();
  std::vector<std::uint32_t> labels(fg.size(), 0);
  std::vector<std::size_t> stack;
  for (std::size_t start = 0; start < fg.size(); ++start) {
    if (!fg[start] || labels[start] != 0) {
      continue;
    }
    const auto label = static_cast<std::uint32_t>(comps.size() + 1);
    comps.push_back({{start % w, start / w}, 0});
    labels[start] = label;
    stack.assign(1, start);
    std::size_t size = 0;
    while (!stack.empty()) {
      const std::size_t i = stack.back();
      stack.pop_back();
      ++size;
      const auto r = static_cast<std::ptrdiff_t>(i / w);
      const auto c = static_cast<std::ptrdiff_t>(i % w);
      for_each_neighbor(conn, [&](const Offset& o) {
        const auto nr = r + o.dr;
        const auto nc = c + o.dc;
        if (nr < 0 || nc < 0 || nr >= static_cast<std::ptrdiff_t>(h) ||
            nc >= static_cast<std::ptrdiff_t>(w)) {
          return;
        }
        const auto j = static_cast<std::size_t>(nr) * w + static_cast<std::size_t>(nc);
        if (fg[j] && labels[j] == 0) {
          labels[j] = label;
          stack.push_back(j);
        }
      });
    }
    comps.back().size = size;
  }
  return labels;
}

}  // namespace

Connectivity parse_connectivity(int value) {
  if (value == 4) return Connectivity::Four;
  if (value == 8) return Connectivity::Eight;
  throw ConfigError("connectivity must be 4 or 8, got " + std::to_string(value));
}

std::string_view to_string(StructureLabel label) {
  switch (label) {
    case StructureLabel::TopSurface: return "top_surface";
    case StructureLabel::Bubble: return "bubble";
    case StructureLabel::Bottom: return "bottom";
    case StructureLabel::Trunk: return "trunk";
    case StructureLabel::HorizontalStructure: return "horizontal_structure";
    case StructureLabel::Unknown: return "unknown";
  }
  return "unknown";
}

StructureLabel parse_structure_label(std::string_view text) {
  for (auto label : {StructureLabel::TopSurface, StructureLabel::Bubble, StructureLabel::Bottom,
                     StructureLabel::Trunk, StructureLabel::HorizontalStructure,
                     StructureLabel::Unknown}) {
    if (to_string(label) == text) {
      return label;
    }
  }
  throw ConfigError("unknown structure label '" + std::string(text) + "'");
}

BinaryImage binarize(const GrayImage& img, double threshold) {
  const auto px = img.pixels();
  std::vector<std::uint8_t> fg(px.size());
  std::transform(px.begin(), px.end(), fg.begin(),
                 [threshold](double v) { return static_cast<std::uint8_t>(v <= threshold); });
  return BinaryImage(img.width(), img.height(), std::move(fg), threshold, img.meta());
}

BinaryImage erode_once(const BinaryImage& bin, Connectivity connectivity) {
  const std::size_t w = bin.width();
  const std::size_t h = bin.height();
  std::vector<std::uint8_t> out(bin.size(), 0);
  for (std::size_t r = 0; r < h; ++r) {
    for (std::size_t c = 0; c < w; ++c) {
      if (!bin.at(c, r)) {
        continue;
      }
      bool keep = true;
      for_each_neighbor(connectivity, [&](const Offset& o) {
        const auto nc = static_cast<std::ptrdiff_t>(c) + o.dc;
        const auto nr = static_cast<std::ptrdiff_t>(r) + o.dr;
        if (!bin.contains(nc, nr) ||
            !bin.at(static_cast<std::size_t>(nc), static_cast<std::size_t>(nr))) {
          keep = false;
        }
      });
      out[r * w + c] = keep;
    }
  }
  return bin.with_data(std::move(out));
}

ContourMask contour_of(const BinaryImage& bin, Connectivity connectivity) {
  const auto eroded = erode_once(bin, connectivity);
  std::vector<std::uint8_t> out(bin.size());
  const auto a = bin.data();
  const auto b = eroded.data();
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = a[i] && !b[i];
  }
  return {bin.with_data(std::move(out)), bin.threshold_used(), connectivity};
}

ContourMask one_bit_erosion(const GrayImage& img, double threshold, Connectivity connectivity) {
  return contour_of(binarize(img, threshold), connectivity);
}

std::vector<ContourMask> threshold_sweep(const GrayImage& img, const std::vector<double>& thresholds,
                                         Connectivity connectivity) {
  if (thresholds.empty()) {
    throw ConfigError("threshold sweep needs at least one threshold");
  }
  for (std::size_t i = 1; i < thresholds.size(); ++i) {
    if (!(thresholds[i] > thresholds[i - 1])) {
      throw ConfigError("thresholds must be strictly increasing");
    }
  }
  std::vector<ContourMask> out;
  out.reserve(thresholds.size());
  for (double t : thresholds) {
    out.push_back(one_bit_erosion(img, t, connectivity));
  }
  return out;
}

std::vector<double> even_thresholds(double lo, double hi, int count) {
  if (count < 1 || !(hi >= lo) || (count > 1 && !(hi > lo))) {
    throw ConfigError("even thresholds need count >= 1 and lo < hi");
  }
  if (count == 1) {
    return {lo};
  }
  std::vector<double> out(static_cast<std::size_t>(count));
  for (int i = 0; i < count; ++i) {
    out[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (count - 1);
  }
  out.back() = hi;
  return out;
}

std::vector<ComponentInfo> label_components(const BinaryImage& bin, Connectivity connectivity) {
  std::vector<ComponentInfo> comps;
  label_pixels(bin, connectivity, comps);
  return comps;
}

BinaryImage select_component(const BinaryImage& bin, const ComponentMode& mode,
                             Connectivity connectivity) {
  std::vector<ComponentInfo> comps;
  const auto labels = label_pixels(bin, connectivity, comps);
  if (comps.empty()) {
    throw DataError("cannot select a component: foreground is empty");
  }
  std::uint32_t wanted = 0;
  if (const auto* seeded = std::get_if<SeededComponent>(&mode)) {
    const auto& s = seeded->seed;
    if (s.col >= bin.width() || s.row >= bin.height()) {
      throw ConfigError("component seed lies outside the image");
    }
    wanted = labels[s.row * bin.width() + s.col];
    if (wanted == 0) {
      throw DataError("component seed lies on background");
    }
  } else {
    // Components are created in raster order of their anchors, so the first
    // maximum is also the tie winner.
    std::size_t best = 0;
    for (std::size_t i = 1; i < comps.size(); ++i) {
      if (comps[i].size > comps[best].size) {
        best = i;
      }
    }
    wanted = static_cast<std::uint32_t>(best + 1);
  }
  std::vector<std::uint8_t> out(labels.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = labels[i] == wanted;
  }
  return bin.with_data(std::move(out));
}

Contour trace_boundary(const ContourMask& mask, PixelCoord anchor, StructureLabel label) {
  const auto& bin = mask.mask;
  if (anchor.col >= bin.width() || anchor.row >= bin.height() || !bin.at(anchor.col, anchor.row)) {
    throw DataError("trace anchor is not on the contour");
  }
  const auto comp = select_component(bin, SeededComponent{anchor}, Connectivity::Eight);
  const auto w = static_cast<std::ptrdiff_t>(bin.width());
  auto inside = [&](std::ptrdiff_t c, std::ptrdiff_t r) {
    return comp.contains(c, r) && comp.at(static_cast<std::size_t>(c), static_cast<std::size_t>(r));
  };

  std::ptrdiff_t start = 0;
  const auto fg = comp.data();
  while (!fg[static_cast<std::size_t>(start)]) {
    ++start;
  }
  const std::ptrdiff_t sr = start / w;
  const std::ptrdiff_t sc = start % w;

  struct Step {
    std::ptrdiff_t r, c;
    int back;  // direction from the new pixel to the last background pixel checked
  };
  // Scans clockwise from the backtrack direction for the next boundary pixel.
  auto advance = [&](std::ptrdiff_t r, std::ptrdiff_t c, int back) -> std::optional<Step> {
    for (int k = 1; k <= 8; ++k) {
      const int d = (back + k) % 8;
      const auto nr = r + kMoore[d].dr;
      const auto nc = c + kMoore[d].dc;
      if (inside(nc, nr)) {
        const int p = (d + 7) % 8;
        const auto pr = r + kMoore[p].dr;
        const auto pc = c + kMoore[p].dc;
        return Step{nr, nc, moore_index(static_cast<int>(pr - nr), static_cast<int>(pc - nc))};
      }
    }
    return std::nullopt;
  };

  std::vector<PixelCoord> seq{{static_cast<std::size_t>(sc), static_cast<std::size_t>(sr)}};
  const auto first = advance(sr, sc, 0);
  if (first) {
    Step cur = *first;
    const std::size_t limit = 4 * comp.count() + 16;
    for (std::size_t guard = 0; guard < limit; ++guard) {
      const auto next = advance(cur.r, cur.c, cur.back);
      if (cur.r == sr && cur.c == sc && next->r == first->r && next->c == first->c) {
        break;
      }
      seq.push_back({static_cast<std::size_t>(cur.c), static_cast<std::size_t>(cur.r)});
      cur = *next;
    }
  }

  std::vector<PixelCoord> unique = seq;
  std::sort(unique.begin(), unique.end());
  unique.erase(std::unique(unique.begin(), unique.end()), unique.end());
  bool closed = unique.size() == seq.size() && seq.size() != 2;

  if (!closed) {
    auto neighbor_count = [&](const PixelCoord& p) {
      int n = 0;
      for (const auto& o : kNeighbors8) {
        n += inside(static_cast<std::ptrdiff_t>(p.col) + o.dc,
                    static_cast<std::ptrdiff_t>(p.row) + o.dr);
      }
      return n;
    };
    const auto endpoint = std::find_if(seq.begin(), seq.end(),
                                       [&](const PixelCoord& p) { return neighbor_count(p) == 1; });
    if (endpoint != seq.end()) {
      std::rotate(seq.begin(), endpoint, seq.end());
    }
    std::vector<PixelCoord> ordered;
    std::vector<std::uint8_t> seen(comp.size(), 0);
    for (const auto& p : seq) {
      auto& s = seen[p.row * comp.width() + p.col];
      if (!s) {
        s = 1;
        ordered.push_back(p);
      }
    }
    seq = std::move(ordered);
  }

  Contour out;
  out.structure_label = label;
  out.time_us = bin.meta().time_us;
  out.closed = closed;
  out.pixels = seq;
  out.points.reserve(seq.size());
  const auto& off = bin.meta().roi_offset;
  for (const auto& p : seq) {
    out.points.push_back(
        to_physical({p.col + off.col, p.row + off.row}, bin.meta().pixel_pitch_mm));
  }
  return out;
}

}  // namespace pradkit
