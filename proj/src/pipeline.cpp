#include "pradkit/pipeline.hpp"

#include <optional>

#include "pradkit/parallel.hpp"

namespace pradkit {

SurfaceProfile track_frame(const GrayImage& frame, const TrackingParams& params) {
  const GrayImage work = params.denoise ? heat_denoise(frame, params.denoise_params) : frame;
  // Speckle below the threshold would start a column early; keep only the
  // largest dark body (8-connected, matching the contour topology).
  const auto body = select_component(binarize(work, params.threshold), LargestComponent{},
                                     Connectivity::Eight);
  return surface_profile(contour_of(body, params.connectivity), params.direction);
}

std::vector<SurfaceProfile> track_sequence(const std::vector<GrayImage>& frames,
                                           const TrackingParams& params, int jobs) {
  std::vector<std::optional<SurfaceProfile>> slots(frames.size());
  parallel_for(frames.size(), jobs,
               [&](std::size_t i) { slots[i].emplace(track_frame(frames[i], params)); });
  std::vector<SurfaceProfile> out;
  out.reserve(frames.size());
  for (auto& s : slots) {
    out.push_back(std::move(*s));
  }
  return out;
}

}  // namespace pradkit
