#pragma once

#include <vector>

#include "pradkit/contour.hpp"
#include "pradkit/denoise.hpp"
#include "pradkit/kinematics.hpp"

namespace pradkit {

/// Frame-to-profile settings shared by the CLI and experiment records.
struct TrackingParams {
  bool denoise = true;
  HeatDenoiseParams denoise_params;
  double threshold = 0.7;
  Connectivity connectivity = Connectivity::Four;
  ScanDirection direction = ScanDirection::FromTop;
};

/// Optional heat denoising, 1-bit erosion of the largest dark component,
/// and the surface profile of the resulting contour.
SurfaceProfile track_frame(const GrayImage& frame, const TrackingParams& params);

/// track_frame over a sequence; `jobs` > 1 processes frames concurrently.
std::vector<SurfaceProfile> track_sequence(const std::vector<GrayImage>& frames,
                                           const TrackingParams& params, int jobs = 1);

}  // namespace pradkit
