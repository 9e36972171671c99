#pragma once

#include "cartoonkit/image.hpp"

namespace cartoonkit {

struct GuidedFilterParams {
  int radius = 5;
  float epsilon = 2e-2f;

  void validate() const;
};

/// Defaults tuned at 256x256; the radius grows with the image diagonal.
GuidedFilterParams default_surface_params(int height, int width);

/// Mean over the (2r+1)^2 window, normalized by the number of in-image
/// pixels, per channel. Window sums are accumulated in double.
Image box_filter(const Image& img, int radius);

/// Edge-preserving guided filter. `guide` is either single-channel (shared
/// by every input channel) or has as many channels as `input`, in which
/// case channel c of the input is regressed on channel c of the guide.
Image guided_filter(const Image& guide, const Image& input,
                    const GuidedFilterParams& params);

/// Self-guided smoothing of a 3-channel image: the surface representation.
Image extract_surface(const Image& img, const GuidedFilterParams& params);

}  // namespace cartoonkit
