#pragma once

#include <array>
#include <cstdint>

#include "cartoonkit/image.hpp"

namespace cartoonkit {

inline constexpr double kTextureAlpha = 0.8;

struct RcsParams {
  double alpha = kTextureAlpha;
  std::array<double, 3> betas{0.0, 0.0, 0.0};
  std::uint64_t seed = 0;

  void validate() const;
};

/// Single-channel texture map. Values are deliberately not clamped; for
/// inputs in [0,1] they stay inside [lower_bound(alpha), upper_bound(alpha)].
struct TextureMap {
  Image map;
  bool unclamped = true;

  static double lower_bound(double alpha) { return -3.0 * (1.0 - alpha); }
  static double upper_bound(double alpha) { return alpha + 3.0 * (1.0 - alpha); }
};

/// Three independent U(-1,1) draws from CounterRng(seed, 0).
std::array<double, 3> sample_betas(std::uint64_t seed);

/// out = (1 - alpha)(b1 R + b2 G + b3 B) + alpha * Y.
TextureMap random_color_shift(const Image& img, const RcsParams& params);

/// random_color_shift with alpha = 0.8 and betas sampled from `seed`.
TextureMap extract_texture(const Image& img, std::uint64_t seed);

/// Affine map (v - lo)/(hi - lo) to [0,1] for display; a constant map
/// becomes all zeros.
struct VizMapping {
  double lo = 0.0;
  double hi = 0.0;
};
VizMapping texture_visualization_range(const TextureMap& tex);
Image visualize_texture(const TextureMap& tex, const VizMapping& mapping);

}  // namespace cartoonkit
