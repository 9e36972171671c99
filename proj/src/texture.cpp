#include "cartoonkit/texture.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cartoonkit/error.hpp"
#include "cartoonkit/kernels.hpp"
#include "cartoonkit/parallel.hpp"
#include "cartoonkit/rng.hpp"

namespace cartoonkit {

void RcsParams::validate() const {
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "alpha must lie in [0,1]");
  }
  for (double b : betas) {
    if (!(std::abs(b) <= 1.0)) {
      throw Error(ErrorCode::kInvalidArgument, "each beta must lie in [-1,1]");
    }
  }
}

std::array<double, 3> sample_betas(std::uint64_t seed) {
  CounterRng rng(seed, 0);
  std::array<double, 3> betas{};
  for (double& b : betas) b = rng.uniform(-1.0, 1.0);
  return betas;
}

TextureMap random_color_shift(const Image& img, const RcsParams& params) {
  params.validate();
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                "random_color_shift expects a 3-channel image, got " +
                    std::to_string(img.channels()));
  }
  TextureMap tex{Image(img.height(), img.width(), 1), true};
  const auto& k = kernels::active();
  const std::size_t w = static_cast<std::size_t>(img.width());
  parallel_for(0, static_cast<std::size_t>(img.height()), [&](std::size_t y) {
    const int row = static_cast<int>(y);
    k.color_shift(img.row(row), tex.map.row(row), w, params.alpha, params.betas[0],
                  params.betas[1], params.betas[2]);
  });
  return tex;
}

TextureMap extract_texture(const Image& img, std::uint64_t seed) {
  RcsParams p;
  p.alpha = kTextureAlpha;
  p.betas = sample_betas(seed);
  p.seed = seed;
  return random_color_shift(img, p);
}

VizMapping texture_visualization_range(const TextureMap& tex) {
  const auto d = tex.map.data();
  if (d.empty()) return {};
  const auto [lo, hi] = std::minmax_element(d.begin(), d.end());
  return {*lo, *hi};
}

Image visualize_texture(const TextureMap& tex, const VizMapping& mapping) {
  Image out(tex.map.height(), tex.map.width(), 1);
  const double span = mapping.hi - mapping.lo;
  const auto src = tex.map.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < src.size(); ++i) {
    dst[i] = span > 0.0 ? static_cast<float>((src[i] - mapping.lo) / span) : 0.0f;
  }
  return out;
}

}  // namespace cartoonkit
