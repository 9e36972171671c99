#include "cartoonkit/surface.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "cartoonkit/error.hpp"
#include "cartoonkit/kernels.hpp"
#include "cartoonkit/parallel.hpp"

namespace cartoonkit {
namespace {

constexpr int kColumnTile = 256;

// Box mean of one h x w plane. Horizontal window sums are formed per row,
// then slid vertically over column tiles; both passes are independent per
// row / per tile, so any thread count yields identical bits.
void box_plane(const float* src, float* dst, int h, int w, int r) {
  const auto& k = kernels::active();
  const std::size_t W = static_cast<std::size_t>(w);
  std::vector<double> hsum(static_cast<std::size_t>(h) * W);

  parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t y) {
    const float* in = src + y * W;
    double* out = hsum.data() + y * W;
    double s = 0.0;
    for (int x = 0; x <= std::min(r, w - 1); ++x) s += in[x];
    for (int x = 0; x < w; ++x) {
      out[x] = s;
      const double add = x + r + 1 < w ? in[x + r + 1] : 0.0;
      const double sub = x - r >= 0 ? in[x - r] : 0.0;
      s = (s + add) - sub;
    }
  });

  std::vector<double> count_x(W);
  for (int x = 0; x < w; ++x) {
    count_x[static_cast<std::size_t>(x)] = std::min(x + r, w - 1) - std::max(x - r, 0) + 1;
  }
  const std::vector<double> zeros(std::min<std::size_t>(W, kColumnTile), 0.0);

  const std::size_t tiles = (W + kColumnTile - 1) / kColumnTile;
  parallel_for(0, tiles, [&](std::size_t t) {
    const std::size_t x0 = t * kColumnTile;
    const std::size_t tw = std::min<std::size_t>(kColumnTile, W - x0);
    std::vector<double> acc(tw, 0.0);
    for (int y = 0; y <= std::min(r, h - 1); ++y) {
      k.slide_window(acc.data(), hsum.data() + y * W + x0, nullptr, tw);
    }
    for (int y = 0; y < h; ++y) {
      const double count_y = std::min(y + r, h - 1) - std::max(y - r, 0) + 1;
      k.normalize(dst + y * W + x0, acc.data(), count_x.data() + x0, count_y, tw);
      const bool has_add = y + r + 1 < h;
      const bool has_sub = y - r >= 0;
      if (!has_add && !has_sub) continue;
      const double* add = has_add ? hsum.data() + static_cast<std::size_t>(y + r + 1) * W + x0
                                  : zeros.data();
      const double* sub = has_sub ? hsum.data() + static_cast<std::size_t>(y - r) * W + x0
                                  : nullptr;
      k.slide_window(acc.data(), add, sub, tw);
    }
  });
}

std::vector<float> box_plane(const std::vector<float>& src, int h, int w, int r) {
  std::vector<float> dst(src.size());
  box_plane(src.data(), dst.data(), h, w, r);
  return dst;
}

std::vector<float> plane_of(const Image& img, int c) {
  const Image plane = extract_channel(img, c);
  const auto p = plane.data();
  return {p.begin(), p.end()};
}

}  // namespace

void GuidedFilterParams::validate() const {
  if (radius < 1) {
    throw Error(ErrorCode::kInvalidArgument,
                "guided filter radius must be >= 1, got " + std::to_string(radius));
  }
  if (!(epsilon > 0.0f) || !std::isfinite(epsilon)) {
    throw Error(ErrorCode::kInvalidArgument, "guided filter epsilon must be > 0");
  }
}

GuidedFilterParams default_surface_params(int height, int width) {
  const double diag = std::hypot(static_cast<double>(height), static_cast<double>(width));
  const double ref = std::hypot(256.0, 256.0);
  GuidedFilterParams p;
  p.radius = std::max(1, static_cast<int>(std::lround(5.0 * diag / ref)));
  p.epsilon = 2e-2f;
  return p;
}

Image box_filter(const Image& img, int radius) {
  if (radius < 0) throw Error(ErrorCode::kInvalidArgument, "box filter radius must be >= 0");
  if (img.empty()) return img;
  const int h = img.height(), w = img.width();
  if (img.channels() == 1) {
    Image out(h, w, 1);
    box_plane(img.data().data(), out.data().data(), h, w, radius);
    return out;
  }
  Image out(h, w, img.channels());
  for (int c = 0; c < img.channels(); ++c) {
    const auto filtered = box_plane(plane_of(img, c), h, w, radius);
    insert_channel(out, Image(h, w, 1, filtered), c);
  }
  return out;
}

Image guided_filter(const Image& guide, const Image& input,
                    const GuidedFilterParams& params) {
  params.validate();
  if (!guide.same_extent(input)) {
    throw Error(ErrorCode::kDimensionMismatch, "guided filter guide/input sizes differ");
  }
  if (guide.channels() != 1 && guide.channels() != input.channels()) {
    throw Error(ErrorCode::kDimensionMismatch,
                "guide must be single-channel or match the input channel count");
  }
  const int h = input.height(), w = input.width(), r = params.radius;
  const std::size_t n = input.pixel_count();
  const auto& k = kernels::active();
  Image out(h, w, input.channels());
  if (n == 0) return out;

  std::vector<float> ip(n), a(n), b(n), q(n);
  std::vector<float> guide_plane, mean_i, mean_ii, sq(n);
  for (int c = 0; c < input.channels(); ++c) {
    if (c == 0 || guide.channels() > 1) {
      guide_plane = plane_of(guide, guide.channels() > 1 ? c : 0);
      mean_i = box_plane(guide_plane, h, w, r);
      k.multiply(guide_plane.data(), guide_plane.data(), sq.data(), n);
      mean_ii = box_plane(sq, h, w, r);
    }
    const std::vector<float> p = plane_of(input, c);
    const std::vector<float> mean_p = box_plane(p, h, w, r);
    k.multiply(guide_plane.data(), p.data(), ip.data(), n);
    const std::vector<float> mean_ip = box_plane(ip, h, w, r);
    k.guided_coeffs(mean_i.data(), mean_p.data(), mean_ii.data(), mean_ip.data(),
                    params.epsilon, a.data(), b.data(), n);
    const std::vector<float> mean_a = box_plane(a, h, w, r);
    const std::vector<float> mean_b = box_plane(b, h, w, r);
    k.guided_apply(mean_a.data(), mean_b.data(), guide_plane.data(), q.data(), n);
    insert_channel(out, Image(h, w, 1, q), c);
  }
  return out;
}

Image extract_surface(const Image& img, const GuidedFilterParams& params) {
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "extract_surface expects a 3-channel image");
  }
  return guided_filter(img, img, params);
}

}  // namespace cartoonkit
