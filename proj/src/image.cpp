#include "cartoonkit/image.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "cartoonkit/error.hpp"
#include "cartoonkit/kernels.hpp"
#include "cartoonkit/parallel.hpp"

namespace cartoonkit {
namespace {

void check_shape(int height, int width, int channels) {
  if (height < 0 || width < 0 || (channels != 1 && channels != 3)) {
    throw Error(ErrorCode::kInvalidArgument,
                "image shape " + std::to_string(height) + "x" +
                    std::to_string(width) + "x" + std::to_string(channels) +
                    " is invalid (channels must be 1 or 3)");
  }
}

void require_rgb(const Image& img, const char* op) {
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + " expects a 3-channel image, got " +
                    std::to_string(img.channels()));
  }
}

// sRGB transfer function inverse.
double srgb_to_linear(double v) {
  return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4);
}

double lab_f(double t) {
  constexpr double delta = 6.0 / 29.0;
  return t > delta * delta * delta ? std::cbrt(t)
                                   : t / (3.0 * delta * delta) + 4.0 / 29.0;
}

}  // namespace

Image::Image(int height, int width, int channels, float fill)
    : height_(height), width_(width), channels_(channels) {
  check_shape(height, width, channels);
  data_.assign(static_cast<std::size_t>(height) * width * channels, fill);
}

Image::Image(int height, int width, int channels, std::vector<float> data)
    : height_(height), width_(width), channels_(channels), data_(std::move(data)) {
  check_shape(height, width, channels);
  if (data_.size() != static_cast<std::size_t>(height) * width * channels) {
    throw Error(ErrorCode::kDimensionMismatch,
                "image data length " + std::to_string(data_.size()) +
                    " does not match its shape");
  }
}

Image extract_channel(const Image& img, int c) {
  Image out(img.height(), img.width(), 1);
  const int ch = img.channels();
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < out.size(); ++i) dst[i] = src[i * ch + c];
  return out;
}

void insert_channel(Image& img, const Image& plane, int c) {
  const int ch = img.channels();
  const auto src = plane.data();
  auto dst = img.data();
  for (std::size_t i = 0; i < plane.size(); ++i) dst[i * ch + c] = src[i];
}

Image to_grayscale(const Image& img) {
  require_rgb(img, "to_grayscale");
  Image out(img.height(), img.width(), 1);
  const auto& k = kernels::active();
  const std::size_t w = static_cast<std::size_t>(img.width());
  parallel_for(0, static_cast<std::size_t>(img.height()), [&](std::size_t y) {
    k.luma(img.row(static_cast<int>(y)), out.row(static_cast<int>(y)), w);
  });
  return out;
}

Image to_lab(const Image& img) {
  require_rgb(img, "to_lab");
  // D65 reference white, sRGB primaries.
  constexpr double xn = 0.95047, yn = 1.0, zn = 1.08883;
  Image out(img.height(), img.width(), 3);
  const auto src = img.data();
  auto dst = out.data();
  for (std::size_t i = 0; i < img.pixel_count(); ++i) {
    const double r = srgb_to_linear(src[3 * i]);
    const double g = srgb_to_linear(src[3 * i + 1]);
    const double b = srgb_to_linear(src[3 * i + 2]);
    const double x = 0.4124564 * r + 0.3575761 * g + 0.1804375 * b;
    const double y = 0.2126729 * r + 0.7151522 * g + 0.0721750 * b;
    const double z = 0.0193339 * r + 0.1191920 * g + 0.9503041 * b;
    const double fx = lab_f(x / xn), fy = lab_f(y / yn), fz = lab_f(z / zn);
    dst[3 * i] = static_cast<float>(116.0 * fy - 16.0);
    dst[3 * i + 1] = static_cast<float>(500.0 * (fx - fy));
    dst[3 * i + 2] = static_cast<float>(200.0 * (fy - fz));
  }
  return out;
}

Image crop(const Image& img, const Rect& r) {
  if (r.x < 0 || r.y < 0 || r.w < 0 || r.h < 0 || r.x + r.w > img.width() ||
      r.y + r.h > img.height()) {
    throw Error(ErrorCode::kInvalidArgument, "crop rectangle outside the image");
  }
  const int ch = img.channels();
  Image out(r.h, r.w, ch);
  for (int y = 0; y < r.h; ++y) {
    const float* src = img.row(r.y + y) + static_cast<std::size_t>(r.x) * ch;
    std::copy(src, src + static_cast<std::size_t>(r.w) * ch, out.row(y));
  }
  return out;
}

Image resize_bilinear(const Image& img, int height, int width) {
  if (height < 1 || width < 1 || img.empty()) {
    throw Error(ErrorCode::kInvalidArgument, "resize to an empty image");
  }
  if (height == img.height() && width == img.width()) return img;
  const int ch = img.channels();
  const double sy = static_cast<double>(img.height()) / height;
  const double sx = static_cast<double>(img.width()) / width;

  struct Tap {
    int i0, i1;
    double t;
  };
  auto taps = [](int n_out, int n_in, double scale) {
    std::vector<Tap> out(static_cast<std::size_t>(n_out));
    for (int i = 0; i < n_out; ++i) {
      double s = (i + 0.5) * scale - 0.5;
      s = std::clamp(s, 0.0, static_cast<double>(n_in - 1));
      const int i0 = static_cast<int>(std::floor(s));
      const int i1 = std::min(i0 + 1, n_in - 1);
      out[static_cast<std::size_t>(i)] = {i0, i1, s - i0};
    }
    return out;
  };
  const auto ty = taps(height, img.height(), sy);
  const auto tx = taps(width, img.width(), sx);

  Image out(height, width, ch);
  parallel_for(0, static_cast<std::size_t>(height), [&](std::size_t yy) {
    const Tap& vy = ty[yy];
    const float* r0 = img.row(vy.i0);
    const float* r1 = img.row(vy.i1);
    float* dst = out.row(static_cast<int>(yy));
    for (int x = 0; x < width; ++x) {
      const Tap& vx = tx[static_cast<std::size_t>(x)];
      for (int c = 0; c < ch; ++c) {
        const double p00 = r0[vx.i0 * ch + c], p01 = r0[vx.i1 * ch + c];
        const double p10 = r1[vx.i0 * ch + c], p11 = r1[vx.i1 * ch + c];
        const double top = p00 + (p01 - p00) * vx.t;
        const double bot = p10 + (p11 - p10) * vx.t;
        dst[x * ch + c] = static_cast<float>(top + (bot - top) * vy.t);
      }
    }
  });
  return out;
}

Image resize_crop_256(const Image& img) {
  constexpr int kSide = 256;
  if (img.height() < 1 || img.width() < 1) {
    throw Error(ErrorCode::kInvalidArgument, "resize_crop_256 of an empty image");
  }
  const int shorter = std::min(img.height(), img.width());
  const auto scaled_extent = [&](int n) {
    return std::max(kSide, static_cast<int>(std::lround(
                               static_cast<double>(n) * kSide / shorter)));
  };
  const int h = img.height() == shorter ? kSide : scaled_extent(img.height());
  const int w = img.width() == shorter ? kSide : scaled_extent(img.width());
  const Image scaled = resize_bilinear(img, h, w);
  return crop(scaled, Rect{(w - kSide) / 2, (h - kSide) / 2, kSide, kSide});
}

double total_variation(const Image& img) {
  const int ch = img.channels();
  double tv = 0.0;
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      for (int c = 0; c < ch; ++c) {
        const double v = img.at(y, x, c);
        if (x + 1 < img.width()) tv += std::abs(img.at(y, x + 1, c) - v);
        if (y + 1 < img.height()) tv += std::abs(img.at(y + 1, x, c) - v);
      }
    }
  }
  return tv;
}

double mean_abs_diff(const Image& a, const Image& b) {
  if (!a.same_shape(b)) {
    throw Error(ErrorCode::kDimensionMismatch, "mean_abs_diff of differently shaped images");
  }
  if (a.empty()) return 0.0;
  double sum = 0.0;
  const auto da = a.data(), db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i) {
    sum += std::abs(static_cast<double>(da[i]) - db[i]);
  }
  return sum / static_cast<double>(da.size());
}

}  // namespace cartoonkit
