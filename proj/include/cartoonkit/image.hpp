#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace cartoonkit {

/// Axis-aligned pixel rectangle; x/y are the top-left offsets.
struct Rect {
  int x = 0;
  int y = 0;
  int w = 0;
  int h = 0;

  bool operator==(const Rect&) const = default;
};

/// H x W x C float raster, row-major with interleaved channels.
///
/// Nominal range is [0,1] for anything that came from or goes to a PNG.
/// Intermediate representations (texture maps in particular) may leave that
/// range; clamping happens only when saving.
class Image {
 public:
  Image() = default;
  Image(int height, int width, int channels, float fill = 0.0f);
  Image(int height, int width, int channels, std::vector<float> data);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  int channels() const noexcept { return channels_; }
  std::size_t pixel_count() const noexcept {
    return static_cast<std::size_t>(height_) * static_cast<std::size_t>(width_);
  }
  std::size_t size() const noexcept { return data_.size(); }
  bool empty() const noexcept { return data_.empty(); }

  float& at(int y, int x, int c = 0) noexcept { return data_[index(y, x, c)]; }
  float at(int y, int x, int c = 0) const noexcept { return data_[index(y, x, c)]; }

  std::span<float> data() noexcept { return data_; }
  std::span<const float> data() const noexcept { return data_; }
  float* row(int y) noexcept { return data_.data() + index(y, 0, 0); }
  const float* row(int y) const noexcept { return data_.data() + index(y, 0, 0); }

  bool same_shape(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_ &&
           channels_ == other.channels_;
  }
  bool same_extent(const Image& other) const noexcept {
    return height_ == other.height_ && width_ == other.width_;
  }

  bool operator==(const Image& other) const = default;

 private:
  std::size_t index(int y, int x, int c) const noexcept {
    return (static_cast<std::size_t>(y) * static_cast<std::size_t>(width_) +
            static_cast<std::size_t>(x)) *
               static_cast<std::size_t>(channels_) +
           static_cast<std::size_t>(c);
  }

  int height_ = 0;
  int width_ = 0;
  int channels_ = 0;
  std::vector<float> data_;
};

/// Single channel `c` of `img` as a 1-channel image.
Image extract_channel(const Image& img, int c);
/// Writes the 1-channel `plane` into channel `c` of `img`.
void insert_channel(Image& img, const Image& plane, int c);

/// BT.601 luma: Y = 0.299 R + 0.587 G + 0.114 B.
Image to_grayscale(const Image& img);

/// sRGB (D65) to CIELAB. L in [0,100]; a, b signed.
Image to_lab(const Image& img);

Image crop(const Image& img, const Rect& r);

/// Bilinear resampling with pixel-center alignment and edge-clamped taps.
Image resize_bilinear(const Image& img, int height, int width);

/// Scale the shorter side to 256 (bilinear) and keep the centered 256x256.
Image resize_crop_256(const Image& img);

/// Sum over all pixels of |dx| + |dy| (forward differences, all channels).
double total_variation(const Image& img);

/// Mean absolute elementwise difference; images must share a shape.
double mean_abs_diff(const Image& a, const Image& b);

}  // namespace cartoonkit
