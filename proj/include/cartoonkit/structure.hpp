#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "cartoonkit/image.hpp"

namespace cartoonkit {

/// Region id per pixel; ids are contiguous 0..count-1 and all present.
class LabelMap {
 public:
  LabelMap() = default;
  LabelMap(int height, int width, std::vector<std::int32_t> labels);

  int height() const noexcept { return height_; }
  int width() const noexcept { return width_; }
  std::int32_t region_count() const noexcept { return count_; }

  std::int32_t at(int y, int x) const noexcept {
    return labels_[static_cast<std::size_t>(y) * width_ + x];
  }
  const std::vector<std::int32_t>& labels() const noexcept { return labels_; }

  bool operator==(const LabelMap&) const = default;

  /// Renumbers arbitrary non-negative ids to 0..R-1 in raster order of first
  /// occurrence.
  static LabelMap relabel(int height, int width,
                          const std::vector<std::int32_t>& raw);

 private:
  int height_ = 0;
  int width_ = 0;
  std::int32_t count_ = 0;
  std::vector<std::int32_t> labels_;
};

inline constexpr int kHistBins = 8;

struct Region {
  std::int64_t size = 0;
  std::array<double, 3> mean_color{0.0, 0.0, 0.0};
  /// Mean of the per-channel variances (population).
  double color_var = 0.0;
  Rect bbox;
  /// channel-major, kHistBins per channel, each channel L1-normalized.
  std::array<double, 3 * kHistBins> hist{};
};

using RegionStats = std::vector<Region>;

RegionStats region_stats(const LabelMap& labels, const Image& img);
/// Histogram bin of a [0,1] value: floor(v * 8), clamped to [0, 7].
int hist_bin(float v) noexcept;

struct FelzParams {
  double k = 100.0;
  int min_size = 64;
  double sigma = 0.8;

  void validate() const;
};

struct SlicParams {
  int n_segments = 200;
  double compactness = 10.0;
  int iters = 10;

  void validate() const;
};

struct AdaptiveColorParams {
  double sigma_lo = 0.05;
  double sigma_hi = 0.2;
  double gamma = 0.7;

  void validate() const;
};

/// Separable Gaussian blur with edge clamping; sigma == 0 is the identity.
Image gaussian_blur(const Image& img, double sigma);

/// Graph-based segmentation on the 8-connected pixel grid. Edge weights are
/// Euclidean RGB distances on the 0..255 scale.
LabelMap felzenszwalb_segment(const Image& img, const FelzParams& p);

/// Per-sweep diagnostics of the SLIC iterations.
struct SlicTrace {
  /// Sum over pixels of D(pixel, center of its cluster) after each sweep.
  std::vector<double> energy;
  int initial_centers = 0;
  /// Final center positions (x, y) after the last sweep, one per initial
  /// seed, together with the seeds themselves.
  std::vector<std::array<double, 2>> seeds;
  std::vector<std::array<double, 2>> centers;
};

LabelMap slic_superpixels(const Image& img, const SlicParams& p,
                          SlicTrace* trace = nullptr);

/// The similarity used by the greedy merge, exposed for testing.
inline constexpr double kSimColorWeight = 0.6;
inline constexpr double kSimSizeWeight = 0.2;
inline constexpr double kSimFillWeight = 0.2;
double region_similarity(const Region& a, const Region& b,
                         std::int64_t image_area);
Region merge_region(const Region& a, const Region& b);

struct MergeResult {
  LabelMap labels;
  /// False when target exceeded the region count (labels returned as-is).
  bool target_reached = true;
  /// (kept, absorbed) region ids of each greedy step, in the id space where
  /// the kept id is the smaller one of the pair.
  std::vector<std::array<std::int32_t, 2>> steps;
};

MergeResult merge_regions_selective(const LabelMap& labels, const Image& img,
                                    int target_regions);

/// Per-region flat fill: theta * mu + (1 - theta) * mu^gamma with theta in
/// {1, 0.5, 0} gated by the region color std against sigma_lo/sigma_hi.
Image adaptive_color(const LabelMap& labels, const Image& img,
                     const AdaptiveColorParams& p);
/// Plain per-region mean fill.
Image mean_color(const LabelMap& labels, const Image& img);
double adaptive_theta(double sigma, const AdaptiveColorParams& p) noexcept;

enum class SuperpixelMethod { kFelzenszwalb, kSlic };

std::string to_string(SuperpixelMethod m);
SuperpixelMethod parse_superpixel_method(const std::string& s);

struct StructureParams {
  SuperpixelMethod method = SuperpixelMethod::kFelzenszwalb;
  FelzParams felz;
  SlicParams slic;
  int target_regions = 50;
  AdaptiveColorParams color;

  void validate() const;
};

/// Segmentation -> selective merge -> adaptive coloring.
Image extract_structure(const Image& img, const StructureParams& p);
Image extract_structure(const Image& img, const FelzParams& fp,
                        int target_regions);

}  // namespace cartoonkit
