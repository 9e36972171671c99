#include "cartoonkit/structure.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>

#include "cartoonkit/error.hpp"
#include "cartoonkit/parallel.hpp"

namespace cartoonkit {
namespace {

void require_rgb(const Image& img, const char* op) {
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + " expects a 3-channel image");
  }
}

void require_match(const LabelMap& labels, const Image& img, const char* op) {
  if (labels.height() != img.height() || labels.width() != img.width()) {
    throw Error(ErrorCode::kDimensionMismatch,
                std::string(op) + ": label map and image sizes differ");
  }
}

class DisjointSet {
 public:
  explicit DisjointSet(std::size_t n) : parent_(n), rank_(n, 0), size_(n, 1) {
    std::iota(parent_.begin(), parent_.end(), 0u);
  }

  std::uint32_t find(std::uint32_t x) {
    std::uint32_t root = x;
    while (parent_[root] != root) root = parent_[root];
    while (parent_[x] != root) {
      const std::uint32_t next = parent_[x];
      parent_[x] = root;
      x = next;
    }
    return root;
  }

  // Returns the surviving root.
  std::uint32_t join(std::uint32_t a, std::uint32_t b) {
    if (rank_[a] < rank_[b]) std::swap(a, b);
    parent_[b] = a;
    size_[a] += size_[b];
    if (rank_[a] == rank_[b]) ++rank_[a];
    return a;
  }

  std::uint32_t size(std::uint32_t root) const { return size_[root]; }

 private:
  std::vector<std::uint32_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::uint32_t> size_;
};

struct Edge {
  float w;
  std::uint32_t a;
  std::uint32_t b;
};

// Stable LSD radix sort on the weight. Weights are non-negative, so their
// IEEE bit patterns order like the values.
void radix_sort_by_weight(std::vector<Edge>& edges) {
  std::vector<Edge> buffer(edges.size());
  for (int shift = 0; shift < 32; shift += 8) {
    std::array<std::size_t, 257> offsets{};
    for (const Edge& e : edges) ++offsets[((std::bit_cast<std::uint32_t>(e.w) >> shift) & 0xff) + 1];
    if (offsets[1] == edges.size()) continue;  // every key shares this digit
    for (int i = 0; i < 256; ++i) offsets[i + 1] += offsets[i];
    for (const Edge& e : edges) buffer[offsets[(std::bit_cast<std::uint32_t>(e.w) >> shift) & 0xff]++] = e;
    edges.swap(buffer);
  }
}

}  // namespace

LabelMap::LabelMap(int height, int width, std::vector<std::int32_t> labels)
    : height_(height), width_(width), labels_(std::move(labels)) {
  if (height < 0 || width < 0 ||
      labels_.size() != static_cast<std::size_t>(height) * static_cast<std::size_t>(width)) {
    throw Error(ErrorCode::kDimensionMismatch, "label map size does not match its extent");
  }
  std::int32_t max_id = -1;
  for (std::int32_t v : labels_) {
    if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative region id");
    max_id = std::max(max_id, v);
  }
  std::vector<char> seen(static_cast<std::size_t>(max_id + 1), 0);
  for (std::int32_t v : labels_) seen[static_cast<std::size_t>(v)] = 1;
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw Error(ErrorCode::kInvalidArgument, "region ids are not contiguous");
  }
  count_ = max_id + 1;
}

LabelMap LabelMap::relabel(int height, int width, const std::vector<std::int32_t>& raw) {
  std::int32_t max_id = -1;
  for (std::int32_t v : raw) {
    if (v < 0) throw Error(ErrorCode::kInvalidArgument, "negative region id");
    max_id = std::max(max_id, v);
  }
  std::vector<std::int32_t> remap(static_cast<std::size_t>(max_id + 1), -1);
  std::vector<std::int32_t> out(raw.size());
  std::int32_t next = 0;
  for (std::size_t i = 0; i < raw.size(); ++i) {
    std::int32_t& id = remap[static_cast<std::size_t>(raw[i])];
    if (id < 0) id = next++;
    out[i] = id;
  }
  return LabelMap(height, width, std::move(out));
}

int hist_bin(float v) noexcept {
  const int bin = static_cast<int>(std::floor(v * kHistBins));
  return std::clamp(bin, 0, kHistBins - 1);
}

RegionStats region_stats(const LabelMap& labels, const Image& img) {
  require_rgb(img, "region_stats");
  require_match(labels, img, "region_stats");
  const std::size_t R = static_cast<std::size_t>(labels.region_count());
  RegionStats stats(R);
  std::vector<std::array<double, 3>> sums(R, {0.0, 0.0, 0.0});
  std::vector<std::array<int, 4>> box(
      R, {std::numeric_limits<int>::max(), std::numeric_limits<int>::max(), -1, -1});
  std::vector<std::array<std::int64_t, 3 * kHistBins>> counts(R);
  for (auto& c : counts) c.fill(0);

  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto id = static_cast<std::size_t>(labels.at(y, x));
      Region& r = stats[id];
      ++r.size;
      for (int c = 0; c < 3; ++c) {
        const float v = img.at(y, x, c);
        sums[id][c] += v;
        ++counts[id][c * kHistBins + hist_bin(v)];
      }
      auto& b = box[id];
      b[0] = std::min(b[0], x);
      b[1] = std::min(b[1], y);
      b[2] = std::max(b[2], x);
      b[3] = std::max(b[3], y);
    }
  }
  for (std::size_t id = 0; id < R; ++id) {
    Region& r = stats[id];
    const double n = static_cast<double>(r.size);
    for (int c = 0; c < 3; ++c) r.mean_color[c] = sums[id][c] / n;
    for (int i = 0; i < 3 * kHistBins; ++i) r.hist[i] = counts[id][i] / n;
    const auto& b = box[id];
    r.bbox = Rect{b[0], b[1], b[2] - b[0] + 1, b[3] - b[1] + 1};
  }

  std::vector<std::array<double, 3>> sq(R, {0.0, 0.0, 0.0});
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto id = static_cast<std::size_t>(labels.at(y, x));
      for (int c = 0; c < 3; ++c) {
        const double d = img.at(y, x, c) - stats[id].mean_color[c];
        sq[id][c] += d * d;
      }
    }
  }
  for (std::size_t id = 0; id < R; ++id) {
    const double n = static_cast<double>(stats[id].size);
    stats[id].color_var = (sq[id][0] / n + sq[id][1] / n + sq[id][2] / n) / 3.0;
  }
  return stats;
}

void FelzParams::validate() const {
  if (!(k > 0.0)) throw Error(ErrorCode::kInvalidArgument, "felzenszwalb k must be > 0");
  if (min_size < 1) throw Error(ErrorCode::kInvalidArgument, "felzenszwalb min_size must be >= 1");
  if (!(sigma >= 0.0)) throw Error(ErrorCode::kInvalidArgument, "felzenszwalb sigma must be >= 0");
}

void SlicParams::validate() const {
  if (n_segments < 1) throw Error(ErrorCode::kInvalidArgument, "slic n_segments must be >= 1");
  if (!(compactness > 0.0)) throw Error(ErrorCode::kInvalidArgument, "slic compactness must be > 0");
  if (iters < 1) throw Error(ErrorCode::kInvalidArgument, "slic iters must be >= 1");
}

void AdaptiveColorParams::validate() const {
  if (!(sigma_lo >= 0.0 && sigma_lo < sigma_hi)) {
    throw Error(ErrorCode::kInvalidArgument, "adaptive color needs 0 <= sigma_lo < sigma_hi");
  }
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "adaptive color gamma must lie in (0,1]");
  }
}

void StructureParams::validate() const {
  felz.validate();
  slic.validate();
  color.validate();
  if (target_regions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "target_regions must be >= 1");
  }
}

Image gaussian_blur(const Image& img, double sigma) {
  if (sigma < 0.0) throw Error(ErrorCode::kInvalidArgument, "negative blur sigma");
  if (sigma == 0.0 || img.empty()) return img;
  const int radius = static_cast<int>(std::ceil(4.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (int i = -radius; i <= radius; ++i) {
    const double v = std::exp(-0.5 * i * i / (sigma * sigma));
    kernel[static_cast<std::size_t>(i + radius)] = v;
    total += v;
  }
  for (double& v : kernel) v /= total;

  const int h = img.height(), w = img.width(), ch = img.channels();
  const std::size_t row_len = static_cast<std::size_t>(w) * ch;
  Image tmp(h, w, ch), out(h, w, ch);
  parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
    const int y = static_cast<int>(yy);
    // Edge-clamped copy of the row so the tap loop needs no bounds checks.
    std::vector<float> padded(static_cast<std::size_t>(w + 2 * radius) * ch);
    const float* src = img.row(y);
    for (int x = -radius; x < w + radius; ++x) {
      const int xs = std::clamp(x, 0, w - 1);
      for (int c = 0; c < ch; ++c) {
        padded[static_cast<std::size_t>(x + radius) * ch + c] = src[static_cast<std::size_t>(xs) * ch + c];
      }
    }
    std::vector<double> acc(row_len, 0.0);
    for (int i = 0; i <= 2 * radius; ++i) {
      const double k = kernel[static_cast<std::size_t>(i)];
      const float* src_i = padded.data() + static_cast<std::size_t>(i) * ch;
      for (std::size_t j = 0; j < row_len; ++j) acc[j] += k * src_i[j];
    }
    float* dst = tmp.row(y);
    for (std::size_t j = 0; j < row_len; ++j) dst[j] = static_cast<float>(acc[j]);
  });
  parallel_for(0, static_cast<std::size_t>(h), [&](std::size_t yy) {
    const int y = static_cast<int>(yy);
    std::vector<double> acc(row_len, 0.0);
    for (int i = -radius; i <= radius; ++i) {
      const double k = kernel[static_cast<std::size_t>(i + radius)];
      const float* src = tmp.row(std::clamp(y + i, 0, h - 1));
      for (std::size_t j = 0; j < row_len; ++j) acc[j] += k * src[j];
    }
    float* dst = out.row(y);
    for (std::size_t j = 0; j < row_len; ++j) dst[j] = static_cast<float>(acc[j]);
  });
  return out;
}

LabelMap felzenszwalb_segment(const Image& img, const FelzParams& p) {
  require_rgb(img, "felzenszwalb_segment");
  p.validate();
  const int h = img.height(), w = img.width();
  const Image smooth = gaussian_blur(img, p.sigma);

  const std::size_t n = static_cast<std::size_t>(h) * w;
  std::vector<Edge> edges(n * 4);
  std::size_t count = 0;
  auto add = [&](const float* p0, const float* p1, std::uint32_t a, std::uint32_t b) {
    double s = 0.0;
    for (int c = 0; c < 3; ++c) {
      const double d = 255.0 * (static_cast<double>(p0[c]) - p1[c]);
      s += d * d;
    }
    edges[count++] = Edge{static_cast<float>(std::sqrt(s)), a, b};
  };
  // Emitted in increasing (a, b); a stable sort on w then gives the total
  // order (w, a, b).
  for (int y = 0; y < h; ++y) {
    const float* cur = smooth.row(y);
    const float* up = y > 0 ? smooth.row(y - 1) : nullptr;
    const float* down = y + 1 < h ? smooth.row(y + 1) : nullptr;
    const auto base = static_cast<std::uint32_t>(y) * static_cast<std::uint32_t>(w);
    for (int x = 0; x < w; ++x) {
      const std::uint32_t a = base + static_cast<std::uint32_t>(x);
      const float* p = cur + 3 * x;
      if (x + 1 < w && up) add(p, up + 3 * (x + 1), a, a - w + 1);
      if (x + 1 < w) add(p, p + 3, a, a + 1);
      if (down) add(p, down + 3 * x, a, a + w);
      if (x + 1 < w && down) add(p, down + 3 * (x + 1), a, a + w + 1);
    }
  }
  edges.resize(count);
  radix_sort_by_weight(edges);

  DisjointSet sets(n);
  std::vector<double> threshold(n, p.k);
  for (const Edge& e : edges) {
    std::uint32_t a = sets.find(e.a), b = sets.find(e.b);
    if (a == b) continue;
    if (e.w <= threshold[a] && e.w <= threshold[b]) {
      const std::uint32_t root = sets.join(a, b);
      threshold[root] = e.w + p.k / sets.size(root);
    }
  }
  for (const Edge& e : edges) {
    const std::uint32_t a = sets.find(e.a), b = sets.find(e.b);
    if (a != b && (sets.size(a) < static_cast<std::uint32_t>(p.min_size) ||
                   sets.size(b) < static_cast<std::uint32_t>(p.min_size))) {
      sets.join(a, b);
    }
  }

  std::vector<std::int32_t> raw(n);
  for (std::size_t i = 0; i < n; ++i) raw[i] = static_cast<std::int32_t>(sets.find(static_cast<std::uint32_t>(i)));
  return LabelMap::relabel(h, w, raw);
}

double region_similarity(const Region& a, const Region& b, std::int64_t image_area) {
  double inter = 0.0;
  for (int i = 0; i < 3 * kHistBins; ++i) inter += std::min(a.hist[i], b.hist[i]);
  const double size = static_cast<double>(a.size + b.size);
  const int x0 = std::min(a.bbox.x, b.bbox.x), y0 = std::min(a.bbox.y, b.bbox.y);
  const int x1 = std::max(a.bbox.x + a.bbox.w, b.bbox.x + b.bbox.w);
  const int y1 = std::max(a.bbox.y + a.bbox.h, b.bbox.y + b.bbox.h);
  const double fill = size / (static_cast<double>(x1 - x0) * (y1 - y0));
  return kSimColorWeight * (inter / 3.0) +
         kSimSizeWeight * (1.0 - size / static_cast<double>(image_area)) +
         kSimFillWeight * fill;
}

Region merge_region(const Region& a, const Region& b) {
  Region m;
  m.size = a.size + b.size;
  const double na = static_cast<double>(a.size), nb = static_cast<double>(b.size);
  const double n = static_cast<double>(m.size);
  double spread_a = 0.0, spread_b = 0.0;
  for (int c = 0; c < 3; ++c) {
    m.mean_color[c] = (na * a.mean_color[c] + nb * b.mean_color[c]) / n;
    const double da = a.mean_color[c] - m.mean_color[c];
    const double db = b.mean_color[c] - m.mean_color[c];
    spread_a += da * da / 3.0;
    spread_b += db * db / 3.0;
  }
  m.color_var = (na * (a.color_var + spread_a) + nb * (b.color_var + spread_b)) / n;
  for (int i = 0; i < 3 * kHistBins; ++i) m.hist[i] = (na * a.hist[i] + nb * b.hist[i]) / n;
  const int x0 = std::min(a.bbox.x, b.bbox.x), y0 = std::min(a.bbox.y, b.bbox.y);
  const int x1 = std::max(a.bbox.x + a.bbox.w, b.bbox.x + b.bbox.w);
  const int y1 = std::max(a.bbox.y + a.bbox.h, b.bbox.y + b.bbox.h);
  m.bbox = Rect{x0, y0, x1 - x0, y1 - y0};
  return m;
}

MergeResult merge_regions_selective(const LabelMap& labels, const Image& img,
                                    int target_regions) {
  if (target_regions < 1) {
    throw Error(ErrorCode::kInvalidArgument, "target_regions must be >= 1");
  }
  MergeResult result;
  const int R = labels.region_count();
  if (target_regions >= R) {
    result.labels = labels;
    result.target_reached = target_regions == R;
    return result;
  }

  RegionStats regions = region_stats(labels, img);
  const std::int64_t area = static_cast<std::int64_t>(labels.height()) * labels.width();

  std::vector<std::uint64_t> pairs;
  auto note = [&pairs](std::int32_t a, std::int32_t b) {
    if (a == b) return;
    if (a > b) std::swap(a, b);
    const std::uint64_t key = (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    if (pairs.empty() || pairs.back() != key) pairs.push_back(key);
  };
  for (int y = 0; y < labels.height(); ++y) {
    for (int x = 0; x < labels.width(); ++x) {
      const std::int32_t a = labels.at(y, x);
      if (x + 1 < labels.width()) note(a, labels.at(y, x + 1));
      if (y + 1 < labels.height()) note(a, labels.at(y + 1, x));
    }
  }
  std::sort(pairs.begin(), pairs.end());
  pairs.erase(std::unique(pairs.begin(), pairs.end()), pairs.end());
  std::vector<std::set<std::int32_t>> adjacent(static_cast<std::size_t>(R));
  for (std::uint64_t key : pairs) {
    const auto a = static_cast<std::int32_t>(key >> 32);
    const auto b = static_cast<std::int32_t>(key & 0xffffffffu);
    adjacent[a].insert(b);
    adjacent[b].insert(a);
  }

  // Highest similarity first, then the smallest (a, b).
  using Entry = std::tuple<double, std::int32_t, std::int32_t>;
  auto order = [](const Entry& l, const Entry& r) {
    if (std::get<0>(l) != std::get<0>(r)) return std::get<0>(l) > std::get<0>(r);
    return std::tie(std::get<1>(l), std::get<2>(l)) < std::tie(std::get<1>(r), std::get<2>(r));
  };
  std::set<Entry, decltype(order)> queue(order);
  std::map<std::pair<std::int32_t, std::int32_t>, double> pair_sim;
  auto push = [&](std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    const double s = region_similarity(regions[a], regions[b], area);
    pair_sim[{a, b}] = s;
    queue.emplace(s, a, b);
  };
  auto drop = [&](std::int32_t a, std::int32_t b) {
    if (a > b) std::swap(a, b);
    const auto it = pair_sim.find({a, b});
    if (it == pair_sim.end()) return;
    queue.erase(Entry{it->second, a, b});
    pair_sim.erase(it);
  };
  for (std::int32_t a = 0; a < R; ++a) {
    for (std::int32_t b : adjacent[a]) {
      if (a < b) push(a, b);
    }
  }

  std::vector<std::int32_t> parent(static_cast<std::size_t>(R));
  std::iota(parent.begin(), parent.end(), 0);
  int count = R;
  while (count > target_regions && !queue.empty()) {
    const auto [sim, a, b] = *queue.begin();
    for (std::int32_t nb : adjacent[a]) drop(a, nb);
    for (std::int32_t nb : adjacent[b]) drop(b, nb);
    regions[a] = merge_region(regions[a], regions[b]);
    parent[b] = a;
    std::set<std::int32_t> merged = adjacent[a];
    merged.insert(adjacent[b].begin(), adjacent[b].end());
    merged.erase(a);
    merged.erase(b);
    for (std::int32_t nb : adjacent[b]) adjacent[nb].erase(b);
    adjacent[b].clear();
    adjacent[a] = merged;
    for (std::int32_t nb : merged) {
      adjacent[nb].insert(a);
      push(a, nb);
    }
    result.steps.push_back({a, b});
    --count;
  }
  result.target_reached = count == target_regions;

  auto root = [&](std::int32_t v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };
  std::vector<std::int32_t> raw(labels.labels().size());
  for (std::size_t i = 0; i < raw.size(); ++i) raw[i] = root(labels.labels()[i]);
  result.labels = LabelMap::relabel(labels.height(), labels.width(), raw);
  return result;
}

double adaptive_theta(double sigma, const AdaptiveColorParams& p) noexcept {
  if (sigma < p.sigma_lo) return 1.0;
  if (sigma <= p.sigma_hi) return 0.5;
  return 0.0;
}

namespace {

Image fill_regions(const LabelMap& labels, const Image& img,
                   const std::vector<std::array<float, 3>>& fills) {
  Image out(img.height(), img.width(), 3);
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const auto& f = fills[static_cast<std::size_t>(labels.at(y, x))];
      for (int c = 0; c < 3; ++c) out.at(y, x, c) = f[c];
    }
  }
  return out;
}

}  // namespace

Image adaptive_color(const LabelMap& labels, const Image& img, const AdaptiveColorParams& p) {
  p.validate();
  const RegionStats stats = region_stats(labels, img);
  std::vector<std::array<float, 3>> fills(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    const double theta = adaptive_theta(std::sqrt(stats[i].color_var), p);
    for (int c = 0; c < 3; ++c) {
      const double mu = stats[i].mean_color[c];
      const double bright = std::pow(std::max(mu, 0.0), p.gamma);
      fills[i][c] = static_cast<float>(theta * mu + (1.0 - theta) * bright);
    }
  }
  return fill_regions(labels, img, fills);
}

Image mean_color(const LabelMap& labels, const Image& img) {
  const RegionStats stats = region_stats(labels, img);
  std::vector<std::array<float, 3>> fills(stats.size());
  for (std::size_t i = 0; i < stats.size(); ++i) {
    for (int c = 0; c < 3; ++c) fills[i][c] = static_cast<float>(stats[i].mean_color[c]);
  }
  return fill_regions(labels, img, fills);
}

std::string to_string(SuperpixelMethod m) {
  return m == SuperpixelMethod::kSlic ? "slic" : "felzenszwalb";
}

SuperpixelMethod parse_superpixel_method(const std::string& s) {
  if (s == "felzenszwalb") return SuperpixelMethod::kFelzenszwalb;
  if (s == "slic") return SuperpixelMethod::kSlic;
  throw Error(ErrorCode::kInvalidArgument,
              "unknown superpixel method '" + s + "' (felzenszwalb|slic)");
}

Image extract_structure(const Image& img, const StructureParams& p) {
  require_rgb(img, "extract_structure");
  p.validate();
  const LabelMap segments = p.method == SuperpixelMethod::kSlic
                                ? slic_superpixels(img, p.slic)
                                : felzenszwalb_segment(img, p.felz);
  const MergeResult merged = merge_regions_selective(segments, img, p.target_regions);
  return adaptive_color(merged.labels, img, p.color);
}

Image extract_structure(const Image& img, const FelzParams& fp, int target_regions) {
  StructureParams p;
  p.felz = fp;
  p.target_regions = target_regions;
  return extract_structure(img, p);
}

}  // namespace cartoonkit
