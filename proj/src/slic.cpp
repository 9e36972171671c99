#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "cartoonkit/error.hpp"
#include "cartoonkit/structure.hpp"

namespace cartoonkit {
namespace {

struct Center {
  std::array<double, 3> lab;
  double x;
  double y;
};

double lab_distance(const Image& lab, int y, int x, const Center& c) {
  const double dl = lab.at(y, x, 0) - c.lab[0];
  const double da = lab.at(y, x, 1) - c.lab[1];
  const double db = lab.at(y, x, 2) - c.lab[2];
  return std::sqrt(dl * dl + da * da + db * db);
}

double xy_distance(int y, int x, const Center& c) {
  return std::hypot(x - c.x, y - c.y);
}

double gradient_at(const Image& lab, int y, int x) {
  const int h = lab.height(), w = lab.width();
  const int xl = std::max(x - 1, 0), xr = std::min(x + 1, w - 1);
  const int yu = std::max(y - 1, 0), yd = std::min(y + 1, h - 1);
  double g = 0.0;
  for (int c = 0; c < 3; ++c) {
    const double dx = lab.at(y, xr, c) - lab.at(y, xl, c);
    const double dy = lab.at(yd, x, c) - lab.at(yu, x, c);
    g += dx * dx + dy * dy;
  }
  return g;
}

// Keeps, for every label, its largest 4-connected component and hands every
// other fragment to the largest adjacent surviving component, repeating until
// no fragment is left.
std::vector<std::int32_t> enforce_connectivity(int h, int w,
                                               const std::vector<std::int32_t>& labels) {
  const std::size_t n = labels.size();
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::int32_t> comp_label;
  std::vector<std::int64_t> comp_size;
  std::deque<std::size_t> frontier;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(comp_label.size());
    comp_label.push_back(labels[start]);
    comp_size.push_back(0);
    comp[start] = id;
    frontier.push_back(start);
    while (!frontier.empty()) {
      const std::size_t p = frontier.front();
      frontier.pop_front();
      ++comp_size[static_cast<std::size_t>(id)];
      const int y = static_cast<int>(p / w), x = static_cast<int>(p % w);
      const std::array<std::array<int, 2>, 4> nbrs{{{y - 1, x}, {y + 1, x}, {y, x - 1}, {y, x + 1}}};
      for (const auto& [ny, nx] : nbrs) {
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        const std::size_t q = static_cast<std::size_t>(ny) * w + nx;
        if (comp[q] < 0 && labels[q] == labels[start]) {
          comp[q] = id;
          frontier.push_back(q);
        }
      }
    }
  }

  const std::size_t C = comp_label.size();
  std::int32_t max_label = 0;
  for (auto l : comp_label) max_label = std::max(max_label, l);
  std::vector<std::int32_t> best(static_cast<std::size_t>(max_label + 1), -1);
  for (std::size_t c = 0; c < C; ++c) {
    auto& b = best[static_cast<std::size_t>(comp_label[c])];
    if (b < 0 || comp_size[c] > comp_size[static_cast<std::size_t>(b)]) {
      b = static_cast<std::int32_t>(c);
    }
  }
  std::vector<char> kept(C, 0);
  for (auto b : best) {
    if (b >= 0) kept[static_cast<std::size_t>(b)] = 1;
  }

  // Union-find over components so absorbed fragments resolve to their host.
  std::vector<std::int32_t> host(C);
  for (std::size_t c = 0; c < C; ++c) host[c] = static_cast<std::int32_t>(c);
  auto resolve = [&](std::int32_t c) {
    while (host[static_cast<std::size_t>(c)] != c) c = host[static_cast<std::size_t>(c)];
    return c;
  };

  std::vector<std::vector<std::int32_t>> touching(C);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const std::size_t p = static_cast<std::size_t>(y) * w + x;
      if (x + 1 < w && comp[p] != comp[p + 1]) {
        touching[comp[p]].push_back(comp[p + 1]);
        touching[comp[p + 1]].push_back(comp[p]);
      }
      if (y + 1 < h && comp[p] != comp[p + w]) {
        touching[comp[p]].push_back(comp[p + w]);
        touching[comp[p + w]].push_back(comp[p]);
      }
    }
  }

  bool pending = true;
  while (pending) {
    pending = false;
    bool progressed = false;
    for (std::size_t c = 0; c < C; ++c) {
      if (kept[c] || host[c] != static_cast<std::int32_t>(c)) continue;
      std::int32_t target = -1;
      for (std::int32_t t : touching[c]) {
        const std::int32_t r = resolve(t);
        if (!kept[static_cast<std::size_t>(r)] || r == static_cast<std::int32_t>(c)) continue;
        if (target < 0 || comp_size[static_cast<std::size_t>(r)] > comp_size[static_cast<std::size_t>(target)] ||
            (comp_size[static_cast<std::size_t>(r)] == comp_size[static_cast<std::size_t>(target)] && r < target)) {
          target = r;
        }
      }
      if (target < 0) {
        pending = true;
        continue;
      }
      host[c] = target;
      comp_size[static_cast<std::size_t>(target)] += comp_size[c];
      progressed = true;
    }
    if (pending && !progressed) break;  // unreachable on a connected grid
  }

  std::vector<std::int32_t> out(n);
  for (std::size_t p = 0; p < n; ++p) {
    out[p] = comp_label[static_cast<std::size_t>(resolve(comp[p]))];
  }
  return out;
}

}  // namespace

LabelMap slic_superpixels(const Image& img, const SlicParams& p, SlicTrace* trace) {
  if (img.channels() != 3) {
    throw Error(ErrorCode::kDimensionMismatch, "slic_superpixels expects a 3-channel image");
  }
  p.validate();
  const int h = img.height(), w = img.width();
  const std::int64_t area = static_cast<std::int64_t>(h) * w;
  if (p.n_segments > area) {
    throw Error(ErrorCode::kInvalidArgument,
                "n_segments " + std::to_string(p.n_segments) + " exceeds the pixel count");
  }
  const Image lab = to_lab(img);
  const double step = std::sqrt(static_cast<double>(area) / p.n_segments);
  int ny = std::max(1, static_cast<int>(std::floor(h / step)));
  int nx = std::max(1, static_cast<int>(std::floor(w / step)));
  ny = std::min(ny, p.n_segments);
  nx = std::min(nx, p.n_segments / ny);

  std::vector<Center> centers;
  std::vector<std::array<double, 2>> seeds;
  for (int j = 0; j < ny; ++j) {
    for (int i = 0; i < nx; ++i) {
      const int gx = std::min(w - 1, static_cast<int>((i + 0.5) * w / nx));
      const int gy = std::min(h - 1, static_cast<int>((j + 0.5) * h / ny));
      int bx = gx, by = gy;
      double best = std::numeric_limits<double>::infinity();
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          const int x = gx + dx, y = gy + dy;
          if (x < 0 || x >= w || y < 0 || y >= h) continue;
          const double g = gradient_at(lab, y, x);
          if (g < best) {
            best = g;
            bx = x;
            by = y;
          }
        }
      }
      centers.push_back({{lab.at(by, bx, 0), lab.at(by, bx, 1), lab.at(by, bx, 2)},
                         static_cast<double>(bx), static_cast<double>(by)});
      seeds.push_back({static_cast<double>(bx), static_cast<double>(by)});
    }
  }

  const double spatial_weight = p.compactness / step;
  const int window = static_cast<int>(std::ceil(step));
  auto distance = [&](int y, int x, const Center& c) {
    return lab_distance(lab, y, x, c) + spatial_weight * xy_distance(y, x, c);
  };

  const std::size_t n = static_cast<std::size_t>(area);
  std::vector<std::int32_t> labels(n, -1);
  std::vector<double> dist(n);
  if (trace != nullptr) {
    trace->energy.clear();
    trace->initial_centers = static_cast<int>(centers.size());
  }

  for (int iter = 0; iter < p.iters; ++iter) {
    // A pixel keeps its current center unless a windowed center is strictly
    // closer, so a sweep never raises the energy.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        dist[i] = labels[i] >= 0 ? distance(y, x, centers[static_cast<std::size_t>(labels[i])])
                                 : std::numeric_limits<double>::infinity();
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& c = centers[k];
      const int cx = static_cast<int>(std::lround(c.x)), cy = static_cast<int>(std::lround(c.y));
      const int x0 = std::max(0, cx - window), x1 = std::min(w - 1, cx + window);
      const int y0 = std::max(0, cy - window), y1 = std::min(h - 1, cy + window);
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const std::size_t i = static_cast<std::size_t>(y) * w + x;
          const double d = distance(y, x, c);
          if (d < dist[i]) {
            dist[i] = d;
            labels[i] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    // Pixels outside every window (only possible for extreme aspect
    // ratios) join the nearest center outright.
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const std::size_t i = static_cast<std::size_t>(y) * w + x;
        if (labels[i] >= 0) continue;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < centers.size(); ++k) {
          const double d = distance(y, x, centers[k]);
          if (d < best) {
            best = d;
            labels[i] = static_cast<std::int32_t>(k);
          }
        }
      }
    }

    std::vector<std::array<double, 5>> sums(centers.size(), {0, 0, 0, 0, 0});
    std::vector<std::int64_t> counts(centers.size(), 0);
    for (int y = 0; y < h; ++y) {
      for (int x = 0; x < w; ++x) {
        const auto k = static_cast<std::size_t>(labels[static_cast<std::size_t>(y) * w + x]);
        for (int c = 0; c < 3; ++c) sums[k][c] += lab.at(y, x, c);
        sums[k][3] += x;
        sums[k][4] += y;
        ++counts[k];
      }
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double m = static_cast<double>(counts[k]);
      centers[k] = {{sums[k][0] / m, sums[k][1] / m, sums[k][2] / m}, sums[k][3] / m, sums[k][4] / m};
    }

    if (trace != nullptr) {
      double energy = 0.0;
      for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
          energy += distance(y, x, centers[static_cast<std::size_t>(labels[static_cast<std::size_t>(y) * w + x])]);
        }
      }
      trace->energy.push_back(energy);
    }
  }

  if (trace != nullptr) {
    trace->seeds = seeds;
    trace->centers.clear();
    for (const Center& c : centers) trace->centers.push_back({c.x, c.y});
  }
  return LabelMap::relabel(h, w, enforce_connectivity(h, w, labels));
}

}  // namespace cartoonkit
