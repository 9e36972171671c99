#pragma once

// Slow, independent reference implementations used only by tests. They share
// no code with the library beyond the Image container.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <set>
#include <tuple>
#include <utility>
#include <vector>

#include "cartoonkit/image.hpp"

namespace oracle {

using cartoonkit::Image;

// Direct summation over the truncated window.
inline std::vector<double> box_mean(const std::vector<double>& p, int h, int w, int r) {
  std::vector<double> out(p.size());
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double s = 0.0;
      int n = 0;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          s += p[static_cast<std::size_t>(yy) * w + xx];
          ++n;
        }
      out[static_cast<std::size_t>(y) * w + x] = s / n;
    }
  return out;
}

inline std::vector<double> plane(const Image& img, int c) {
  std::vector<double> out(img.pixel_count());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      out[static_cast<std::size_t>(y) * img.width() + x] = img.at(y, x, c);
  return out;
}

// Per-window least squares fit p ~ a*I + b, then averages of the
// coefficients of all windows covering each pixel.
inline std::vector<double> guided_filter_plane(const std::vector<double>& I,
                                               const std::vector<double>& p, int h, int w,
                                               int r, double eps) {
  const std::size_t n = I.size();
  std::vector<double> a(n), b(n);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double si = 0, sp = 0, sii = 0, sip = 0;
      int cnt = 0;
      for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
        for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) {
          const std::size_t j = static_cast<std::size_t>(yy) * w + xx;
          si += I[j];
          sp += p[j];
          sii += I[j] * I[j];
          sip += I[j] * p[j];
          ++cnt;
        }
      const double mi = si / cnt, mp = sp / cnt;
      const double var = sii / cnt - mi * mi, cov = sip / cnt - mi * mp;
      const std::size_t k = static_cast<std::size_t>(y) * w + x;
      a[k] = cov / (var + eps);
      b[k] = mp - a[k] * mi;
    }
  const auto ma = box_mean(a, h, w, r), mb = box_mean(b, h, w, r);
  std::vector<double> q(n);
  for (std::size_t i = 0; i < n; ++i) q[i] = ma[i] * I[i] + mb[i];
  return q;
}

// d q_i / d p_j for a fixed guide I (q is linear in p).
inline double guided_filter_derivative(const std::vector<double>& I, int h, int w, int r,
                                       double eps, int yi, int xi, int yj, int xj) {
  auto window = [&](int y, int x, auto&& fn) {
    for (int yy = std::max(0, y - r); yy <= std::min(h - 1, y + r); ++yy)
      for (int xx = std::max(0, x - r); xx <= std::min(w - 1, x + r); ++xx) fn(yy, xx);
  };
  double da_sum = 0.0, db_sum = 0.0;
  int covering = 0;
  window(yi, xi, [&](int ky, int kx) {
    ++covering;
    double si = 0, sii = 0;
    int cnt = 0;
    bool has_j = false;
    window(ky, kx, [&](int yy, int xx) {
      const double v = I[static_cast<std::size_t>(yy) * w + xx];
      si += v;
      sii += v * v;
      ++cnt;
      if (yy == yj && xx == xj) has_j = true;
    });
    if (!has_j) return;
    const double mi = si / cnt, var = sii / cnt - mi * mi;
    const double Ij = I[static_cast<std::size_t>(yj) * w + xj];
    const double da = (Ij - mi) / (cnt * (var + eps));
    da_sum += da;
    db_sum += 1.0 / cnt - da * mi;
  });
  const double Ii = I[static_cast<std::size_t>(yi) * w + xi];
  return (da_sum * Ii + db_sum) / covering;
}

// Bilinear sample with pixel-centre alignment and clamped taps, evaluated
// one output value at a time.
inline double bilinear_at(const Image& img, int out_h, int out_w, int y, int x, int c) {
  const double fy = std::clamp((y + 0.5) * img.height() / out_h - 0.5, 0.0, img.height() - 1.0);
  const double fx = std::clamp((x + 0.5) * img.width() / out_w - 0.5, 0.0, img.width() - 1.0);
  const int y0 = static_cast<int>(fy), x0 = static_cast<int>(fx);
  const int y1 = std::min(y0 + 1, img.height() - 1), x1 = std::min(x0 + 1, img.width() - 1);
  const double ty = fy - y0, tx = fx - x0;
  return (1 - ty) * ((1 - tx) * img.at(y0, x0, c) + tx * img.at(y0, x1, c)) +
         ty * ((1 - tx) * img.at(y1, x0, c) + tx * img.at(y1, x1, c));
}

// Textbook sRGB (D65) -> CIELAB.
inline std::array<double, 3> srgb_to_lab(double r, double g, double b) {
  auto lin = [](double v) { return v <= 0.04045 ? v / 12.92 : std::pow((v + 0.055) / 1.055, 2.4); };
  const double R = lin(r), G = lin(g), B = lin(b);
  const double X = 0.4124564 * R + 0.3575761 * G + 0.1804375 * B;
  const double Y = 0.2126729 * R + 0.7151522 * G + 0.0721750 * B;
  const double Z = 0.0193339 * R + 0.1191920 * G + 0.9503041 * B;
  auto f = [](double t) {
    const double d = 6.0 / 29.0;
    return t > d * d * d ? std::cbrt(t) : t / (3 * d * d) + 4.0 / 29.0;
  };
  const double fx = f(X / 0.95047), fy = f(Y / 1.0), fz = f(Z / 1.08883);
  return {116 * fy - 16, 500 * (fx - fy), 200 * (fy - fz)};
}

// Felzenszwalb-Huttenlocher on an unblurred image, written from the
// original description: sorted 8-neighbour edges, union-find with
// per-component thresholds, then the small-component sweep.
inline std::vector<int> felzenszwalb(const Image& img, double k, int min_size) {
  const int h = img.height(), w = img.width();
  struct E {
    double w;
    int a, b;
  };
  std::vector<E> edges;
  auto dist = [&](int y0, int x0, int y1, int x1) {
    double s = 0;
    for (int c = 0; c < 3; ++c) {
      const double d = (img.at(y0, x0, c) - img.at(y1, x1, c)) * 255.0;
      s += d * d;
    }
    return std::sqrt(s);
  };
  const int dy[4] = {0, 1, 1, -1}, dx[4] = {1, 0, 1, 1};
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x)
      for (int d = 0; d < 4; ++d) {
        const int y1 = y + dy[d], x1 = x + dx[d];
        if (y1 < 0 || y1 >= h || x1 >= w) continue;
        edges.push_back({dist(y, x, y1, x1), y * w + x, y1 * w + x1});
      }
  std::sort(edges.begin(), edges.end(), [](const E& l, const E& r) {
    return std::tie(l.w, l.a, l.b) < std::tie(r.w, r.a, r.b);
  });
  const int n = h * w;
  std::vector<int> parent(n), size(n, 1);
  std::vector<double> internal(n, 0.0);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](int v) {
    while (parent[v] != v) v = parent[v];
    return v;
  };
  for (const E& e : edges) {
    const int a = find(e.a), b = find(e.b);
    if (a == b) continue;
    if (e.w <= internal[a] + k / size[a] && e.w <= internal[b] + k / size[b]) {
      parent[b] = a;
      size[a] += size[b];
      internal[a] = e.w;
    }
  }
  for (const E& e : edges) {
    const int a = find(e.a), b = find(e.b);
    if (a != b && (size[a] < min_size || size[b] < min_size)) {
      parent[b] = a;
      size[a] += size[b];
    }
  }
  std::map<int, int> ids;
  std::vector<int> labels(n);
  for (int i = 0; i < n; ++i) {
    const int root = find(i);
    auto it = ids.find(root);
    if (it == ids.end()) it = ids.emplace(root, static_cast<int>(ids.size())).first;
    labels[i] = it->second;
  }
  return labels;
}

struct NaiveRegion {
  long size = 0;
  double mean[3] = {0, 0, 0};
  double var = 0;
  int x0 = 0, y0 = 0, x1 = 0, y1 = 0;  // inclusive
  double hist[24] = {};
};

// One full image pass per region.
inline NaiveRegion region(const std::vector<int>& labels, const Image& img, int id) {
  NaiveRegion r;
  r.x0 = img.width();
  r.y0 = img.height();
  r.x1 = r.y1 = -1;
  double sum[3] = {0, 0, 0};
  long counts[24] = {};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (labels[static_cast<std::size_t>(y) * img.width() + x] != id) continue;
      ++r.size;
      r.x0 = std::min(r.x0, x);
      r.y0 = std::min(r.y0, y);
      r.x1 = std::max(r.x1, x);
      r.y1 = std::max(r.y1, y);
      for (int c = 0; c < 3; ++c) {
        const float v = img.at(y, x, c);
        sum[c] += v;
        const int bin = std::clamp(static_cast<int>(std::floor(v * 8.0f)), 0, 7);
        ++counts[c * 8 + bin];
      }
    }
  for (int c = 0; c < 3; ++c) r.mean[c] = sum[c] / r.size;
  for (int i = 0; i < 24; ++i) r.hist[i] = static_cast<double>(counts[i]) / r.size;
  double sq[3] = {0, 0, 0};
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (labels[static_cast<std::size_t>(y) * img.width() + x] != id) continue;
      for (int c = 0; c < 3; ++c) {
        const double d = img.at(y, x, c) - r.mean[c];
        sq[c] += d * d;
      }
    }
  r.var = (sq[0] / r.size + sq[1] / r.size + sq[2] / r.size) / 3.0;
  return r;
}

inline double similarity(const NaiveRegion& a, const NaiveRegion& b, long area) {
  double inter = 0;
  for (int i = 0; i < 24; ++i) inter += std::min(a.hist[i], b.hist[i]);
  const double size = static_cast<double>(a.size + b.size);
  const double bw = std::max(a.x1, b.x1) - std::min(a.x0, b.x0) + 1;
  const double bh = std::max(a.y1, b.y1) - std::min(a.y0, b.y0) + 1;
  return 0.6 * inter / 3.0 + 0.2 * (1.0 - size / area) + 0.2 * size / (bw * bh);
}

// Greedy merge that recomputes every region from pixels and scans every
// adjacent pair at each step. Returns the (kept, absorbed) sequence.
inline std::vector<std::pair<int, int>> merge_sequence(std::vector<int> labels, const Image& img,
                                                       int target) {
  const int h = img.height(), w = img.width();
  std::vector<std::pair<int, int>> steps;
  for (;;) {
    std::set<int> alive(labels.begin(), labels.end());
    if (static_cast<int>(alive.size()) <= target) break;
    std::set<std::pair<int, int>> adj;
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const int a = labels[static_cast<std::size_t>(y) * w + x];
        if (x + 1 < w) {
          const int b = labels[static_cast<std::size_t>(y) * w + x + 1];
          if (a != b) adj.insert({std::min(a, b), std::max(a, b)});
        }
        if (y + 1 < h) {
          const int b = labels[static_cast<std::size_t>(y + 1) * w + x];
          if (a != b) adj.insert({std::min(a, b), std::max(a, b)});
        }
      }
    if (adj.empty()) break;
    double best = -1e300;
    std::pair<int, int> pick{-1, -1};
    for (const auto& [a, b] : adj) {
      const double s = similarity(region(labels, img, a), region(labels, img, b), static_cast<long>(h) * w);
      if (s > best) {
        best = s;
        pick = {a, b};
      }
    }
    for (int& v : labels)
      if (v == pick.second) v = pick.first;
    steps.push_back(pick);
  }
  return steps;
}

// Cyclic Jacobi eigenvalue iteration for symmetric matrices (row-major).
inline void jacobi_eigen(std::vector<double> a, int n, std::vector<double>& values,
                         std::vector<double>& vectors) {
  vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i) vectors[static_cast<std::size_t>(i) * n + i] = 1.0;
  auto A = [&](int i, int j) -> double& { return a[static_cast<std::size_t>(i) * n + j]; };
  auto V = [&](int i, int j) -> double& { return vectors[static_cast<std::size_t>(i) * n + j]; };
  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) off += A(i, j) * A(i, j);
    if (off < 1e-30) break;
    for (int p = 0; p < n; ++p)
      for (int q = p + 1; q < n; ++q) {
        if (std::abs(A(p, q)) < 1e-300) continue;
        const double theta = (A(q, q) - A(p, p)) / (2 * A(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1));
        const double c = 1 / std::sqrt(t * t + 1), s = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = A(k, p), akq = A(k, q);
          A(k, p) = c * akp - s * akq;
          A(k, q) = s * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = A(p, k), aqk = A(q, k);
          A(p, k) = c * apk - s * aqk;
          A(q, k) = s * apk + c * aqk;
        }
        for (int k = 0; k < n; ++k) {
          const double vkp = V(k, p), vkq = V(k, q);
          V(k, p) = c * vkp - s * vkq;
          V(k, q) = s * vkp + c * vkq;
        }
      }
  }
  values.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) values[static_cast<std::size_t>(i)] = A(i, i);
}

inline std::vector<double> sqrt_psd(const std::vector<double>& m, int n) {
  std::vector<double> vals, vecs;
  jacobi_eigen(m, n, vals, vecs);
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int k = 0; k < n; ++k) {
    const double s = std::sqrt(std::max(0.0, vals[static_cast<std::size_t>(k)]));
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i) * n + j] +=
            s * vecs[static_cast<std::size_t>(i) * n + k] * vecs[static_cast<std::size_t>(j) * n + k];
  }
  return out;
}

inline std::vector<double> matmul(const std::vector<double>& a, const std::vector<double>& b, int n) {
  std::vector<double> out(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k < n; ++k)
      for (int j = 0; j < n; ++j)
        out[static_cast<std::size_t>(i) * n + j] +=
            a[static_cast<std::size_t>(i) * n + k] * b[static_cast<std::size_t>(k) * n + j];
  return out;
}

// Tr((A^1/2 B A^1/2)^1/2).
inline double cross_trace(const std::vector<double>& a, const std::vector<double>& b, int n) {
  const auto ra = sqrt_psd(a, n);
  const auto inner = matmul(matmul(ra, b, n), ra, n);
  std::vector<double> sym(inner.size());
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      sym[static_cast<std::size_t>(i) * n + j] =
          0.5 * (inner[static_cast<std::size_t>(i) * n + j] + inner[static_cast<std::size_t>(j) * n + i]);
  std::vector<double> vals, vecs;
  jacobi_eigen(sym, n, vals, vecs);
  double tr = 0;
  for (double v : vals) tr += std::sqrt(std::max(0.0, v));
  return tr;
}

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

}  // namespace oracle
