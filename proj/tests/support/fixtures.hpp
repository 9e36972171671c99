#pragma once

// Deterministic synthetic test images. No binary fixtures are checked in;
// every image is a pure function of its seed (CounterRng, so the same on
// every standard library).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "cartoonkit/image.hpp"
#include "cartoonkit/rng.hpp"

namespace fixtures {

using cartoonkit::Image;

inline Image constant(int h, int w, int ch, float v) { return Image(h, w, ch, v); }

inline Image noise(int h, int w, int ch, std::uint64_t seed) {
  cartoonkit::CounterRng rng(seed, 1);
  Image img(h, w, ch);
  for (float& v : img.data()) v = static_cast<float>(rng.uniform());
  return img;
}

// Left half black, right half white.
inline Image two_halves(int h, int w) {
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = w / 2; x < w; ++x)
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = 1.0f;
  return img;
}

// Photo-like content: smooth gradient background, a handful of flat and
// textured ellipses, mild sensor noise.
inline Image photo(int h, int w, std::uint64_t seed) {
  cartoonkit::CounterRng rng(seed, 2);
  const double c0[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
  const double c1[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
  Image img(h, w, 3);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      const double t = (0.6 * x / w + 0.4 * y / h);
      for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(c0[c] * (1 - t) + c1[c] * t);
    }
  const int shapes = 4 + static_cast<int>(rng.uniform() * 4);
  for (int s = 0; s < shapes; ++s) {
    const double cx = rng.uniform() * w, cy = rng.uniform() * h;
    const double rx = (0.08 + 0.25 * rng.uniform()) * w, ry = (0.08 + 0.25 * rng.uniform()) * h;
    const double col[3] = {rng.uniform(), rng.uniform(), rng.uniform()};
    const double stripes = rng.uniform() < 0.5 ? 0.0 : 0.3 * rng.uniform();
    const double freq = 0.2 + 0.8 * rng.uniform();
    for (int y = 0; y < h; ++y)
      for (int x = 0; x < w; ++x) {
        const double dx = (x - cx) / rx, dy = (y - cy) / ry;
        if (dx * dx + dy * dy > 1.0) continue;
        const double tex = stripes * std::sin(freq * (x + 0.5 * y));
        for (int c = 0; c < 3; ++c) img.at(y, x, c) = static_cast<float>(col[c] + tex);
      }
  }
  for (float& v : img.data()) {
    v = static_cast<float>(std::clamp(v + 0.02 * rng.normal(), 0.0, 1.0));
  }
  return img;
}

inline std::vector<Image> corpus(int count, int h = 64, int w = 64) {
  std::vector<Image> out;
  for (int i = 0; i < count; ++i) out.push_back(photo(h, w, 100 + static_cast<std::uint64_t>(i)));
  return out;
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / ("cartoonkit_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace fixtures
