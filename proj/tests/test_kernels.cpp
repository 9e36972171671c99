#include <cstring>
#include <random>
#include <vector>

#include "doctest.h"

#include "cartoonkit/kernels.hpp"
#include "cartoonkit/structure.hpp"
#include "cartoonkit/surface.hpp"
#include "cartoonkit/texture.hpp"
#include "fixtures.hpp"

using namespace cartoonkit;
namespace k = cartoonkit::kernels;

namespace {

template <class T>
std::vector<T> random_vec(std::size_t n, std::uint64_t seed, double lo = 0.0, double hi = 1.0) {
  std::mt19937_64 gen(seed);
  std::uniform_real_distribution<double> u(lo, hi);
  std::vector<T> v(n);
  for (auto& x : v) x = static_cast<T>(u(gen));
  return v;
}

template <class T>
bool bitwise_equal(const std::vector<T>& a, const std::vector<T>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(T)) == 0;
}

// RAII switch of the active table.
struct UseIsa {
  explicit UseIsa(k::Isa isa) : ok(k::select(isa)) {}
  ~UseIsa() { k::select(k::cpu_supports_avx2() ? k::Isa::kAvx2 : k::Isa::kScalar); }
  bool ok;
};

const std::size_t kLengths[] = {0, 1, 3, 4, 7, 8, 9, 15, 16, 17, 31, 100, 1023};

}  // namespace

TEST_CASE("scalar table is always available") {
  CHECK(k::scalar_table().isa == k::Isa::kScalar);
  CHECK(k::select(k::Isa::kScalar));
  CHECK(k::active().isa == k::Isa::kScalar);
  k::select(k::cpu_supports_avx2() ? k::Isa::kAvx2 : k::Isa::kScalar);
}

TEST_CASE("avx2 kernels are bit-identical to scalar") {
  const k::KernelTable* v = k::avx2_table();
  if (v == nullptr || !k::cpu_supports_avx2()) {
    MESSAGE("AVX2 variant not available on this build/host; skipping");
    return;
  }
  const k::KernelTable& s = k::scalar_table();
  for (std::size_t n : kLengths) {
    CAPTURE(n);
    const auto rgb = random_vec<float>(3 * n, 1 + n);
    {
      std::vector<float> ys(n), yv(n);
      s.luma(rgb.data(), ys.data(), n);
      v->luma(rgb.data(), yv.data(), n);
      CHECK(bitwise_equal(ys, yv));
    }
    {
      std::vector<float> os(n), ov(n);
      s.color_shift(rgb.data(), os.data(), n, 0.8, -0.3, 0.7, 0.11);
      v->color_shift(rgb.data(), ov.data(), n, 0.8, -0.3, 0.7, 0.11);
      CHECK(bitwise_equal(os, ov));
    }
    {
      auto acc_s = random_vec<double>(n, 2 + n, -10, 10);
      auto acc_v = acc_s;
      const auto add = random_vec<double>(n, 3 + n), sub = random_vec<double>(n, 4 + n);
      s.slide_window(acc_s.data(), add.data(), sub.data(), n);
      v->slide_window(acc_v.data(), add.data(), sub.data(), n);
      CHECK(bitwise_equal(acc_s, acc_v));
      s.slide_window(acc_s.data(), add.data(), nullptr, n);
      v->slide_window(acc_v.data(), add.data(), nullptr, n);
      CHECK(bitwise_equal(acc_s, acc_v));
    }
    {
      const auto acc = random_vec<double>(n, 5 + n, 0, 50);
      const auto count = random_vec<double>(n, 6 + n, 1, 11);
      std::vector<float> os(n), ov(n);
      s.normalize(os.data(), acc.data(), count.data(), 7.0, n);
      v->normalize(ov.data(), acc.data(), count.data(), 7.0, n);
      CHECK(bitwise_equal(os, ov));
    }
    {
      const auto mi = random_vec<float>(n, 7 + n), mp = random_vec<float>(n, 8 + n);
      const auto mii = random_vec<float>(n, 9 + n), mip = random_vec<float>(n, 10 + n);
      std::vector<float> as(n), bs(n), av(n), bv(n);
      s.guided_coeffs(mi.data(), mp.data(), mii.data(), mip.data(), 0.02f, as.data(), bs.data(), n);
      v->guided_coeffs(mi.data(), mp.data(), mii.data(), mip.data(), 0.02f, av.data(), bv.data(), n);
      CHECK(bitwise_equal(as, av));
      CHECK(bitwise_equal(bs, bv));
      const auto g = random_vec<float>(n, 11 + n);
      std::vector<float> qs(n), qv(n);
      s.guided_apply(as.data(), bs.data(), g.data(), qs.data(), n);
      v->guided_apply(as.data(), bs.data(), g.data(), qv.data(), n);
      CHECK(bitwise_equal(qs, qv));
      std::vector<float> ms(n), mv(n);
      s.multiply(mi.data(), mp.data(), ms.data(), n);
      v->multiply(mi.data(), mp.data(), mv.data(), n);
      CHECK(bitwise_equal(ms, mv));
    }
  }
}

TEST_CASE("whole extractors agree across kernel variants") {
  if (k::avx2_table() == nullptr || !k::cpu_supports_avx2()) {
    MESSAGE("AVX2 variant not available; skipping");
    return;
  }
  const Image img = fixtures::photo(61, 77, 3);
  Image surf_s, surf_v, gray_s, gray_v;
  TextureMap tex_s, tex_v;
  {
    UseIsa use(k::Isa::kScalar);
    REQUIRE(use.ok);
    surf_s = extract_surface(img, GuidedFilterParams{4, 1e-2f});
    gray_s = to_grayscale(img);
    tex_s = extract_texture(img, 3);
  }
  {
    UseIsa use(k::Isa::kAvx2);
    REQUIRE(use.ok);
    surf_v = extract_surface(img, GuidedFilterParams{4, 1e-2f});
    gray_v = to_grayscale(img);
    tex_v = extract_texture(img, 3);
  }
  CHECK(surf_s == surf_v);
  CHECK(gray_s == gray_v);
  CHECK(tex_s.map == tex_v.map);
}
