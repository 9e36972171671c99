#include <cmath>
#include <filesystem>

#include "doctest.h"

#include "cartoonkit/error.hpp"
#include "cartoonkit/image.hpp"
#include "cartoonkit/image_io.hpp"
#include "fixtures.hpp"
#include "oracles.hpp"

using namespace cartoonkit;
namespace fs = std::filesystem;

TEST_CASE("image shape invariants") {
  Image img(2, 3, 3, 0.25f);
  CHECK(img.size() == 18);
  CHECK(img.pixel_count() == 6);
  CHECK_THROWS_AS(Image(2, 2, 2), Error);
  CHECK_THROWS_AS(Image(2, 2, 3, std::vector<float>(5)), Error);
}

TEST_CASE("png load maps bytes by v/255") {
  const auto dir = fixtures::scratch_dir("png_load");
  Image red(1, 1, 3);
  red.at(0, 0, 0) = 1.0f;
  save_png(red, dir / "red.png");
  const Image r = load_png(dir / "red.png");
  CHECK(r.channels() == 3);
  CHECK(r.at(0, 0, 0) == 1.0f);
  CHECK(r.at(0, 0, 1) == 0.0f);
  CHECK(r.at(0, 0, 2) == 0.0f);

  save_png(Image(2, 2, 1, 128.0f / 255.0f), dir / "gray.png");
  const Image g = load_png(dir / "gray.png");
  CHECK(g.channels() == 1);
  for (float v : g.data()) CHECK(v == doctest::Approx(0.50196).epsilon(1e-4));
}

TEST_CASE("png errors are distinct") {
  const auto dir = fixtures::scratch_dir("png_err");
  try {
    (void)load_png(dir / "missing.png");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kFileNotFound);
  }
  write_file_bytes(dir / "bad.png", {'n', 'o', 'p', 'e'});
  try {
    (void)load_png(dir / "bad.png");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kDecodeError);
  }
  // valid signature, truncated body
  write_file_bytes(dir / "trunc.png", {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n', 0, 0});
  CHECK_THROWS_AS((void)load_png(dir / "trunc.png"), Error);
  CHECK_THROWS_AS(save_png(Image(1, 1, 3), dir / "no_such_dir" / "x.png"), Error);
}

TEST_CASE("png round trip within half a quantum, clamped") {
  const auto dir = fixtures::scratch_dir("png_rt");
  Image img = fixtures::noise(17, 23, 3, 5);
  save_png(img, dir / "n.png");
  const Image back = load_png(dir / "n.png");
  REQUIRE(back.same_shape(img));
  for (std::size_t i = 0; i < img.size(); ++i) {
    CHECK(std::abs(back.data()[i] - img.data()[i]) <= 1.0f / 510.0f + 1e-7f);
  }
  save_png(Image(2, 2, 3, 0.5f), dir / "half.png");
  for (const Image out = load_png(dir / "half.png"); float v : out.data()) CHECK(std::abs(v - 0.5f) <= 1.0f / 510.0f + 1e-7f);

  Image out_of_range(1, 2, 1);
  out_of_range.at(0, 0) = 1.7f;
  out_of_range.at(0, 1) = -0.2f;
  save_png(out_of_range, dir / "clamp.png");
  const Image c = load_png(dir / "clamp.png");
  CHECK(c.at(0, 0) == 1.0f);
  CHECK(c.at(0, 1) == 0.0f);
}

TEST_CASE("ckf round trip is exact") {
  const auto dir = fixtures::scratch_dir("ckf");
  Image img = fixtures::noise(5, 7, 3, 9);
  img.at(0, 0, 0) = -2.5f;
  img.at(4, 6, 2) = 3.75f;
  save_ckf(img, dir / "a.ckf");
  CHECK(load_ckf(dir / "a.ckf") == img);
  const auto bytes = read_file_bytes(dir / "a.ckf");
  REQUIRE(bytes.size() == 16 + img.size() * 4);
  CHECK(bytes[0] == 'C');
  CHECK(bytes[3] == '1');
  CHECK(bytes[4] == 5);  // little-endian height
  CHECK(bytes[8] == 7);
  CHECK(bytes[12] == 3);
  write_file_bytes(dir / "bad.ckf", {'C', 'K', 'F', '2'});
  CHECK_THROWS_AS((void)load_ckf(dir / "bad.ckf"), Error);
}

TEST_CASE("grayscale uses BT.601 weights") {
  Image px(1, 3, 3);
  for (int c = 0; c < 3; ++c) px.at(0, 0, c) = 1.0f;
  px.at(0, 1, 0) = 1.0f;
  for (int c = 0; c < 3; ++c) px.at(0, 2, c) = 0.5f;
  const Image y = to_grayscale(px);
  CHECK(y.channels() == 1);
  CHECK(y.at(0, 0) == doctest::Approx(1.0).epsilon(1e-7));
  CHECK(y.at(0, 1) == doctest::Approx(0.299).epsilon(1e-7));
  CHECK(y.at(0, 2) == doctest::Approx(0.5).epsilon(1e-7));
  CHECK_THROWS_AS((void)to_grayscale(Image(1, 1, 1)), Error);
}

TEST_CASE("grayscale is linear") {
  const Image a = fixtures::noise(8, 8, 3, 1), b = fixtures::noise(8, 8, 3, 2);
  Image mix(8, 8, 3);
  for (std::size_t i = 0; i < mix.size(); ++i) mix.data()[i] = 0.3f * a.data()[i] + 0.5f * b.data()[i];
  const Image ya = to_grayscale(a), yb = to_grayscale(b), ym = to_grayscale(mix);
  for (std::size_t i = 0; i < ym.size(); ++i) {
    CHECK(ym.data()[i] == doctest::Approx(0.3 * ya.data()[i] + 0.5 * yb.data()[i]).epsilon(1e-5));
  }
}

TEST_CASE("lab conversion matches the colorimetry reference") {
  Image px(1, 4, 3);
  for (int c = 0; c < 3; ++c) {
    px.at(0, 1, c) = 1.0f;
    px.at(0, 2, c) = 0.5f;
  }
  px.at(0, 3, 0) = 0.9f;
  px.at(0, 3, 1) = 0.2f;
  px.at(0, 3, 2) = 0.4f;
  const Image lab = to_lab(px);
  CHECK(lab.at(0, 0, 0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(std::abs(lab.at(0, 0, 1)) < 1e-4);
  CHECK(lab.at(0, 1, 0) == doctest::Approx(100.0).epsilon(1e-4));
  CHECK(std::abs(lab.at(0, 1, 1)) < 1e-2);
  CHECK(std::abs(lab.at(0, 1, 2)) < 1e-2);
  for (int x = 2; x < 4; ++x) {
    const auto ref = oracle::srgb_to_lab(px.at(0, x, 0), px.at(0, x, 1), px.at(0, x, 2));
    for (int c = 0; c < 3; ++c) CHECK(lab.at(0, x, c) == doctest::Approx(ref[c]).epsilon(1e-3));
  }
  CHECK(std::abs(lab.at(0, 2, 1)) < 1e-2);
  CHECK(std::abs(lab.at(0, 2, 2)) < 1e-2);
}

TEST_CASE("crop and resize identities") {
  const Image img = fixtures::noise(12, 9, 3, 4);
  CHECK(crop(img, Rect{0, 0, 9, 12}) == img);
  CHECK(resize_bilinear(img, 12, 9) == img);
  CHECK_THROWS_AS((void)crop(img, Rect{5, 0, 5, 12}), Error);
  const Image c = crop(img, Rect{2, 3, 4, 5});
  CHECK(c.height() == 5);
  CHECK(c.width() == 4);
  CHECK(c.at(0, 0, 1) == img.at(3, 2, 1));
}

TEST_CASE("bilinear preserves constants at any size") {
  const Image img(7, 5, 3, 0.625f);
  for (auto [h, w] : {std::pair{1, 1}, {3, 11}, {20, 2}, {64, 64}}) {
    for (const Image out = resize_bilinear(img, h, w); float v : out.data()) CHECK(v == doctest::Approx(0.625f));
  }
}

TEST_CASE("2x1 upscaled to 4x1 is monotone and matches the oracle") {
  Image img(2, 1, 1);
  img.at(1, 0) = 1.0f;
  const Image up = resize_bilinear(img, 4, 1);
  for (int y = 0; y < 4; ++y) CHECK(up.at(y, 0) == doctest::Approx(oracle::bilinear_at(img, 4, 1, y, 0, 0)));
  for (int y = 1; y < 4; ++y) CHECK(up.at(y, 0) >= up.at(y - 1, 0));
}

TEST_CASE("resize_crop_256") {
  const Image same = fixtures::noise(256, 256, 3, 3);
  CHECK(resize_crop_256(same) == same);

  for (const Image out = resize_crop_256(Image(512, 512, 3, 0.3f)); float v : out.data()) CHECK(v == doctest::Approx(0.3f));

  const Image tall = fixtures::noise(512, 768, 3, 8);
  const Image out = resize_crop_256(tall);
  REQUIRE(out.height() == 256);
  REQUIRE(out.width() == 256);
  // shorter side 512 -> 256, longer 768 -> 384, centre crop offset 64
  double worst = 0.0;
  for (int y = 0; y < 256; ++y)
    for (int x = 0; x < 256; ++x)
      for (int c = 0; c < 3; ++c) {
        worst = std::max(worst, std::abs(out.at(y, x, c) - oracle::bilinear_at(tall, 256, 384, y, x + 64, c)));
      }
  CHECK(worst < 1e-6);

  CHECK(resize_crop_256(Image(1, 1, 3, 0.4f)).at(255, 255, 2) == doctest::Approx(0.4f));
}

TEST_CASE("total variation and mean abs diff") {
  Image img(1, 3, 1);
  img.at(0, 1) = 1.0f;
  CHECK(total_variation(img) == doctest::Approx(2.0));
  CHECK(mean_abs_diff(img, Image(1, 3, 1)) == doctest::Approx(1.0 / 3.0));
  CHECK_THROWS_AS((void)mean_abs_diff(img, Image(1, 3, 3)), Error);
}
