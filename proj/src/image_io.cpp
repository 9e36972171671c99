#include "cartoonkit/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <iterator>

#include "cartoonkit/error.hpp"

namespace cartoonkit {
namespace {

constexpr std::array<char, 4> kCkfMagic{'C', 'K', 'F', '1'};

struct ReadCursor {
  const std::vector<std::uint8_t>* bytes;
  std::size_t offset;
};

void png_read_callback(png_structp png, png_bytep out, png_size_t length) {
  auto* cursor = static_cast<ReadCursor*>(png_get_io_ptr(png));
  if (cursor->offset + length > cursor->bytes->size()) {
    png_error(png, "truncated PNG stream");
  }
  std::memcpy(out, cursor->bytes->data() + cursor->offset, length);
  cursor->offset += length;
}

void png_write_callback(png_structp png, png_bytep data, png_size_t length) {
  auto* out = static_cast<std::vector<std::uint8_t>*>(png_get_io_ptr(png));
  out->insert(out->end(), data, data + length);
}

void png_flush_callback(png_structp) {}

[[noreturn]] void png_error_callback(png_structp png, png_const_charp msg) {
  auto* err = static_cast<std::string*>(png_get_error_ptr(png));
  if (err != nullptr) *err = msg;
  png_longjmp(png, 1);
}

void png_warning_callback(png_structp, png_const_charp) {}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

std::uint32_t get_u32(const std::vector<std::uint8_t>& in, std::size_t at) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(in[at + i]) << (8 * i);
  return v;
}

std::uint8_t quantize(float v) {
  const float clamped = std::clamp(v, 0.0f, 1.0f);
  return static_cast<std::uint8_t>(std::lround(clamped * 255.0f));
}

}  // namespace

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::error_code ec;
  if (!std::filesystem::is_regular_file(path, ec)) {
    throw Error(ErrorCode::kFileNotFound, "no such file: " + path.string());
  }
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "short write to " + path.string());
}

Image load_png(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 8 || png_sig_cmp(bytes.data(), 0, 8) != 0) {
    throw Error(ErrorCode::kDecodeError, "not a PNG file: " + path.string());
  }

  std::string message;
  png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, &message,
                                           png_error_callback, png_warning_callback);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kIoError, "libpng allocation failed");
  }

  ReadCursor cursor{&bytes, 0};
  // Declared before setjmp so the longjmp path can report and clean up.
  std::vector<png_byte> pixels;
  std::vector<png_bytep> rows;
  int bit_depth = 0;
  int color_type = 0;
  png_uint_32 width = 0, height = 0;
  bool unsupported = false;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_read_struct(&png, &info, nullptr);
    throw Error(ErrorCode::kDecodeError,
                "corrupt PNG " + path.string() + ": " + message);
  }

  png_set_read_fn(png, &cursor, png_read_callback);
  png_read_info(png, info);
  width = png_get_image_width(png, info);
  height = png_get_image_height(png, info);
  bit_depth = png_get_bit_depth(png, info);
  color_type = png_get_color_type(png, info);

  if (color_type == PNG_COLOR_TYPE_PALETTE) {
    png_set_palette_to_rgb(png);
  } else if (bit_depth != 8) {
    unsupported = true;
  }
  if (!unsupported) {
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);
    const int channels = png_get_channels(png, info);
    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * height);
    rows.resize(height);
    for (png_uint_32 y = 0; y < height; ++y) rows[y] = pixels.data() + y * stride;
    png_read_image(png, rows.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(static_cast<int>(height), static_cast<int>(width), channels);
    auto dst = img.data();
    for (png_uint_32 y = 0; y < height; ++y) {
      for (std::size_t i = 0; i < static_cast<std::size_t>(width) * channels; ++i) {
        dst[y * width * channels + i] = static_cast<float>(rows[y][i]) / 255.0f;
      }
    }
    return img;
  }
  png_destroy_read_struct(&png, &info, nullptr);
  throw Error(ErrorCode::kUnsupportedFormat,
              path.string() + ": unsupported PNG bit depth " +
                  std::to_string(bit_depth) + " (only 8-bit gray/RGB)");
}

std::vector<std::uint8_t> encode_png(const Image& img) {
  if (img.channels() != 1 && img.channels() != 3) {
    throw Error(ErrorCode::kInvalidArgument, "PNG export needs 1 or 3 channels");
  }
  if (img.empty()) throw Error(ErrorCode::kInvalidArgument, "PNG export of an empty image");

  std::string message;
  png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, &message,
                                            png_error_callback, png_warning_callback);
  png_infop info = png != nullptr ? png_create_info_struct(png) : nullptr;
  if (png == nullptr || info == nullptr) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "libpng allocation failed");
  }

  std::vector<std::uint8_t> out;
  const int ch = img.channels();
  const std::size_t stride = static_cast<std::size_t>(img.width()) * ch;
  std::vector<png_byte> pixels(stride * img.height());
  const auto src = img.data();
  for (std::size_t i = 0; i < pixels.size(); ++i) pixels[i] = quantize(src[i]);
  std::vector<png_bytep> rows(static_cast<std::size_t>(img.height()));
  for (int y = 0; y < img.height(); ++y) rows[y] = pixels.data() + y * stride;

  if (setjmp(png_jmpbuf(png))) {
    png_destroy_write_struct(&png, &info);
    throw Error(ErrorCode::kIoError, "PNG encode failed: " + message);
  }
  png_set_write_fn(png, &out, png_write_callback, png_flush_callback);
  png_set_IHDR(png, info, static_cast<png_uint_32>(img.width()),
               static_cast<png_uint_32>(img.height()), 8,
               ch == 1 ? PNG_COLOR_TYPE_GRAY : PNG_COLOR_TYPE_RGB,
               PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
               PNG_FILTER_TYPE_DEFAULT);
  png_set_compression_level(png, 6);
  png_write_info(png, info);
  png_write_image(png, rows.data());
  png_write_end(png, nullptr);
  png_destroy_write_struct(&png, &info);
  return out;
}

void save_png(const Image& img, const std::filesystem::path& path) {
  write_file_bytes(path, encode_png(img));
}

void save_ckf(const Image& img, const std::filesystem::path& path) {
  std::vector<std::uint8_t> out;
  out.reserve(16 + img.size() * 4);
  out.insert(out.end(), kCkfMagic.begin(), kCkfMagic.end());
  put_u32(out, static_cast<std::uint32_t>(img.height()));
  put_u32(out, static_cast<std::uint32_t>(img.width()));
  put_u32(out, static_cast<std::uint32_t>(img.channels()));
  for (float v : img.data()) put_u32(out, std::bit_cast<std::uint32_t>(v));
  write_file_bytes(path, out);
}

Image load_ckf(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  if (bytes.size() < 16 || !std::equal(kCkfMagic.begin(), kCkfMagic.end(), bytes.begin())) {
    throw Error(ErrorCode::kDecodeError, path.string() + ": missing CKF1 header");
  }
  const std::uint32_t h = get_u32(bytes, 4), w = get_u32(bytes, 8), c = get_u32(bytes, 12);
  const std::size_t n = static_cast<std::size_t>(h) * w * c;
  if (bytes.size() != 16 + 4 * n) {
    throw Error(ErrorCode::kDecodeError, path.string() + ": CKF1 payload size mismatch");
  }
  std::vector<float> data(n);
  for (std::size_t i = 0; i < n; ++i) {
    data[i] = std::bit_cast<float>(get_u32(bytes, 16 + 4 * i));
  }
  return Image(static_cast<int>(h), static_cast<int>(w), static_cast<int>(c), std::move(data));
}

}  // namespace cartoonkit
