#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "cartoonkit/image.hpp"

namespace cartoonkit {

/// Decodes an 8-bit gray or RGB PNG (alpha is stripped, palettes are
/// expanded). Values map to [0,1] by v/255. Other bit depths are rejected.
///
/// Throws Error with kFileNotFound, kUnsupportedFormat or kDecodeError.
Image load_png(const std::filesystem::path& path);

/// Clamps to [0,1], quantizes by round(v*255). Output bytes are a pure
/// function of the pixel values (fixed zlib settings, no timestamps).
void save_png(const Image& img, const std::filesystem::path& path);

/// In-memory PNG encode with the same settings as save_png.
std::vector<std::uint8_t> encode_png(const Image& img);

/// "CKF1" raw float dump: magic, LE u32 height, width, channels, then
/// h*w*c LE float32, interleaved row-major. No clamping.
void save_ckf(const Image& img, const std::filesystem::path& path);
Image load_ckf(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);
void write_file_bytes(const std::filesystem::path& path,
                      const std::vector<std::uint8_t>& bytes);

}  // namespace cartoonkit
