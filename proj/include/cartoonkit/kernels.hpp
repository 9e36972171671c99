#pragma once

#include <cstddef>
#include <string_view>

// Data-parallel inner loops behind the image operators. Each kernel has a
// scalar reference implementation and, where the CPU supports it, an AVX2
// variant selected at startup. The variants perform the same IEEE
// operations in the same order (no FMA contraction), so they agree
// bit-for-bit; tests/test_kernels.cpp holds them to that.

namespace cartoonkit::kernels {

enum class Isa { kScalar, kAvx2 };

struct KernelTable {
  Isa isa;
  std::string_view name;

  /// y[i] = 0.299 r + 0.587 g + 0.114 b, evaluated in double.
  void (*luma)(const float* rgb, float* y, std::size_t n);

  /// out[i] = (1-alpha)(b1 r + b2 g + b3 b) + alpha * luma, in double.
  void (*color_shift)(const float* rgb, float* out, std::size_t n, double alpha,
                      double b1, double b2, double b3);

  /// acc[i] += add[i] (- sub[i] when sub != nullptr).
  void (*slide_window)(double* acc, const double* add, const double* sub,
                       std::size_t n);

  /// out[i] = float(acc[i] / (count[i] * scale)).
  void (*normalize)(float* out, const double* acc, const double* count,
                    double scale, std::size_t n);

  /// Local linear model of the guided filter from window means:
  /// a = (mIp - mI mp) / (mII - mI^2 + eps), b = mp - a mI (float math).
  void (*guided_coeffs)(const float* mean_i, const float* mean_p,
                        const float* mean_ii, const float* mean_ip, float eps,
                        float* a, float* b, std::size_t n);

  /// q = mean_a * guide + mean_b.
  void (*guided_apply)(const float* mean_a, const float* mean_b,
                       const float* guide, float* q, std::size_t n);

  /// out[i] = x[i] * y[i].
  void (*multiply)(const float* x, const float* y, float* out, std::size_t n);
};

const KernelTable& scalar_table() noexcept;
/// nullptr when the binary was built without AVX2 support.
const KernelTable* avx2_table() noexcept;

/// Table used by the library; AVX2 when both compiled in and supported by
/// the running CPU, unless overridden.
const KernelTable& active() noexcept;
/// Returns false (and leaves the selection alone) if `isa` is unavailable.
bool select(Isa isa) noexcept;
bool cpu_supports_avx2() noexcept;

}  // namespace cartoonkit::kernels
