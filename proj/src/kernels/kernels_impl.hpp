#pragma once

#include <cstddef>

#include "cartoonkit/kernels.hpp"

namespace cartoonkit::kernels {

inline constexpr double kLumaR = 0.299;
inline constexpr double kLumaG = 0.587;
inline constexpr double kLumaB = 0.114;

#define CARTOONKIT_KERNEL_DECLS                                                \
  void luma(const float* rgb, float* y, std::size_t n);                        \
  void color_shift(const float* rgb, float* out, std::size_t n, double alpha,  \
                   double b1, double b2, double b3);                           \
  void slide_window(double* acc, const double* add, const double* sub,         \
                    std::size_t n);                                            \
  void normalize(float* out, const double* acc, const double* count,           \
                 double scale, std::size_t n);                                 \
  void guided_coeffs(const float* mean_i, const float* mean_p,                 \
                     const float* mean_ii, const float* mean_ip, float eps,    \
                     float* a, float* b, std::size_t n);                       \
  void guided_apply(const float* mean_a, const float* mean_b,                  \
                    const float* guide, float* q, std::size_t n);              \
  void multiply(const float* x, const float* y, float* out, std::size_t n);

namespace scalar {
CARTOONKIT_KERNEL_DECLS
}

#if defined(CARTOONKIT_HAVE_AVX2)
namespace avx2 {
CARTOONKIT_KERNEL_DECLS
}
#endif

#undef CARTOONKIT_KERNEL_DECLS

}  // namespace cartoonkit::kernels
