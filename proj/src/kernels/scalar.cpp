#include "kernels_impl.hpp"

namespace cartoonkit::kernels::scalar {

void luma(const float* rgb, float* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    y[i] = static_cast<float>(kLumaR * r + kLumaG * g + kLumaB * b);
  }
}

void color_shift(const float* rgb, float* out, std::size_t n, double alpha,
                 double b1, double b2, double b3) {
  const double keep = 1.0 - alpha;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = rgb[3 * i], g = rgb[3 * i + 1], b = rgb[3 * i + 2];
    const double mix = b1 * r + b2 * g + b3 * b;
    const double y = kLumaR * r + kLumaG * g + kLumaB * b;
    out[i] = static_cast<float>(keep * mix + alpha * y);
  }
}

void slide_window(double* acc, const double* add, const double* sub,
                  std::size_t n) {
  if (sub == nullptr) {
    for (std::size_t i = 0; i < n; ++i) acc[i] = acc[i] + add[i];
    return;
  }
  for (std::size_t i = 0; i < n; ++i) acc[i] = (acc[i] + add[i]) - sub[i];
}

void normalize(float* out, const double* acc, const double* count, double scale,
               std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = static_cast<float>(acc[i] / (count[i] * scale));
  }
}

void guided_coeffs(const float* mean_i, const float* mean_p, const float* mean_ii,
                   const float* mean_ip, float eps, float* a, float* b,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float var = mean_ii[i] - mean_i[i] * mean_i[i];
    const float cov = mean_ip[i] - mean_i[i] * mean_p[i];
    const float ai = cov / (var + eps);
    a[i] = ai;
    b[i] = mean_p[i] - ai * mean_i[i];
  }
}

void guided_apply(const float* mean_a, const float* mean_b, const float* guide,
                  float* q, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) q[i] = mean_a[i] * guide[i] + mean_b[i];
}

void multiply(const float* x, const float* y, float* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}

}  // namespace cartoonkit::kernels::scalar
