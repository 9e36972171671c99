// Compiled with -mavx2 only. FMA is deliberately not enabled so every lane
// rounds exactly like the scalar reference.
#include <immintrin.h>

#include "kernels_impl.hpp"

namespace cartoonkit::kernels::avx2 {
namespace {

// Four interleaved RGB pixels starting at `rgb` widened to double.
inline void load_rgb4(const float* rgb, __m256d& r, __m256d& g, __m256d& b) {
  const __m128i idx = _mm_setr_epi32(0, 3, 6, 9);
  r = _mm256_cvtps_pd(_mm_i32gather_ps(rgb, idx, 4));
  g = _mm256_cvtps_pd(_mm_i32gather_ps(rgb + 1, idx, 4));
  b = _mm256_cvtps_pd(_mm_i32gather_ps(rgb + 2, idx, 4));
}

inline __m256d luma4(__m256d r, __m256d g, __m256d b) {
  const __m256d t = _mm256_add_pd(_mm256_mul_pd(_mm256_set1_pd(kLumaR), r),
                                  _mm256_mul_pd(_mm256_set1_pd(kLumaG), g));
  return _mm256_add_pd(t, _mm256_mul_pd(_mm256_set1_pd(kLumaB), b));
}

}  // namespace

void luma(const float* rgb, float* y, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r, g, b;
    // The gather reads 12 floats; the last pixel's blue is at offset 11.
    load_rgb4(rgb + 3 * i, r, g, b);
    _mm_storeu_ps(y + i, _mm256_cvtpd_ps(luma4(r, g, b)));
  }
  scalar::luma(rgb + 3 * i, y + i, n - i);
}

void color_shift(const float* rgb, float* out, std::size_t n, double alpha,
                 double b1, double b2, double b3) {
  const __m256d keep = _mm256_set1_pd(1.0 - alpha);
  const __m256d va = _mm256_set1_pd(alpha);
  const __m256d w1 = _mm256_set1_pd(b1), w2 = _mm256_set1_pd(b2), w3 = _mm256_set1_pd(b3);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    __m256d r, g, b;
    load_rgb4(rgb + 3 * i, r, g, b);
    __m256d mix = _mm256_add_pd(_mm256_mul_pd(w1, r), _mm256_mul_pd(w2, g));
    mix = _mm256_add_pd(mix, _mm256_mul_pd(w3, b));
    const __m256d v = _mm256_add_pd(_mm256_mul_pd(keep, mix),
                                    _mm256_mul_pd(va, luma4(r, g, b)));
    _mm_storeu_ps(out + i, _mm256_cvtpd_ps(v));
  }
  scalar::color_shift(rgb + 3 * i, out + i, n - i, alpha, b1, b2, b3);
}

void slide_window(double* acc, const double* add, const double* sub,
                  std::size_t n) {
  std::size_t i = 0;
  if (sub == nullptr) {
    for (; i + 4 <= n; i += 4) {
      _mm256_storeu_pd(acc + i, _mm256_add_pd(_mm256_loadu_pd(acc + i),
                                              _mm256_loadu_pd(add + i)));
    }
  } else {
    for (; i + 4 <= n; i += 4) {
      const __m256d s = _mm256_add_pd(_mm256_loadu_pd(acc + i), _mm256_loadu_pd(add + i));
      _mm256_storeu_pd(acc + i, _mm256_sub_pd(s, _mm256_loadu_pd(sub + i)));
    }
  }
  scalar::slide_window(acc + i, add + i, sub == nullptr ? nullptr : sub + i, n - i);
}

void normalize(float* out, const double* acc, const double* count, double scale,
               std::size_t n) {
  const __m256d vs = _mm256_set1_pd(scale);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_mul_pd(_mm256_loadu_pd(count + i), vs);
    _mm_storeu_ps(out + i, _mm256_cvtpd_ps(_mm256_div_pd(_mm256_loadu_pd(acc + i), d)));
  }
  scalar::normalize(out + i, acc + i, count + i, scale, n - i);
}

void guided_coeffs(const float* mean_i, const float* mean_p, const float* mean_ii,
                   const float* mean_ip, float eps, float* a, float* b,
                   std::size_t n) {
  const __m256 ve = _mm256_set1_ps(eps);
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 mi = _mm256_loadu_ps(mean_i + i);
    const __m256 mp = _mm256_loadu_ps(mean_p + i);
    const __m256 var = _mm256_sub_ps(_mm256_loadu_ps(mean_ii + i), _mm256_mul_ps(mi, mi));
    const __m256 cov = _mm256_sub_ps(_mm256_loadu_ps(mean_ip + i), _mm256_mul_ps(mi, mp));
    const __m256 ai = _mm256_div_ps(cov, _mm256_add_ps(var, ve));
    _mm256_storeu_ps(a + i, ai);
    _mm256_storeu_ps(b + i, _mm256_sub_ps(mp, _mm256_mul_ps(ai, mi)));
  }
  scalar::guided_coeffs(mean_i + i, mean_p + i, mean_ii + i, mean_ip + i, eps,
                        a + i, b + i, n - i);
}

void guided_apply(const float* mean_a, const float* mean_b, const float* guide,
                  float* q, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    const __m256 v = _mm256_add_ps(
        _mm256_mul_ps(_mm256_loadu_ps(mean_a + i), _mm256_loadu_ps(guide + i)),
        _mm256_loadu_ps(mean_b + i));
    _mm256_storeu_ps(q + i, v);
  }
  scalar::guided_apply(mean_a + i, mean_b + i, guide + i, q + i, n - i);
}

void multiply(const float* x, const float* y, float* out, std::size_t n) {
  std::size_t i = 0;
  for (; i + 8 <= n; i += 8) {
    _mm256_storeu_ps(out + i, _mm256_mul_ps(_mm256_loadu_ps(x + i), _mm256_loadu_ps(y + i)));
  }
  scalar::multiply(x + i, y + i, out + i, n - i);
}

}  // namespace cartoonkit::kernels::avx2
