#include <atomic>

#include "kernels_impl.hpp"

namespace cartoonkit::kernels {
namespace {

constexpr KernelTable kScalar{
    Isa::kScalar,         "scalar",
    scalar::luma,         scalar::color_shift,   scalar::slide_window,
    scalar::normalize,    scalar::guided_coeffs, scalar::guided_apply,
    scalar::multiply,
};

#if defined(CARTOONKIT_HAVE_AVX2)
constexpr KernelTable kAvx2{
    Isa::kAvx2,         "avx2",
    avx2::luma,         avx2::color_shift,   avx2::slide_window,
    avx2::normalize,    avx2::guided_coeffs, avx2::guided_apply,
    avx2::multiply,
};
#endif

const KernelTable* best_available() noexcept {
  if (const KernelTable* t = avx2_table(); t != nullptr && cpu_supports_avx2()) return t;
  return &kScalar;
}

std::atomic<const KernelTable*>& current() {
  static std::atomic<const KernelTable*> table{best_available()};
  return table;
}

}  // namespace

const KernelTable& scalar_table() noexcept { return kScalar; }

const KernelTable* avx2_table() noexcept {
#if defined(CARTOONKIT_HAVE_AVX2)
  return &kAvx2;
#else
  return nullptr;
#endif
}

bool cpu_supports_avx2() noexcept {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

const KernelTable& active() noexcept { return *current().load(); }

bool select(Isa isa) noexcept {
  if (isa == Isa::kScalar) {
    current().store(&kScalar);
    return true;
  }
  const KernelTable* t = avx2_table();
  if (t == nullptr || !cpu_supports_avx2()) return false;
  current().store(t);
  return true;
}

}  // namespace cartoonkit::kernels
