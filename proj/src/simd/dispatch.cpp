#include <cstdlib>
#include <cstring>

#include "perikit/simd/kernels.hpp"

namespace perikit::kernels {

#ifdef PERIKIT_HAVE_AVX2
namespace detail {
const Kernels* avx2_impl();
}
#endif

const Kernels* avx2() {
#ifdef PERIKIT_HAVE_AVX2
  if (__builtin_cpu_supports("avx2")) return detail::avx2_impl();
#endif
  return nullptr;
}

const Kernels& active() {
  static const Kernels* selected = [] {
    if (const char* env = std::getenv("PERIKIT_SIMD")) {
      if (std::strcmp(env, "scalar") == 0) return &scalar();
      if (std::strcmp(env, "avx2") == 0) {
        if (const Kernels* k = avx2()) return k;
        throw Error("PERIKIT_SIMD=avx2 requested but AVX2 is unavailable");
      }
    }
    if (const Kernels* k = avx2()) return k;
    return &scalar();
  }();
  return *selected;
}

}  // namespace perikit::kernels
