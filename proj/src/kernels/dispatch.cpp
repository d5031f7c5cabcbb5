#include "ic/kernels/kernels.hpp"

#include <atomic>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace ic::kernels {
namespace {

std::atomic<const Kernels*> g_active{nullptr};

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels* resolve(const char* name) {
  if (std::strcmp(name, "scalar") == 0) return &scalar();
  if (std::strcmp(name, "avx2") == 0) {
    if (!avx2_compiled()) throw std::runtime_error("avx2 kernels not compiled into this build");
    if (!cpu_has_avx2_fma()) throw std::runtime_error("cpu does not support avx2+fma");
    return &avx2();
  }
  throw std::runtime_error(std::string("unknown kernel set: ") + name);
}

const Kernels* pick_default() {
  if (const char* env = std::getenv("IC_KERNELS")) return resolve(env);
  if (avx2_supported()) return &avx2();
  return &scalar();
}

}  // namespace

bool avx2_compiled() {
#if IC_HAVE_AVX2_BUILD
  return true;
#else
  return false;
#endif
}

bool avx2_supported() { return avx2_compiled() && cpu_has_avx2_fma(); }

const Kernels& active() {
  const Kernels* k = g_active.load(std::memory_order_acquire);
  if (!k) {
    k = pick_default();
    g_active.store(k, std::memory_order_release);
  }
  return *k;
}

void force(const char* name) {
  g_active.store(resolve(name), std::memory_order_release);
}

#if !IC_HAVE_AVX2_BUILD
const Kernels& avx2() { throw std::runtime_error("avx2 kernels not compiled into this build"); }
#endif

}  // namespace ic::kernels
