#include "codicon/simd/kernels.hpp"

#include <cstdlib>
#include <string_view>

namespace codicon::simd {

#if !(defined(__x86_64__) || defined(_M_X64))
const KernelTable* avx2_kernels() { return nullptr; }
#endif
#if !(defined(__aarch64__) || defined(_M_ARM64))
const KernelTable* neon_kernels() { return nullptr; }
#endif

namespace {

const KernelTable& select_kernels() {
  const char* env = std::getenv("CODICON_SIMD");
  const std::string_view request = env ? env : "";
  if (request == "scalar") return scalar_kernels();
  if (const KernelTable* t = avx2_kernels(); t && request != "neon") return *t;
  if (const KernelTable* t = neon_kernels(); t) return *t;
  return scalar_kernels();
}

}  // namespace

const KernelTable& active_kernels() {
  static const KernelTable& table = select_kernels();
  return table;
}

}  // namespace codicon::simd
