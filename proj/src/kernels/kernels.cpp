#include "rgflow/kernels.hpp"

#include <cstdlib>
#include <stdexcept>

namespace rgflow::kernels {

bool avx2_supported() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Kernels& pick_kernels() {
  const char* env = std::getenv("RGFLOW_SIMD");
  const std::string mode = env ? env : "auto";
  if (mode == "scalar") {
    return scalar_kernels();
  }
  if (mode == "avx2") {
#if defined(__x86_64__) || defined(_M_X64)
    if (!avx2_supported()) {
      throw std::runtime_error("RGFLOW_SIMD=avx2 requested but this CPU lacks avx2+fma");
    }
    return avx2_kernels();
#else
    throw std::runtime_error("RGFLOW_SIMD=avx2 requested on a non-x86-64 build");
#endif
  }
  if (mode != "auto") {
    throw std::runtime_error("RGFLOW_SIMD must be auto, scalar or avx2 (got '" + mode + "')");
  }
#if defined(__x86_64__) || defined(_M_X64)
  if (avx2_supported()) {
    return avx2_kernels();
  }
#endif
  return scalar_kernels();
}

}  // namespace

const Kernels& active_kernels() {
  // re-reads RGFLOW_SIMD on every call so one process can exercise both paths
  return pick_kernels();
}

std::vector<std::string> available_kernel_names() {
  std::vector<std::string> names{"scalar"};
  if (avx2_supported()) {
    names.emplace_back("avx2");
  }
  return names;
}

}  // namespace rgflow::kernels
