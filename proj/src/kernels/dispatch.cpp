#include "fleet/kernels.hpp"

#include <cstdlib>
#include <string>

#include <spdlog/spdlog.h>

namespace fleet::kernels {

#if !defined(FLEET_HAVE_AVX2)
namespace avx2 {
double fleet_penalty(std::span<const double> ax, std::span<const double> ay,
                     std::span<const double> bx, std::span<const double> by, double q,
                     double d, std::span<double> gx, std::span<double> gy) {
  return scalar::fleet_penalty(ax, ay, bx, by, q, d, gx, gy);
}
RingQuery ring_query(double px, double py, std::span<const double> xs,
                     std::span<const double> ys) {
  return scalar::ring_query(px, py, xs, ys);
}
}  // namespace avx2
#endif

const KernelTable& scalar_table() {
  static const KernelTable table{"scalar", &scalar::fleet_penalty, &scalar::ring_query};
  return table;
}

const KernelTable* avx2_table() {
#if defined(FLEET_HAVE_AVX2)
  static const bool supported = __builtin_cpu_supports("avx2");
  static const KernelTable table{"avx2", &avx2::fleet_penalty, &avx2::ring_query};
  return supported ? &table : nullptr;
#else
  return nullptr;
#endif
}

namespace {

const KernelTable& select() {
  const char* env = std::getenv("FLEET_KERNELS");
  const std::string wanted = env ? env : "auto";
  if (wanted == "scalar") return scalar_table();
  const KernelTable* simd = avx2_table();
  if (wanted == "avx2" && simd == nullptr) {
    spdlog::warn("FLEET_KERNELS=avx2 requested but unavailable; using scalar kernels");
  }
  return simd ? *simd : scalar_table();
}

}  // namespace

const KernelTable& active() {
  static const KernelTable& table = select();
  return table;
}

}  // namespace fleet::kernels
