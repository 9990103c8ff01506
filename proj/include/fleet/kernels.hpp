#pragma once

// Data-parallel inner loops of the MPC cost: polygon ring queries and the
// pairwise fleet penalty over a horizon. Each kernel has a scalar reference
// and, on x86-64, an AVX2 variant. The variant is chosen once at runtime
// (CPU support, overridable with FLEET_KERNELS=scalar|avx2). Variants are
// required to agree bit-for-bit with the scalar reference.

#include <cstddef>
#include <span>
#include <string_view>

namespace fleet::kernels {

struct RingQuery {
  double dist_sq{0.0};         // squared distance to the closest boundary segment
  std::size_t segment{0};      // lowest index among closest segments
  int crossings{0};            // +x ray crossings, odd means inside
};

/// Fleet penalty between own positions a[k] and neighbour positions b[k]:
/// sum_k q * max(0, d - |a_k - b_k|)^2. Gradient w.r.t. a is added to gx/gy.
/// Coincident points contribute cost but no gradient.
using FleetPenaltyFn = double (*)(std::span<const double> ax, std::span<const double> ay,
                                  std::span<const double> bx, std::span<const double> by,
                                  double q, double d, std::span<double> gx, std::span<double> gy);

using RingQueryFn = RingQuery (*)(double px, double py, std::span<const double> xs,
                                  std::span<const double> ys);

struct KernelTable {
  std::string_view name;
  FleetPenaltyFn fleet_penalty;
  RingQueryFn ring_query;
};

namespace scalar {
double fleet_penalty(std::span<const double> ax, std::span<const double> ay,
                     std::span<const double> bx, std::span<const double> by, double q,
                     double d, std::span<double> gx, std::span<double> gy);
RingQuery ring_query(double px, double py, std::span<const double> xs,
                     std::span<const double> ys);
}  // namespace scalar

namespace avx2 {
double fleet_penalty(std::span<const double> ax, std::span<const double> ay,
                     std::span<const double> bx, std::span<const double> by, double q,
                     double d, std::span<double> gx, std::span<double> gy);
RingQuery ring_query(double px, double py, std::span<const double> xs,
                     std::span<const double> ys);
}  // namespace avx2

const KernelTable& scalar_table();

/// nullptr when the AVX2 variant was not compiled in or the CPU lacks AVX2.
const KernelTable* avx2_table();

/// The table selected for this process.
const KernelTable& active();

}  // namespace fleet::kernels
