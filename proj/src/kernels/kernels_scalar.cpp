#include "fleet/kernels.hpp"

#include <cmath>

namespace fleet::kernels::scalar {

// The comparison forms below (t > 0 ? t : 0, t < 1 ? t : 1) mirror the
// MAXPD/MINPD operand semantics so the AVX2 variant can match bit-for-bit.

double fleet_penalty(std::span<const double> ax, std::span<const double> ay,
                     std::span<const double> bx, std::span<const double> by, double q,
                     double d, std::span<double> gx, std::span<double> gy) {
  const std::size_t n = ax.size();
  const double minus_two_q = -2.0 * q;
  double total = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const double dx = ax[k] - bx[k];
    const double dy = ay[k] - by[k];
    const double dist = std::sqrt(dx * dx + dy * dy);
    const double pen = d - dist;
    if (!(pen > 0.0)) continue;
    total += q * (pen * pen);
    if (dist > 0.0) {
      const double coef = (minus_two_q * pen) / dist;
      gx[k] = gx[k] + coef * dx;
      gy[k] = gy[k] + coef * dy;
    }
  }
  return total;
}

RingQuery ring_query(double px, double py, std::span<const double> xs,
                     std::span<const double> ys) {
  const std::size_t n = xs.size();
  RingQuery out{INFINITY, 0, 0};
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = (i + 1 == n) ? 0 : i + 1;
    const double ax = xs[i];
    const double ay = ys[i];
    const double ex = xs[j] - ax;
    const double ey = ys[j] - ay;
    const double wx = px - ax;
    const double wy = py - ay;
    const double len2 = ex * ex + ey * ey;
    const double proj = wx * ex + wy * ey;
    double t = len2 > 0.0 ? proj / len2 : 0.0;
    t = t > 0.0 ? t : 0.0;
    t = t < 1.0 ? t : 1.0;
    const double cx = wx - t * ex;
    const double cy = wy - t * ey;
    const double d2 = cx * cx + cy * cy;
    if (d2 < out.dist_sq) {
      out.dist_sq = d2;
      out.segment = i;
    }
    const bool above_a = ay > py;
    const bool above_b = ys[j] > py;
    if (above_a != above_b) {
      const double x_cross = ax + (ex * (py - ay)) / ey;
      if (px < x_cross) ++out.crossings;
    }
  }
  return out;
}

}  // namespace fleet::kernels::scalar
