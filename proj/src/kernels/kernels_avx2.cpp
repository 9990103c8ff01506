#include "fleet/kernels.hpp"

#include <immintrin.h>

#include <cmath>

namespace fleet::kernels::avx2 {

double fleet_penalty(std::span<const double> ax, std::span<const double> ay,
                     std::span<const double> bx, std::span<const double> by, double q,
                     double d, std::span<double> gx, std::span<double> gy) {
  const std::size_t n = ax.size();
  const double minus_two_q = -2.0 * q;
  const __m256d vq = _mm256_set1_pd(q);
  const __m256d vd = _mm256_set1_pd(d);
  const __m256d vm2q = _mm256_set1_pd(minus_two_q);
  const __m256d zero = _mm256_setzero_pd();

  double total = 0.0;
  alignas(32) double cost[4];
  std::size_t k = 0;
  for (; k + 4 <= n; k += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(ax.data() + k), _mm256_loadu_pd(bx.data() + k));
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ay.data() + k), _mm256_loadu_pd(by.data() + k));
    const __m256d dist = _mm256_sqrt_pd(_mm256_add_pd(_mm256_mul_pd(dx, dx), _mm256_mul_pd(dy, dy)));
    const __m256d pen = _mm256_sub_pd(vd, dist);
    const __m256d active = _mm256_cmp_pd(pen, zero, _CMP_GT_OQ);
    const int mask = _mm256_movemask_pd(active);
    if (mask == 0) continue;

    _mm256_store_pd(cost, _mm256_mul_pd(vq, _mm256_mul_pd(pen, pen)));
    for (int lane = 0; lane < 4; ++lane) {
      if (mask & (1 << lane)) total += cost[lane];
    }

    const __m256d with_grad = _mm256_and_pd(active, _mm256_cmp_pd(dist, zero, _CMP_GT_OQ));
    const __m256d coef = _mm256_div_pd(_mm256_mul_pd(vm2q, pen), dist);
    const __m256d gx0 = _mm256_loadu_pd(gx.data() + k);
    const __m256d gy0 = _mm256_loadu_pd(gy.data() + k);
    const __m256d gx1 = _mm256_add_pd(gx0, _mm256_mul_pd(coef, dx));
    const __m256d gy1 = _mm256_add_pd(gy0, _mm256_mul_pd(coef, dy));
    _mm256_storeu_pd(gx.data() + k, _mm256_blendv_pd(gx0, gx1, with_grad));
    _mm256_storeu_pd(gy.data() + k, _mm256_blendv_pd(gy0, gy1, with_grad));
  }

  for (; k < n; ++k) {
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

  const __m256d vpx = _mm256_set1_pd(px);
  const __m256d vpy = _mm256_set1_pd(py);
  const __m256d zero = _mm256_setzero_pd();
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d four = _mm256_set1_pd(4.0);
  __m256d best = _mm256_set1_pd(INFINITY);
  __m256d best_idx = zero;
  __m256d idx = _mm256_setr_pd(0.0, 1.0, 2.0, 3.0);

  // Vector blocks never touch the closing segment (n-1 -> 0); the tail does.
  std::size_t i = 0;
  for (; i + 4 < n; i += 4) {
    const __m256d ax = _mm256_loadu_pd(xs.data() + i);
    const __m256d ay = _mm256_loadu_pd(ys.data() + i);
    const __m256d bx = _mm256_loadu_pd(xs.data() + i + 1);
    const __m256d by = _mm256_loadu_pd(ys.data() + i + 1);
    const __m256d ex = _mm256_sub_pd(bx, ax);
    const __m256d ey = _mm256_sub_pd(by, ay);
    const __m256d wx = _mm256_sub_pd(vpx, ax);
    const __m256d wy = _mm256_sub_pd(vpy, ay);
    const __m256d len2 = _mm256_add_pd(_mm256_mul_pd(ex, ex), _mm256_mul_pd(ey, ey));
    const __m256d proj = _mm256_add_pd(_mm256_mul_pd(wx, ex), _mm256_mul_pd(wy, ey));
    __m256d t = _mm256_blendv_pd(zero, _mm256_div_pd(proj, len2), _mm256_cmp_pd(len2, zero, _CMP_GT_OQ));
    t = _mm256_max_pd(t, zero);
    t = _mm256_min_pd(t, one);
    const __m256d cx = _mm256_sub_pd(wx, _mm256_mul_pd(t, ex));
    const __m256d cy = _mm256_sub_pd(wy, _mm256_mul_pd(t, ey));
    const __m256d d2 = _mm256_add_pd(_mm256_mul_pd(cx, cx), _mm256_mul_pd(cy, cy));

    const __m256d closer = _mm256_cmp_pd(d2, best, _CMP_LT_OQ);
    best = _mm256_blendv_pd(best, d2, closer);
    best_idx = _mm256_blendv_pd(best_idx, idx, closer);
    idx = _mm256_add_pd(idx, four);

    const __m256d above_a = _mm256_cmp_pd(ay, vpy, _CMP_GT_OQ);
    const __m256d above_b = _mm256_cmp_pd(by, vpy, _CMP_GT_OQ);
    const __m256d straddle = _mm256_xor_pd(above_a, above_b);
    const __m256d x_cross = _mm256_add_pd(ax, _mm256_div_pd(_mm256_mul_pd(ex, _mm256_sub_pd(vpy, ay)), ey));
    const __m256d left = _mm256_cmp_pd(vpx, x_cross, _CMP_LT_OQ);
    out.crossings += __builtin_popcount(static_cast<unsigned>(_mm256_movemask_pd(_mm256_and_pd(straddle, left))));
  }

  alignas(32) double lane_best[4];
  alignas(32) double lane_idx[4];
  _mm256_store_pd(lane_best, best);
  _mm256_store_pd(lane_idx, best_idx);
  for (int lane = 0; lane < 4; ++lane) {
    const auto seg = static_cast<std::size_t>(lane_idx[lane]);
    if (lane_best[lane] < out.dist_sq || (lane_best[lane] == out.dist_sq && seg < out.segment)) {
      out.dist_sq = lane_best[lane];
      out.segment = seg;
    }
  }

  for (; i < n; ++i) {
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

}  // namespace fleet::kernels::avx2
