#include "fleet/geometry.hpp"

#include <algorithm>

#include "fleet/kernels.hpp"

namespace fleet {

Polygon::Polygon(std::vector<Vec2> vertices) : vertices_(std::move(vertices)) {
  xs_.reserve(vertices_.size());
  ys_.reserve(vertices_.size());
  lo_ = hi_ = vertices_.empty() ? Vec2{} : vertices_.front();
  for (const Vec2& v : vertices_) {
    xs_.push_back(v.x);
    ys_.push_back(v.y);
    lo_ = {std::min(lo_.x, v.x), std::min(lo_.y, v.y)};
    hi_ = {std::max(hi_.x, v.x), std::max(hi_.y, v.y)};
  }
}

double signed_area(const Polygon& poly) {
  const auto& v = poly.vertices();
  double twice = 0.0;
  for (std::size_t i = 0; i < v.size(); ++i) {
    twice += cross(v[i], v[(i + 1) % v.size()]);
  }
  return 0.5 * twice;
}

namespace {

int orientation(Vec2 a, Vec2 b, Vec2 c) {
  const double o = cross(b - a, c - a);
  return (o > 0.0) - (o < 0.0);
}

bool on_segment(Vec2 a, Vec2 b, Vec2 p) {
  return std::min(a.x, b.x) <= p.x && p.x <= std::max(a.x, b.x) && std::min(a.y, b.y) <= p.y &&
         p.y <= std::max(a.y, b.y);
}

bool segments_intersect(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const int o1 = orientation(a, b, c);
  const int o2 = orientation(a, b, d);
  const int o3 = orientation(c, d, a);
  const int o4 = orientation(c, d, b);
  if (o1 != o2 && o3 != o4) return true;
  if (o1 == 0 && on_segment(a, b, c)) return true;
  if (o2 == 0 && on_segment(a, b, d)) return true;
  if (o3 == 0 && on_segment(c, d, a)) return true;
  if (o4 == 0 && on_segment(c, d, b)) return true;
  return false;
}

}  // namespace

bool is_simple(const Polygon& poly) {
  const auto& v = poly.vertices();
  const std::size_t n = v.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == v[(i + 1) % n]) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      // adjacent edges share a vertex by construction
      if (j == i + 1 || (i == 0 && j == n - 1)) continue;
      if (segments_intersect(v[i], v[(i + 1) % n], v[j], v[(j + 1) % n])) return false;
    }
  }
  return true;
}

bool contains(const Polygon& poly, Vec2 p) {
  return kernels::active().ring_query(p.x, p.y, poly.xs(), poly.ys()).crossings % 2 == 1;
}

SignedDistance signed_distance(const Polygon& poly, Vec2 p) {
  const auto q = kernels::active().ring_query(p.x, p.y, poly.xs(), poly.ys());
  const bool inside = q.crossings % 2 == 1;
  const auto& v = poly.vertices();
  const Vec2 a = v[q.segment];
  const Vec2 b = v[(q.segment + 1) % v.size()];
  const double dist = std::sqrt(q.dist_sq);

  Vec2 grad;
  if (dist > 1e-12) {
    const Vec2 e = b - a;
    const double len2 = dot(e, e);
    double t = len2 > 0.0 ? dot(p - a, e) / len2 : 0.0;
    t = std::clamp(t, 0.0, 1.0);
    const Vec2 away = p - (a + t * e);
    const double s = 1.0 / norm(away);
    grad = inside ? Vec2{-away.x * s, -away.y * s} : Vec2{away.x * s, away.y * s};
  } else {
    // On the boundary: outward normal of the closest edge (CCW winding).
    const Vec2 e = b - a;
    const double len = norm(e);
    grad = len > 0.0 ? Vec2{e.y / len, -e.x / len} : Vec2{1.0, 0.0};
  }
  return {inside ? -dist : dist, grad};
}

}  // namespace fleet
