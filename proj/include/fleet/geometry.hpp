#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

namespace fleet {

struct Vec2 {
  double x{0.0};
  double y{0.0};

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double s, Vec2 a) { return {s * a.x, s * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double norm(Vec2 a) { return std::sqrt(dot(a, a)); }
inline double distance(Vec2 a, Vec2 b) { return norm(a - b); }

/// Wraps an angle to (-pi, pi].
inline double wrap_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  double w = std::fmod(a + std::numbers::pi, two_pi);
  if (w <= 0.0) w += two_pi;
  return w - std::numbers::pi;
}

/// Simple polygon, counter-clockwise. Coordinates are also kept as separate
/// x/y arrays because the distance kernels consume structure-of-arrays input.
class Polygon {
public:
  Polygon() = default;
  explicit Polygon(std::vector<Vec2> vertices);

  const std::vector<Vec2>& vertices() const { return vertices_; }
  std::span<const double> xs() const { return xs_; }
  std::span<const double> ys() const { return ys_; }
  std::size_t size() const { return vertices_.size(); }

  Vec2 bbox_min() const { return lo_; }
  Vec2 bbox_max() const { return hi_; }

  friend bool operator==(const Polygon& a, const Polygon& b) { return a.vertices_ == b.vertices_; }

private:
  std::vector<Vec2> vertices_;
  std::vector<double> xs_;
  std::vector<double> ys_;
  Vec2 lo_{};
  Vec2 hi_{};
};

double signed_area(const Polygon& poly);
bool is_simple(const Polygon& poly);
bool contains(const Polygon& poly, Vec2 p);

struct SignedDistance {
  double value{0.0};  // negative inside
  Vec2 gradient{};    // unit vector, d(value)/dp
};

/// Signed distance from p to the polygon boundary, negative inside.
SignedDistance signed_distance(const Polygon& poly, Vec2 p);

}  // namespace fleet
