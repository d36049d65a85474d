// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_QUERY_HPP
#define HASHPOINT_QUERY_HPP

#include <cstdint>
#include <vector>

#include "hashpoint/geometry.hpp"

namespace hashpoint {

/// A point retrieved for a ray: its index in the source cloud, the parameter
/// of its perpendicular foot on the ray, and its distance from the ray.
struct Neighbor {
  std::uint32_t id = 0;
  double t = 0.0;
  double dist = 0.0;

  friend bool operator==(const Neighbor&, const Neighbor&) = default;
};

/// Per-ray neighbor set, sorted by t ascending (ties by id). Every structure
/// in the library answers queries with this type.
struct QueryResult {
  std::vector<Neighbor> hits;

  std::size_t size() const { return hits.size(); }
  bool empty() const { return hits.empty(); }
  std::vector<std::uint32_t> ids() const;

  void sort();

  friend bool operator==(const QueryResult&, const QueryResult&) = default;
};

/**
 * The cone query predicate for one ray: a point p is inside when its foot
 * parameter t = d . (p - o) lies in [t_near, t_far] and its distance to the
 * ray is at most slope * t.
 */
struct Cone {
  Vec3 origin;
  Vec3 direction;
  double t_near = 0.0;
  double t_far = 0.0;
  double slope = 0.0;

  double radius(double t) const { return slope * t; }
  double max_radius() const { return slope * t_far; }

  bool test(const Vec3& p, std::uint32_t id, Neighbor& out) const {
    const Vec3 rel = p - origin;
    const double t = dot(rel, direction);
    if (t < t_near || t > t_far) return false;
    const double d2 = squared_norm(p - (origin + direction * t));
    const double r = slope * t;
    if (d2 > r * r) return false;
    out = {id, t, std::sqrt(d2)};
    return true;
  }
};

Cone make_cone(const Camera& camera, const Ray& ray, const SearchConfig& config);

}  // namespace hashpoint

#endif  // HASHPOINT_QUERY_HPP
