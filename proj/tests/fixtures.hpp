// SPDX-License-Identifier: Apache-2.0
//
// Seeded random cameras and scenes shared by the unit and acceptance tests.

#ifndef HASHPOINT_TESTS_FIXTURES_HPP
#define HASHPOINT_TESTS_FIXTURES_HPP

#include <cmath>
#include <memory>
#include <random>
#include <vector>

#include "hashpoint/geometry.hpp"
#include "hashpoint/point_cloud.hpp"
#include "hashpoint/scene.hpp"

namespace fixtures {

using hashpoint::Camera;
using hashpoint::Vec3;

inline double uniform(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline Vec3 random_unit(std::mt19937_64& rng) {
  std::normal_distribution<double> normal;
  Vec3 v;
  do {
    v = {normal(rng), normal(rng), normal(rng)};
  } while (!(hashpoint::norm(v) > 1e-6));
  return hashpoint::normalized(v);
}

// A camera somewhere on a shell around the origin, looking roughly at it,
// with random intrinsics and a field of view between ~20 and ~90 degrees.
inline Camera random_camera(std::mt19937_64& rng, int min_size = 4, int max_size = 48) {
  const Vec3 eye = random_unit(rng) * uniform(rng, 3.0, 6.0);
  const Vec3 target = Vec3{uniform(rng, -0.3, 0.3), uniform(rng, -0.3, 0.3),
                           uniform(rng, -0.3, 0.3)};
  Vec3 up = random_unit(rng);
  const Vec3 forward = hashpoint::normalized(target - eye);
  while (hashpoint::norm(hashpoint::cross(up, forward)) < 0.1) up = random_unit(rng);
  const int w = uniform_int(rng, min_size, max_size);
  const int h = uniform_int(rng, min_size, max_size);
  const double f = uniform(rng, 0.5, 2.0);
  const double half_fov = uniform(rng, 0.18, 0.8);
  const double dx = 2.0 * f * std::tan(half_fov) / w;
  const double dy = dx * uniform(rng, 0.7, 1.4);
  return Camera(eye, forward, up, f, w, h, dx, dy);
}

inline hashpoint::SceneKind random_kind(std::mt19937_64& rng) {
  switch (uniform_int(rng, 0, 2)) {
    case 0: return hashpoint::SceneKind::uniform_box;
    case 1: return hashpoint::SceneKind::sphere_surface;
    default: return hashpoint::SceneKind::parallel_planes;
  }
}

inline hashpoint::PointCloud random_scene(std::mt19937_64& rng, std::size_t n) {
  hashpoint::SceneSpec spec;
  spec.kind = random_kind(rng);
  spec.n = n;
  spec.seed = rng();
  spec.noise = uniform(rng, 0.0, 0.02);
  spec.plane_count = uniform_int(rng, 1, 3);
  spec.plane_gap = uniform(rng, 0.3, 1.0);
  spec.plane_extent = uniform(rng, 0.5, 1.5);
  return hashpoint::generate_scene(spec);
}

}  // namespace fixtures

#endif  // HASHPOINT_TESTS_FIXTURES_HPP
