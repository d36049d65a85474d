// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_SCENE_HPP
#define HASHPOINT_SCENE_HPP

#include <cstdint>
#include <string>
#include <string_view>

#include "hashpoint/geometry.hpp"
#include "hashpoint/point_cloud.hpp"

namespace hashpoint {

enum class SceneKind { uniform_box, sphere_surface, parallel_planes, ply_file };

/**
 * Synthetic scene description. Generated geometry is centered on the
 * origin:
 *   uniform_box      points uniform in [-1, 1]^3, colored by position;
 *   sphere_surface   unit sphere, radial noise truncated at 4 sigma;
 *   parallel_planes  planes z = i * plane_gap, |x|, |y| <= plane_extent,
 *                    one flat color per plane;
 *   ply_file         points read from ply_path (.ply or .csv).
 */
struct SceneSpec {
  SceneKind kind = SceneKind::uniform_box;
  std::size_t n = 0;
  std::uint64_t seed = 1;
  double noise = 0.0;
  int plane_count = 2;
  double plane_gap = 1.5;
  double plane_extent = 2.5;
  std::string ply_path;
};

PointCloud generate_scene(const SceneSpec& spec);

SceneKind parse_scene_kind(std::string_view name);
std::string_view to_string(SceneKind kind);

/// Pinhole camera at (0, 0, -4) looking down +z with f = 1 and square
/// pixels; the horizontal field of view spans tan = +-0.4.
Camera default_camera(int width, int height);

}  // namespace hashpoint

#endif  // HASHPOINT_SCENE_HPP
