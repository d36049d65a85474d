// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/scene.hpp"

#include <array>
#include <cmath>
#include <random>
#include <stdexcept>

namespace hashpoint {

namespace {

double truncated_normal(std::mt19937_64& rng, double sigma) {
  if (sigma == 0.0) return 0.0;
  std::normal_distribution<double> normal(0.0, 1.0);
  double x = normal(rng);
  while (std::fabs(x) > 4.0) x = normal(rng);
  return x * sigma;
}

constexpr std::array<Vec3, 6> kPlanePalette = {{
    {0.9, 0.2, 0.2},
    {0.2, 0.7, 0.3},
    {0.2, 0.3, 0.9},
    {0.9, 0.8, 0.2},
    {0.7, 0.3, 0.8},
    {0.2, 0.8, 0.8},
}};

}  // namespace

PointCloud generate_scene(const SceneSpec& spec) {
  if (spec.kind == SceneKind::ply_file) {
    if (spec.ply_path.empty()) throw std::invalid_argument("scene: ply_file needs a path");
    return load_point_cloud(spec.ply_path);
  }
  if (spec.noise < 0.0) throw std::invalid_argument("scene: noise must be >= 0");

  std::mt19937_64 rng(spec.seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  PointCloud cloud;
  cloud.positions.reserve(spec.n);
  cloud.colors.reserve(spec.n);

  switch (spec.kind) {
    case SceneKind::uniform_box:
      for (std::size_t i = 0; i < spec.n; ++i) {
        const Vec3 p{unit(rng), unit(rng), unit(rng)};
        cloud.positions.push_back(p);
        cloud.colors.push_back((p + Vec3{1.0, 1.0, 1.0}) * 0.5);
      }
      break;
    case SceneKind::sphere_surface: {
      std::normal_distribution<double> normal(0.0, 1.0);
      for (std::size_t i = 0; i < spec.n; ++i) {
        Vec3 dir;
        do {
          dir = {normal(rng), normal(rng), normal(rng)};
        } while (!(norm(dir) > 1e-12));
        dir = normalized(dir);
        const double radius = 1.0 + truncated_normal(rng, spec.noise);
        cloud.positions.push_back(dir * radius);
        cloud.colors.push_back((dir + Vec3{1.0, 1.0, 1.0}) * 0.5);
      }
      break;
    }
    case SceneKind::parallel_planes: {
      if (spec.plane_count < 1) throw std::invalid_argument("scene: plane_count must be >= 1");
      if (!(spec.plane_extent > 0.0)) throw std::invalid_argument("scene: plane_extent must be > 0");
      const auto planes = static_cast<std::size_t>(spec.plane_count);
      for (std::size_t i = 0; i < spec.n; ++i) {
        const std::size_t plane = i % planes;
        const double z = static_cast<double>(plane) * spec.plane_gap;
        const double x = unit(rng) * spec.plane_extent;
        const double y = unit(rng) * spec.plane_extent;
        cloud.positions.push_back({x, y, z + truncated_normal(rng, spec.noise)});
        cloud.colors.push_back(kPlanePalette[plane % kPlanePalette.size()]);
      }
      break;
    }
    case SceneKind::ply_file:
      break;
  }
  return cloud;
}

SceneKind parse_scene_kind(std::string_view name) {
  if (name == "uniform_box") return SceneKind::uniform_box;
  if (name == "sphere_surface") return SceneKind::sphere_surface;
  if (name == "parallel_planes") return SceneKind::parallel_planes;
  if (name == "ply_file") return SceneKind::ply_file;
  throw std::invalid_argument("unknown scene kind: " + std::string(name));
}

std::string_view to_string(SceneKind kind) {
  switch (kind) {
    case SceneKind::uniform_box: return "uniform_box";
    case SceneKind::sphere_surface: return "sphere_surface";
    case SceneKind::parallel_planes: return "parallel_planes";
    case SceneKind::ply_file: return "ply_file";
  }
  return "unknown";
}

Camera default_camera(int width, int height) {
  const double pixel = 0.8 / static_cast<double>(width);
  return Camera({0.0, 0.0, -4.0}, {0.0, 0.0, 1.0}, {0.0, 1.0, 0.0}, 1.0, width,
                height, pixel, pixel);
}

}  // namespace hashpoint
