// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_POINT_CLOUD_HPP
#define HASHPOINT_POINT_CLOUD_HPP

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "hashpoint/vec3.hpp"

namespace hashpoint {

/// Positions with optional per-point RGB colors in [0, 1].
struct PointCloud {
  std::vector<Vec3> positions;
  std::vector<Vec3> colors;  // empty, or one per position

  std::size_t size() const { return positions.size(); }
  bool empty() const { return positions.empty(); }
  bool has_colors() const { return !colors.empty(); }

  Aabb bounds() const;

  /// Throws std::invalid_argument on non-finite coordinates or a color array
  /// whose length differs from the position array.
  void validate() const;
};

/// ASCII PLY with a vertex element carrying x, y, z and optionally red,
/// green, blue. Integer color properties are scaled from [0, 255].
PointCloud read_ply(std::istream& in);
PointCloud load_ply(const std::filesystem::path& path);
void write_ply(std::ostream& out, const PointCloud& cloud);

/// CSV with a required header row: x,y,z or x,y,z,r,g,b.
PointCloud read_csv(std::istream& in);
PointCloud load_csv(const std::filesystem::path& path);
void write_csv(std::ostream& out, const PointCloud& cloud);

/// Dispatches on extension (.ply or .csv).
PointCloud load_point_cloud(const std::filesystem::path& path);

}  // namespace hashpoint

#endif  // HASHPOINT_POINT_CLOUD_HPP
