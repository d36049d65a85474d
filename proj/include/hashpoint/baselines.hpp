// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_BASELINES_HPP
#define HASHPOINT_BASELINES_HPP

#include <array>
#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hashpoint/geometry.hpp"
#include "hashpoint/point_cloud.hpp"
#include "hashpoint/query.hpp"

namespace hashpoint {

/// Whether the brute-force oracle also requires a point to rasterize inside
/// the ray's kernel_size x kernel_size pixel block, mirroring what the hash
/// index can see.
enum class Footprint { unrestricted, kernel };

/// Exhaustive cone query over every point of the cloud.
QueryResult brute_force_query(const PointCloud& cloud, const Ray& ray,
                              const Camera& camera, const SearchConfig& config,
                              Footprint footprint = Footprint::unrestricted);

/// Unrestricted brute force over many rays at once. Still tests every
/// (point, ray) pair, but walks the points in cache-sized blocks so the cloud
/// is streamed from memory once per block of rays instead of once per ray.
/// Results equal brute_force_query for every ray.
std::vector<QueryResult> brute_force_batch(const PointCloud& cloud, std::span<const Ray> rays,
                                           const Camera& camera, const SearchConfig& config);

/// Counters for the 3D structures' traversals.
struct TraversalStats {
  std::uint64_t nodes_visited = 0;  // grid cells or tree nodes
  std::uint64_t point_tests = 0;
};

/**
 * Uniform voxel grid. Queries walk the ray's center line through the cells
 * with a 3D DDA and scan the cells within ceil(r_max / cell_size) of each
 * visited cell, where r_max is the cone radius at t_far.
 */
class UniformGrid {
 public:
  static constexpr double kTargetOccupancy = 8.0;

  /// With no cell size given, picks one so that the average occupancy over
  /// the bounding box is about kTargetOccupancy.
  explicit UniformGrid(std::shared_ptr<const PointCloud> cloud,
                       std::optional<double> cell_size = std::nullopt);

  QueryResult query(const Ray& ray, const Camera& camera,
                    const SearchConfig& config,
                    TraversalStats* stats = nullptr) const;

  double cell_size() const { return cell_size_; }
  const std::array<int, 3>& dims() const { return dims_; }
  std::size_t cell_count() const { return cell_start_.empty() ? 0 : cell_start_.size() - 1; }
  const Aabb& bounds() const { return bounds_; }

  /// Cell holding point p: floor((p - lo) / cell_size) clamped to the grid.
  std::array<int, 3> cell_of(const Vec3& p) const;

  /// Point ids stored in a cell, ascending.
  std::span<const std::uint32_t> cell_points(const std::array<int, 3>& cell) const;

 private:
  std::size_t flat(int x, int y, int z) const {
    return static_cast<std::size_t>(x) +
           static_cast<std::size_t>(dims_[0]) *
               (static_cast<std::size_t>(y) +
                static_cast<std::size_t>(dims_[1]) * static_cast<std::size_t>(z));
  }

  std::shared_ptr<const PointCloud> cloud_;
  Aabb bounds_;
  double cell_size_ = 1.0;
  std::array<int, 3> dims_{0, 0, 0};
  std::vector<std::uint32_t> cell_start_;
  std::vector<std::uint32_t> ids_;
  std::vector<Vec3> positions_;
};

/// k-d tree with median splits on the widest axis of each node's bounds.
class KdTree {
 public:
  static constexpr std::size_t kLeafSize = 16;

  explicit KdTree(std::shared_ptr<const PointCloud> cloud,
                  std::size_t leaf_size = kLeafSize);

  /// Prunes nodes whose bounds, grown by r_max, miss the ray segment
  /// [t_near, t_far].
  QueryResult query(const Ray& ray, const Camera& camera,
                    const SearchConfig& config,
                    TraversalStats* stats = nullptr) const;

  struct Node {
    Aabb box;  // tight bounds of the node's points
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;
    std::int32_t right = -1;
    bool leaf() const { return left < 0; }
  };

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const std::uint32_t> ids() const { return ids_; }

 private:
  std::int32_t build_node(std::uint32_t begin, std::uint32_t end);

  std::shared_ptr<const PointCloud> cloud_;
  std::size_t leaf_size_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> ids_;
  std::vector<Vec3> positions_;
};

/// Octree splitting each node's box at its center into eight children.
class Octree {
 public:
  static constexpr std::size_t kLeafCapacity = 16;
  static constexpr int kMaxDepth = 12;

  explicit Octree(std::shared_ptr<const PointCloud> cloud,
                  std::size_t leaf_capacity = kLeafCapacity,
                  int max_depth = kMaxDepth);

  QueryResult query(const Ray& ray, const Camera& camera,
                    const SearchConfig& config,
                    TraversalStats* stats = nullptr) const;

  struct Node {
    Aabb box;  // partition cell, not tight bounds
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t first_child = -1;  // eight consecutive nodes
    int depth = 0;
    bool leaf() const { return first_child < 0; }
  };

  std::span<const Node> nodes() const { return nodes_; }
  std::span<const std::uint32_t> ids() const { return ids_; }

 private:
  void build_node(std::size_t node_index);

  std::shared_ptr<const PointCloud> cloud_;
  std::size_t leaf_capacity_;
  int max_depth_;
  std::vector<Node> nodes_;
  std::vector<std::uint32_t> ids_;
  std::vector<Vec3> positions_;
};

}  // namespace hashpoint

#endif  // HASHPOINT_BASELINES_HPP
