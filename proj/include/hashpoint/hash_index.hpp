// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_HASH_INDEX_HPP
#define HASHPOINT_HASH_INDEX_HPP

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hashpoint/geometry.hpp"
#include "hashpoint/point_cloud.hpp"
#include "hashpoint/query.hpp"

namespace hashpoint {

/// Range of the reordered point list that falls into one pixel.
struct TableEntry {
  std::uint32_t start = 0;
  std::uint32_t count = 0;
  friend bool operator==(const TableEntry&, const TableEntry&) = default;
};

/// Instrumentation counters filled by HashIndex::build.
struct BuildStats {
  std::uint64_t point_touches = 0;  // per-point visits across all passes
  std::uint64_t table_touches = 0;  // table entries read or written
};

/// Instrumentation counters filled by HashIndex::query.
struct QueryStats {
  std::uint64_t table_probes = 0;  // kernel pixels looked up
  std::uint64_t point_tests = 0;   // cone predicate evaluations
};

/**
 * Rasterized point index keyed by pixel.
 *
 * Every point is projected through the build camera onto an image padded by
 * pad = (kernel_size - 1) / 2 pixels on each side. The point list is then
 * reordered so points of one pixel are contiguous and pixels follow the
 * Z-order curve of their padded coordinates. The table is direct-addressed:
 * entry (pu + pv * padded_width) holds the pixel's range of the list.
 *
 * Points behind the camera or outside the padded image are not indexed.
 * Immutable after build; concurrent queries are safe.
 */
class HashIndex {
 public:
  static HashIndex build(std::shared_ptr<const PointCloud> cloud,
                         const Camera& camera, const SearchConfig& config,
                         BuildStats* stats = nullptr);

  /// Copies the cloud into shared storage.
  static HashIndex build(const PointCloud& cloud, const Camera& camera,
                         const SearchConfig& config,
                         BuildStats* stats = nullptr);

  /// Points inside the cone of `ray` found in its kernel_size^2 pixel block.
  /// Throws std::invalid_argument for rays not generated by the build camera
  /// or a config whose kernel size differs from the build config.
  QueryResult query(const Ray& ray, const SearchConfig& config,
                    QueryStats* stats = nullptr) const;

  const Camera& camera() const { return camera_; }
  const PointCloud& cloud() const { return *cloud_; }
  int kernel_size() const { return 2 * pad_ + 1; }
  int pad() const { return pad_; }
  int padded_width() const { return padded_width_; }
  int padded_height() const { return padded_height_; }

  std::span<const TableEntry> table() const { return table_; }
  std::span<const std::uint32_t> reordered_ids() const { return ids_; }
  std::span<const Vec3> reordered_positions() const { return positions_; }

  /// Entry for an image pixel; coordinates may extend pad pixels outside
  /// the image.
  const TableEntry& entry(int u, int v) const {
    return table_[key(u + pad_, v + pad_)];
  }

  std::size_t indexed_count() const { return ids_.size(); }

  /// Padded pixel the point rasterizes to, if it is indexable.
  std::optional<Pixel> padded_pixel_of(const Vec3& p) const;

 private:
  std::size_t key(int pu, int pv) const {
    return static_cast<std::size_t>(pu) +
           static_cast<std::size_t>(pv) * static_cast<std::size_t>(padded_width_);
  }

  std::shared_ptr<const PointCloud> cloud_;
  Camera camera_;
  int pad_ = 0;
  int padded_width_ = 0;
  int padded_height_ = 0;
  std::vector<TableEntry> table_;
  std::vector<std::uint32_t> ids_;
  std::vector<Vec3> positions_;

  HashIndex(std::shared_ptr<const PointCloud> cloud, const Camera& camera)
      : cloud_(std::move(cloud)), camera_(camera) {}
};

/// Per-ray queries in input order. threads > 1 splits the batch into
/// contiguous chunks run on worker threads.
std::vector<QueryResult> query_batch(const HashIndex& index,
                                     std::span<const Ray> rays,
                                     const SearchConfig& config,
                                     unsigned threads = 1);

/// CSV `pixel_u,pixel_v,count` over non-empty pixels, in storage order.
/// Coordinates are image pixels, so padded border pixels are negative or
/// beyond the image size.
void write_index_stats(std::ostream& out, const HashIndex& index);

}  // namespace hashpoint

#endif  // HASHPOINT_HASH_INDEX_HPP
