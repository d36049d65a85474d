// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/hash_index.hpp"

#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hashpoint/morton.hpp"
#include "hashpoint/parallel.hpp"

namespace hashpoint {

namespace {

constexpr std::uint32_t kNotIndexed = std::numeric_limits<std::uint32_t>::max();

}  // namespace

std::optional<Pixel> HashIndex::padded_pixel_of(const Vec3& p) const {
  const auto img = camera_.project(p);
  if (!img) return std::nullopt;
  const double pu = std::floor(img->u) + pad_;
  const double pv = std::floor(img->v) + pad_;
  if (!(pu >= 0.0 && pu < padded_width_ && pv >= 0.0 && pv < padded_height_)) {
    return std::nullopt;
  }
  return Pixel{static_cast<int>(pu), static_cast<int>(pv)};
}

HashIndex HashIndex::build(const PointCloud& cloud, const Camera& camera,
                           const SearchConfig& config, BuildStats* stats) {
  return build(std::make_shared<const PointCloud>(cloud), camera, config, stats);
}

HashIndex HashIndex::build(std::shared_ptr<const PointCloud> cloud,
                           const Camera& camera, const SearchConfig& config,
                           BuildStats* stats) {
  if (!cloud) throw std::invalid_argument("hash index: null cloud");
  if (cloud->size() >= kNotIndexed) {
    throw std::invalid_argument("hash index: too many points");
  }
  HashIndex index(std::move(cloud), camera);
  index.pad_ = config.pad();
  index.padded_width_ = camera.width() + 2 * index.pad_;
  index.padded_height_ = camera.height() + 2 * index.pad_;
  const std::size_t cells = static_cast<std::size_t>(index.padded_width_) *
                            static_cast<std::size_t>(index.padded_height_);
  if (cells >= kNotIndexed) throw std::invalid_argument("hash index: image too large");
  index.table_.assign(cells, TableEntry{});

  const std::vector<Vec3>& points = index.cloud_->positions;
  const std::size_t n = points.size();
  BuildStats local;

  // Pass 1: rasterize and count.
  std::vector<std::uint32_t> keys(n, kNotIndexed);
  for (std::size_t i = 0; i < n; ++i) {
    ++local.point_touches;
    if (const auto px = index.padded_pixel_of(points[i])) {
      const auto k = static_cast<std::uint32_t>(index.key(px->u, px->v));
      keys[i] = k;
      ++index.table_[k].count;
      ++local.table_touches;
    }
  }

  // Pass 2: exclusive prefix sum in Z-order of padded pixel coordinates.
  std::uint32_t running = 0;
  for (const std::uint32_t k : morton::z_order_keys(
           static_cast<std::uint32_t>(index.padded_width_),
           static_cast<std::uint32_t>(index.padded_height_))) {
    TableEntry& e = index.table_[k];
    e.start = running;
    running += e.count;
    ++local.table_touches;
  }

  // Pass 3: scatter. Ascending i keeps each pixel's points in index order.
  index.ids_.resize(running);
  index.positions_.resize(running);
  std::vector<std::uint32_t> cursor(cells);
  for (std::size_t k = 0; k < cells; ++k) cursor[k] = index.table_[k].start;
  for (std::size_t i = 0; i < n; ++i) {
    ++local.point_touches;
    const std::uint32_t k = keys[i];
    if (k == kNotIndexed) continue;
    const std::uint32_t slot = cursor[k]++;
    index.ids_[slot] = static_cast<std::uint32_t>(i);
    index.positions_[slot] = points[i];
    ++local.table_touches;
  }

  if (stats != nullptr) *stats = local;
  return index;
}

QueryResult HashIndex::query(const Ray& ray, const SearchConfig& config,
                             QueryStats* stats) const {
  if (config.kernel_size != kernel_size()) {
    throw std::invalid_argument("hash index: kernel size differs from build config");
  }
  if (!camera_.contains(ray.pixel) || !(ray.origin == camera_.origin())) {
    throw std::invalid_argument("hash index: ray does not belong to the index camera");
  }
  const Cone cone = make_cone(camera_, ray, config);
  QueryResult result;
  QueryStats local;
  // The kernel centered on padded pixel (u + pad, v + pad) spans
  // [u, u + 2 * pad] in padded coordinates.
  const int s = kernel_size();
  for (int dv = 0; dv < s; ++dv) {
    const std::size_t row = key(ray.pixel.u, ray.pixel.v + dv);
    for (int du = 0; du < s; ++du) {
      const TableEntry& e = table_[row + static_cast<std::size_t>(du)];
      ++local.table_probes;
      if (e.count == 0) continue;
      const std::uint32_t end = e.start + e.count;
      for (std::uint32_t slot = e.start; slot < end; ++slot) {
        ++local.point_tests;
        Neighbor hit;
        if (cone.test(positions_[slot], ids_[slot], hit)) result.hits.push_back(hit);
      }
    }
  }
  result.sort();
  if (stats != nullptr) *stats = local;
  return result;
}

std::vector<QueryResult> query_batch(const HashIndex& index,
                                     std::span<const Ray> rays,
                                     const SearchConfig& config, unsigned threads) {
  std::vector<QueryResult> results(rays.size());
  parallel_for_chunks(rays.size(), threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t i = begin; i < end; ++i) results[i] = index.query(rays[i], config);
  });
  return results;
}

void write_index_stats(std::ostream& out, const HashIndex& index) {
  out << "pixel_u,pixel_v,count\n";
  for (const std::uint32_t k : morton::z_order_keys(
           static_cast<std::uint32_t>(index.padded_width()),
           static_cast<std::uint32_t>(index.padded_height()))) {
    const TableEntry& e = index.table()[k];
    if (e.count == 0) continue;
    const int pu = static_cast<int>(k % static_cast<std::uint32_t>(index.padded_width()));
    const int pv = static_cast<int>(k / static_cast<std::uint32_t>(index.padded_width()));
    out << pu - index.pad() << ',' << pv - index.pad() << ',' << e.count << '\n';
  }
}

}  // namespace hashpoint
