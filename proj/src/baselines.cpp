// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace hashpoint {

QueryResult brute_force_query(const PointCloud& cloud, const Ray& ray,
                              const Camera& camera, const SearchConfig& config,
                              Footprint footprint) {
  const Cone cone = make_cone(camera, ray, config);
  const int pad = config.pad();
  QueryResult result;
  const std::vector<Vec3>& points = cloud.positions;
  for (std::size_t i = 0; i < points.size(); ++i) {
    Neighbor hit;
    if (!cone.test(points[i], static_cast<std::uint32_t>(i), hit)) continue;
    if (footprint == Footprint::kernel) {
      const auto img = camera.project(points[i]);
      if (!img) continue;
      const double du = std::floor(img->u) - ray.pixel.u;
      const double dv = std::floor(img->v) - ray.pixel.v;
      if (std::fabs(du) > pad || std::fabs(dv) > pad) continue;
    }
    result.hits.push_back(hit);
  }
  result.sort();
  return result;
}

namespace {

// Writes a score per point that is <= 0 when the point passes a slightly
// widened cone test. Plain selects so the loop vectorizes.
void cone_scores(const double* px, const double* py, const double* pz, std::size_t len,
                 Vec3 o, Vec3 d, double lo, double hi, double k2, double* out) {
  for (std::size_t j = 0; j < len; ++j) {
    const double rx = px[j] - o.x, ry = py[j] - o.y, rz = pz[j] - o.z;
    const double t = rx * d.x + ry * d.y + rz * d.z;
    const double ex = rx - d.x * t, ey = ry - d.y * t, ez = rz - d.z * t;
    const double d2 = ex * ex + ey * ey + ez * ez;
    double m = lo - t;
    const double above = t - hi;
    m = above > m ? above : m;
    const double outside = d2 - k2 * t * t;
    out[j] = outside > m ? outside : m;
  }
}

}  // namespace

std::vector<QueryResult> brute_force_batch(const PointCloud& cloud, std::span<const Ray> rays,
                                           const Camera& camera, const SearchConfig& config) {
  constexpr std::size_t kBlock = 1024;
  const std::size_t n = cloud.size();
  std::vector<Cone> cones;
  cones.reserve(rays.size());
  for (const Ray& r : rays) cones.push_back(make_cone(camera, r, config));

  std::vector<double> xs(kBlock), ys(kBlock), zs(kBlock);
  std::vector<double> score(kBlock);
  std::vector<QueryResult> out(rays.size());
  for (std::size_t base = 0; base < n; base += kBlock) {
    const std::size_t len = std::min(kBlock, n - base);
    for (std::size_t j = 0; j < len; ++j) {
      const Vec3& p = cloud.positions[base + j];
      xs[j] = p.x;
      ys[j] = p.y;
      zs[j] = p.z;
    }
    for (std::size_t r = 0; r < cones.size(); ++r) {
      const Cone& c = cones[r];
      // Loose prefilter; survivors are decided by Cone::test.
      const double lo = c.t_near - 1e-9 * (1.0 + std::fabs(c.t_near));
      const double hi = c.t_far + 1e-9 * (1.0 + std::fabs(c.t_far));
      const double k2 = c.slope * c.slope * (1.0 + 1e-9) + 1e-12;
      cone_scores(xs.data(), ys.data(), zs.data(), len, c.origin, c.direction, lo, hi, k2,
                  score.data());
      const double* mark = score.data();
      for (std::size_t j = 0; j < len; ++j) {
        if (!(mark[j] <= 0.0)) continue;
        const auto id = static_cast<std::uint32_t>(base + j);
        Neighbor hit;
        if (c.test(cloud.positions[base + j], id, hit)) out[r].hits.push_back(hit);
      }
    }
  }
  for (QueryResult& q : out) q.sort();
  return out;
}

// ---------------------------------------------------------------------------
// UniformGrid

namespace {

constexpr std::size_t kMaxGridCells = std::size_t{1} << 22;

// Per-thread visit marks so a query scans each cell once even though the
// neighborhoods of consecutive DDA cells overlap.
struct VisitMarks {
  const void* owner = nullptr;
  std::vector<std::uint32_t> stamp;
  std::uint32_t epoch = 0;

  void begin(const void* grid, std::size_t cells) {
    if (owner != grid || stamp.size() != cells) {
      owner = grid;
      stamp.assign(cells, 0);
      epoch = 0;
    }
    if (++epoch == 0) {
      std::fill(stamp.begin(), stamp.end(), 0);
      epoch = 1;
    }
  }

  bool first_visit(std::size_t cell) {
    if (stamp[cell] == epoch) return false;
    stamp[cell] = epoch;
    return true;
  }
};

thread_local VisitMarks visit_marks;

}  // namespace

UniformGrid::UniformGrid(std::shared_ptr<const PointCloud> cloud,
                         std::optional<double> cell_size)
    : cloud_(std::move(cloud)) {
  if (!cloud_) throw std::invalid_argument("grid: null cloud");
  const auto& points = cloud_->positions;
  const std::size_t n = points.size();
  if (n == 0) return;
  bounds_ = cloud_->bounds();
  const Vec3 ext = bounds_.extent();
  const double max_ext = std::max({ext.x, ext.y, ext.z});

  if (cell_size) {
    if (!(*cell_size > 0.0)) throw std::invalid_argument("grid: cell size must be positive");
    cell_size_ = *cell_size;
  } else if (max_ext > 0.0) {
    // Average occupancy over the bounding box, measured in the box's own
    // dimensionality so flat scenes do not end up with huge cells.
    double measure = 1.0;
    int dims_used = 0;
    for (int a = 0; a < 3; ++a) {
      if (ext[a] > 1e-9 * max_ext) {
        measure *= ext[a];
        ++dims_used;
      }
    }
    cell_size_ = std::pow(measure * kTargetOccupancy / static_cast<double>(n),
                          1.0 / dims_used);
  } else {
    cell_size_ = 1.0;
  }

  auto dims_for = [&](double cell) {
    std::array<int, 3> d{};
    for (int a = 0; a < 3; ++a) {
      d[a] = static_cast<int>(std::min(std::floor(ext[a] / cell) + 1.0, 1e9));
    }
    return d;
  };
  dims_ = dims_for(cell_size_);
  while (static_cast<double>(dims_[0]) * dims_[1] * dims_[2] > kMaxGridCells) {
    cell_size_ *= 1.25;
    dims_ = dims_for(cell_size_);
  }

  const std::size_t cells = static_cast<std::size_t>(dims_[0]) * dims_[1] * dims_[2];
  std::vector<std::uint32_t> cell_of_point(n);
  cell_start_.assign(cells + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    const auto c = cell_of(points[i]);
    const auto k = static_cast<std::uint32_t>(flat(c[0], c[1], c[2]));
    cell_of_point[i] = k;
    ++cell_start_[k + 1];
  }
  std::partial_sum(cell_start_.begin(), cell_start_.end(), cell_start_.begin());
  std::vector<std::uint32_t> cursor(cell_start_.begin(), cell_start_.end() - 1);
  ids_.resize(n);
  positions_.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint32_t slot = cursor[cell_of_point[i]]++;
    ids_[slot] = static_cast<std::uint32_t>(i);
    positions_[slot] = points[i];
  }
}

std::array<int, 3> UniformGrid::cell_of(const Vec3& p) const {
  std::array<int, 3> c{};
  for (int a = 0; a < 3; ++a) {
    const double rel = std::floor((p[a] - bounds_.lo[a]) / cell_size_);
    c[a] = static_cast<int>(std::clamp(rel, 0.0, static_cast<double>(dims_[a] - 1)));
  }
  return c;
}

std::span<const std::uint32_t> UniformGrid::cell_points(
    const std::array<int, 3>& cell) const {
  const std::size_t k = flat(cell[0], cell[1], cell[2]);
  return std::span<const std::uint32_t>(ids_).subspan(
      cell_start_[k], cell_start_[k + 1] - cell_start_[k]);
}

QueryResult UniformGrid::query(const Ray& ray, const Camera& camera,
                               const SearchConfig& config,
                               TraversalStats* stats) const {
  QueryResult result;
  TraversalStats local;
  const std::size_t cells = cell_count();
  if (cells == 0) {
    if (stats != nullptr) *stats = local;
    return result;
  }
  const Cone cone = make_cone(camera, ray, config);
  const double r_max = cone.max_radius();
  const int reach = static_cast<int>(std::ceil(r_max / cell_size_));

  double t0 = ray.t_near;
  double t1 = ray.t_far;
  if (!clip_segment(bounds_.expanded(r_max), ray.origin, ray.direction, t0, t1)) {
    if (stats != nullptr) *stats = local;
    return result;
  }

  VisitMarks& marks = visit_marks;
  marks.begin(this, cells);

  auto scan = [&](const std::array<int, 3>& c) {
    const int x0 = std::max(0, c[0] - reach), x1 = std::min(dims_[0] - 1, c[0] + reach);
    const int y0 = std::max(0, c[1] - reach), y1 = std::min(dims_[1] - 1, c[1] + reach);
    const int z0 = std::max(0, c[2] - reach), z1 = std::min(dims_[2] - 1, c[2] + reach);
    for (int z = z0; z <= z1; ++z) {
      for (int y = y0; y <= y1; ++y) {
        for (int x = x0; x <= x1; ++x) {
          const std::size_t k = flat(x, y, z);
          if (!marks.first_visit(k)) continue;
          ++local.nodes_visited;
          for (std::uint32_t s = cell_start_[k]; s < cell_start_[k + 1]; ++s) {
            ++local.point_tests;
            Neighbor hit;
            if (cone.test(positions_[s], ids_[s], hit)) result.hits.push_back(hit);
          }
        }
      }
    }
  };

  // 3D DDA over an unbounded lattice aligned with the grid; cells outside
  // the grid only contribute their in-grid neighborhood.
  const Vec3 start = ray.at(t0);
  std::array<int, 3> cell{};
  std::array<int, 3> step{};
  std::array<double, 3> t_max{};
  std::array<double, 3> t_delta{};
  for (int a = 0; a < 3; ++a) {
    const double d = ray.direction[a];
    const double lo = bounds_.lo[a];
    cell[a] = static_cast<int>(std::floor((start[a] - lo) / cell_size_));
    if (d > 0.0) {
      step[a] = 1;
      t_max[a] = t0 + (lo + (cell[a] + 1) * cell_size_ - start[a]) / d;
      t_delta[a] = cell_size_ / d;
    } else if (d < 0.0) {
      step[a] = -1;
      t_max[a] = t0 + (lo + cell[a] * cell_size_ - start[a]) / d;
      t_delta[a] = -cell_size_ / d;
    } else {
      step[a] = 0;
      t_max[a] = std::numeric_limits<double>::infinity();
      t_delta[a] = std::numeric_limits<double>::infinity();
    }
  }
  while (true) {
    scan(cell);
    int axis = 0;
    if (t_max[1] < t_max[axis]) axis = 1;
    if (t_max[2] < t_max[axis]) axis = 2;
    if (t_max[axis] > t1) break;
    cell[axis] += step[axis];
    t_max[axis] += t_delta[axis];
  }

  result.sort();
  if (stats != nullptr) *stats = local;
  return result;
}

// ---------------------------------------------------------------------------
// KdTree

KdTree::KdTree(std::shared_ptr<const PointCloud> cloud, std::size_t leaf_size)
    : cloud_(std::move(cloud)), leaf_size_(std::max<std::size_t>(1, leaf_size)) {
  if (!cloud_) throw std::invalid_argument("kdtree: null cloud");
  const std::size_t n = cloud_->size();
  if (n == 0) return;
  ids_.resize(n);
  std::iota(ids_.begin(), ids_.end(), 0u);
  nodes_.reserve(2 * (n / leaf_size_ + 1));
  build_node(0, static_cast<std::uint32_t>(n));
  positions_.resize(n);
  for (std::size_t s = 0; s < n; ++s) positions_[s] = cloud_->positions[ids_[s]];
}

std::int32_t KdTree::build_node(std::uint32_t begin, std::uint32_t end) {
  const auto& points = cloud_->positions;
  Node node;
  node.begin = begin;
  node.end = end;
  for (std::uint32_t s = begin; s < end; ++s) node.box.extend(points[ids_[s]]);
  const auto index = static_cast<std::int32_t>(nodes_.size());
  nodes_.push_back(node);

  const Vec3 ext = node.box.extent();
  int axis = 0;
  if (ext.y > ext[axis]) axis = 1;
  if (ext.z > ext[axis]) axis = 2;
  if (end - begin <= leaf_size_ || !(ext[axis] > 0.0)) return index;

  const std::uint32_t mid = begin + (end - begin) / 2;
  std::nth_element(ids_.begin() + begin, ids_.begin() + mid, ids_.begin() + end,
                   [&](std::uint32_t a, std::uint32_t b) {
                     const double pa = points[a][axis];
                     const double pb = points[b][axis];
                     return pa != pb ? pa < pb : a < b;
                   });
  const std::int32_t left = build_node(begin, mid);
  const std::int32_t right = build_node(mid, end);
  nodes_[index].left = left;
  nodes_[index].right = right;
  return index;
}

QueryResult KdTree::query(const Ray& ray, const Camera& camera,
                          const SearchConfig& config, TraversalStats* stats) const {
  QueryResult result;
  TraversalStats local;
  if (!nodes_.empty()) {
    const Cone cone = make_cone(camera, ray, config);
    const double r_max = cone.max_radius();
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      ++local.nodes_visited;
      double t0 = ray.t_near;
      double t1 = ray.t_far;
      if (!clip_segment(node.box.expanded(r_max), ray.origin, ray.direction, t0, t1)) {
        continue;
      }
      if (node.leaf()) {
        for (std::uint32_t s = node.begin; s < node.end; ++s) {
          ++local.point_tests;
          Neighbor hit;
          if (cone.test(positions_[s], ids_[s], hit)) result.hits.push_back(hit);
        }
      } else {
        stack.push_back(node.right);
        stack.push_back(node.left);
      }
    }
    result.sort();
  }
  if (stats != nullptr) *stats = local;
  return result;
}

// ---------------------------------------------------------------------------
// Octree

Octree::Octree(std::shared_ptr<const PointCloud> cloud, std::size_t leaf_capacity,
               int max_depth)
    : cloud_(std::move(cloud)),
      leaf_capacity_(std::max<std::size_t>(1, leaf_capacity)),
      max_depth_(max_depth) {
  if (!cloud_) throw std::invalid_argument("octree: null cloud");
  const std::size_t n = cloud_->size();
  if (n == 0) return;
  ids_.resize(n);
  std::iota(ids_.begin(), ids_.end(), 0u);
  Node root;
  root.box = cloud_->bounds();
  root.begin = 0;
  root.end = static_cast<std::uint32_t>(n);
  nodes_.push_back(root);
  build_node(0);
  positions_.resize(n);
  for (std::size_t s = 0; s < n; ++s) positions_[s] = cloud_->positions[ids_[s]];
}

void Octree::build_node(std::size_t node_index) {
  const Node node = nodes_[node_index];
  if (node.end - node.begin <= leaf_capacity_ || node.depth >= max_depth_) return;

  const auto& points = cloud_->positions;
  const Vec3 center = (node.box.lo + node.box.hi) * 0.5;
  auto octant = [&](const Vec3& p) {
    return (p.x >= center.x ? 1 : 0) | (p.y >= center.y ? 2 : 0) |
           (p.z >= center.z ? 4 : 0);
  };

  // Stable counting partition keeps ascending ids inside each child.
  std::array<std::uint32_t, 9> offsets{};
  for (std::uint32_t s = node.begin; s < node.end; ++s) {
    ++offsets[octant(points[ids_[s]]) + 1];
  }
  std::partial_sum(offsets.begin(), offsets.end(), offsets.begin());
  std::vector<std::uint32_t> scratch(node.end - node.begin);
  std::array<std::uint32_t, 8> cursor{};
  std::copy(offsets.begin(), offsets.end() - 1, cursor.begin());
  for (std::uint32_t s = node.begin; s < node.end; ++s) {
    scratch[cursor[octant(points[ids_[s]])]++] = ids_[s];
  }
  std::copy(scratch.begin(), scratch.end(), ids_.begin() + node.begin);

  const auto first = static_cast<std::int32_t>(nodes_.size());
  nodes_[node_index].first_child = first;
  for (int o = 0; o < 8; ++o) {
    Node child;
    child.depth = node.depth + 1;
    child.begin = node.begin + offsets[o];
    child.end = node.begin + offsets[o + 1];
    for (int a = 0; a < 3; ++a) {
      const bool upper = (o >> a) & 1;
      child.box.lo[a] = upper ? center[a] : node.box.lo[a];
      child.box.hi[a] = upper ? node.box.hi[a] : center[a];
    }
    nodes_.push_back(child);
  }
  for (int o = 0; o < 8; ++o) build_node(static_cast<std::size_t>(first + o));
}

QueryResult Octree::query(const Ray& ray, const Camera& camera,
                          const SearchConfig& config, TraversalStats* stats) const {
  QueryResult result;
  TraversalStats local;
  if (!nodes_.empty()) {
    const Cone cone = make_cone(camera, ray, config);
    const double r_max = cone.max_radius();
    std::vector<std::int32_t> stack{0};
    while (!stack.empty()) {
      const Node& node = nodes_[stack.back()];
      stack.pop_back();
      if (node.begin == node.end) continue;
      ++local.nodes_visited;
      double t0 = ray.t_near;
      double t1 = ray.t_far;
      if (!clip_segment(node.box.expanded(r_max), ray.origin, ray.direction, t0, t1)) {
        continue;
      }
      if (node.leaf()) {
        for (std::uint32_t s = node.begin; s < node.end; ++s) {
          ++local.point_tests;
          Neighbor hit;
          if (cone.test(positions_[s], ids_[s], hit)) result.hits.push_back(hit);
        }
      } else {
        for (int o = 7; o >= 0; --o) stack.push_back(node.first_child + o);
      }
    }
    result.sort();
  }
  if (stats != nullptr) *stats = local;
  return result;
}

}  // namespace hashpoint
