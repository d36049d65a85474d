// SPDX-License-Identifier: Apache-2.0

#include <algorithm>
#include <random>
#include <set>

#include "doctest.h"
#include "fixtures.hpp"
#include "hashpoint/baselines.hpp"
#include "hashpoint/scene.hpp"
#include "oracles.hpp"

using namespace hashpoint;

namespace {

std::vector<std::uint32_t> sorted_ids(const QueryResult& r) {
  auto ids = r.ids();
  std::sort(ids.begin(), ids.end());
  return ids;
}

std::vector<std::uint32_t> oracle_ids(const std::vector<oracle::Hit>& hits) {
  std::vector<std::uint32_t> ids;
  for (const auto& h : hits) ids.push_back(h.id);
  return ids;
}

}  // namespace

TEST_CASE("brute force edge cases") {
  const Camera cam = default_camera(8, 8);
  const SearchConfig cfg = SearchConfig::from_scale(cam, 1.0);
  const Ray ray = make_ray(cam, {4, 4}, 1.0, 3.0);
  CHECK(brute_force_query(PointCloud{}, ray, cam, cfg).empty());
  PointCloud far;
  far.positions = {ray.at(3.5), ray.at(0.5), ray.at(10.0)};
  CHECK(brute_force_query(far, ray, cam, cfg).empty());
}

TEST_CASE("all structures equal the unrestricted oracle") {
  std::mt19937_64 rng(1234);
  for (int scene = 0; scene < 8; ++scene) {
    auto cloud = std::make_shared<const PointCloud>(
        fixtures::random_scene(rng, static_cast<std::size_t>(fixtures::uniform_int(rng, 1, 4000))));
    const Camera cam = fixtures::random_camera(rng, 6, 32);
    const bool approx = scene % 3 == 2;
    const SearchConfig cfg = SearchConfig::from_scale(
        cam, fixtures::uniform(rng, 0.5, 4.0),
        approx ? RadiusFormula::approximate : RadiusFormula::exact);
    const UniformGrid grid(cloud);
    const KdTree kd(cloud);
    const Octree oct(cloud);
    std::vector<Ray> rays;
    for (int i = 0; i < 60; ++i) {
      const Pixel px{fixtures::uniform_int(rng, 0, cam.width() - 1),
                     fixtures::uniform_int(rng, 0, cam.height() - 1)};
      rays.push_back(make_ray(cam, px, fixtures::uniform(rng, 0.2, 3.0), 12.0));
    }
    const auto batch = brute_force_batch(*cloud, rays, cam, cfg);
    for (std::size_t i = 0; i < rays.size(); ++i) {
      const Ray& ray = rays[i];
      const auto want = oracle_ids(oracle::cone_hits(*cloud, cam, ray.pixel.u, ray.pixel.v,
                                                     ray.t_near, ray.t_far, cfg.kernel_radius,
                                                     approx, -1));
      const QueryResult brute = brute_force_query(*cloud, ray, cam, cfg);
      CHECK(sorted_ids(brute) == want);
      CHECK(batch[i] == brute);
      CHECK(grid.query(ray, cam, cfg) == brute);
      CHECK(kd.query(ray, cam, cfg) == brute);
      CHECK(oct.query(ray, cam, cfg) == brute);
    }
  }
}

TEST_CASE("uniform grid layout") {
  SceneSpec spec;
  spec.n = 8000;
  auto cloud = std::make_shared<const PointCloud>(generate_scene(spec));
  const UniformGrid grid(cloud);
  // Average occupancy near 8 points per cell.
  const double occupancy = 8000.0 / static_cast<double>(grid.cell_count());
  CHECK(occupancy > 4.0);
  CHECK(occupancy <= 8.0 + 1e-9);

  std::size_t total = 0;
  for (int z = 0; z < grid.dims()[2]; ++z) {
    for (int y = 0; y < grid.dims()[1]; ++y) {
      for (int x = 0; x < grid.dims()[0]; ++x) {
        for (const std::uint32_t id : grid.cell_points({x, y, z})) {
          CHECK(grid.cell_of(cloud->positions[id]) == std::array<int, 3>{x, y, z});
          ++total;
        }
      }
    }
  }
  CHECK(total == cloud->size());
  CHECK(grid.cell_of(grid.bounds().hi) ==
        std::array<int, 3>{grid.dims()[0] - 1, grid.dims()[1] - 1, grid.dims()[2] - 1});
}

TEST_CASE("single-cell grid behaves like brute force") {
  std::mt19937_64 rng(8);
  auto cloud = std::make_shared<const PointCloud>(fixtures::random_scene(rng, 500));
  const UniformGrid grid(cloud, 100.0);
  CHECK(grid.cell_count() == 1);
  const Camera cam = default_camera(16, 16);
  const SearchConfig cfg = SearchConfig::from_scale(cam, 2.0);
  for (const Ray& ray : generate_rays(cam, 1.0, 10.0)) {
    CHECK(grid.query(ray, cam, cfg) == brute_force_query(*cloud, ray, cam, cfg));
  }
}

TEST_CASE("grid skips cells far from the ray") {
  PointCloud pc;
  for (int i = 0; i < 64; ++i) pc.positions.push_back({-1.0 + i * 0.001, -1.0, 0.0});
  for (int i = 0; i < 64; ++i) pc.positions.push_back({1.0 - i * 0.001, 1.0, 0.0});
  auto cloud = std::make_shared<const PointCloud>(pc);
  const UniformGrid grid(cloud);
  const Camera cam = default_camera(16, 16);
  const SearchConfig cfg = SearchConfig::from_scale(cam, 1.0);
  // Top-right pixel looks toward +x +y.
  const Ray ray = make_ray(cam, {15, 0}, 1.0, 10.0);
  TraversalStats stats;
  const QueryResult r = grid.query(ray, cam, cfg, &stats);
  CHECK(r == brute_force_query(pc, ray, cam, cfg));
  CHECK(stats.point_tests < 64);
}

TEST_CASE("trees") {
  std::mt19937_64 rng(77);
  auto cloud = std::make_shared<const PointCloud>(fixtures::random_scene(rng, 3000));
  const KdTree kd(cloud);
  const Octree oct(cloud);

  SUBCASE("every point sits in exactly one leaf with a containing box") {
    std::multiset<std::uint32_t> kd_seen;
    for (const auto& node : kd.nodes()) {
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        CHECK(node.box.contains(cloud->positions[kd.ids()[i]]));
        if (node.leaf()) kd_seen.insert(kd.ids()[i]);
      }
      if (node.leaf()) CHECK(node.end - node.begin <= KdTree::kLeafSize);
    }
    CHECK(kd_seen.size() == cloud->size());
    CHECK(std::set<std::uint32_t>(kd_seen.begin(), kd_seen.end()).size() == cloud->size());

    std::multiset<std::uint32_t> oct_seen;
    for (const auto& node : oct.nodes()) {
      if (!node.leaf()) {
        // Children partition the parent: volumes add up and ranges tile it.
        double volume = 0.0;
        std::uint32_t cursor = node.begin;
        for (int c = 0; c < 8; ++c) {
          const auto& child = oct.nodes()[static_cast<std::size_t>(node.first_child + c)];
          const Vec3 e = child.box.extent();
          volume += e.x * e.y * e.z;
          CHECK(child.begin == cursor);
          cursor = child.end;
        }
        CHECK(cursor == node.end);
        const Vec3 e = node.box.extent();
        CHECK(volume == doctest::Approx(e.x * e.y * e.z).epsilon(1e-12));
        continue;
      }
      CHECK((node.end - node.begin <= Octree::kLeafCapacity || node.depth == Octree::kMaxDepth));
      for (std::uint32_t i = node.begin; i < node.end; ++i) {
        CHECK(node.box.contains(cloud->positions[oct.ids()[i]]));
        oct_seen.insert(oct.ids()[i]);
      }
    }
    CHECK(oct_seen.size() == cloud->size());
  }

  SUBCASE("builds are deterministic") {
    const KdTree kd2(cloud);
    const Octree oct2(cloud);
    CHECK(std::ranges::equal(kd.ids(), kd2.ids()));
    CHECK(std::ranges::equal(oct.ids(), oct2.ids()));
  }

  SUBCASE("a ray missing the root box visits only the root") {
    const Camera cam({10, 10, 10}, {0, 0, 1}, {0, 1, 0}, 1.0, 4, 4, 0.01, 0.01);
    const SearchConfig cfg = SearchConfig::from_scale(cam, 1.0);
    const Ray ray = make_ray(cam, {2, 2}, 1.0, 30.0);
    TraversalStats ks;
    TraversalStats os;
    CHECK(kd.query(ray, cam, cfg, &ks).empty());
    CHECK(oct.query(ray, cam, cfg, &os).empty());
    CHECK(ks.nodes_visited == 1);
    CHECK(os.nodes_visited == 1);
    CHECK(ks.point_tests == 0);
  }
}

TEST_CASE("single-point trees") {
  PointCloud pc;
  pc.positions = {{0.0, 0.0, 0.0}};
  auto cloud = std::make_shared<const PointCloud>(pc);
  const KdTree kd(cloud);
  const Octree oct(cloud);
  const Camera cam = default_camera(9, 9);
  const SearchConfig cfg = SearchConfig::from_scale(cam, 1.0);
  const Ray hit = make_ray(cam, {4, 4}, 1.0, 10.0);
  const Ray miss = make_ray(cam, {0, 0}, 1.0, 10.0);
  CHECK(kd.query(hit, cam, cfg).size() == 1);
  CHECK(oct.query(hit, cam, cfg).size() == 1);
  CHECK(kd.query(miss, cam, cfg).empty());
  CHECK(oct.query(miss, cam, cfg).empty());
}
