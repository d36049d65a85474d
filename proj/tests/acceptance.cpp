// SPDX-License-Identifier: Apache-2.0
//
// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// non-zero when any selected criterion fails. `--only N` runs one of them.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <memory>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fixtures.hpp"
#include "hashpoint/baselines.hpp"
#include "hashpoint/bench.hpp"
#include "hashpoint/hash_index.hpp"
#include "hashpoint/renderer.hpp"
#include "hashpoint/sampler.hpp"
#include "hashpoint/scene.hpp"
#include "oracles.hpp"

using namespace hashpoint;

namespace {

// Tolerances.
constexpr double kValueTol = 1e-12;         // t and dist against the oracle
constexpr double kExactRadiusTol = 1e-12;   // relative
constexpr double kApproxRadiusTol = 1e-3;   // relative, approx vs exact
constexpr double kHalfAngleLimit = std::numbers::pi / 180.0;  // 1 degree
constexpr double kWeightTol = 1e-12;
constexpr double kWeightSumTol = 1e-9;
constexpr double kRenderWeightTol = 1e-9;
constexpr double kColorTol = 1e-6;
constexpr double kOracleBudgetSeconds = 120.0;
constexpr double kBruteSpeedup = 5.0;
constexpr double kTouchFlatness = 0.05;

struct Outcome {
  bool pass = true;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

// Compares a structure's result with oracle hits (sorted by id).
bool same_hits(const QueryResult& got, const std::vector<oracle::Hit>& want, double& worst) {
  std::vector<Neighbor> hits = got.hits;
  std::sort(hits.begin(), hits.end(),
            [](const Neighbor& a, const Neighbor& b) { return a.id < b.id; });
  if (hits.size() != want.size()) return false;
  for (std::size_t i = 0; i < hits.size(); ++i) {
    if (hits[i].id != want[i].id) return false;
    worst = std::max({worst, std::fabs(hits[i].t - want[i].t),
                      std::fabs(hits[i].dist - want[i].dist)});
  }
  return true;
}

Outcome oracle_equivalence() {
  const auto start = Clock::now();
  std::mt19937_64 rng(20240101);
  std::size_t mismatched = 0;
  std::size_t rays_total = 0;
  std::size_t hits_total = 0;
  double worst = 0.0;
  for (int scene = 0; scene < 100; ++scene) {
    const auto n = static_cast<std::size_t>(fixtures::uniform_int(rng, 1, 5000));
    auto cloud = std::make_shared<const PointCloud>(fixtures::random_scene(rng, n));
    const Camera cam = fixtures::random_camera(rng, 4, 48);
    const bool approx = fixtures::uniform_int(rng, 0, 1) == 1;
    const SearchConfig cfg = SearchConfig::from_scale(
        cam, fixtures::uniform(rng, 0.5, 4.0),
        approx ? RadiusFormula::approximate : RadiusFormula::exact);
    const HashIndex index = HashIndex::build(cloud, cam, cfg);
    const UniformGrid grid(cloud);
    const KdTree kd(cloud);
    const Octree oct(cloud);

    const int m = std::min<int>(fixtures::uniform_int(rng, 1, 1000),
                                static_cast<int>(cam.pixel_count()));
    for (int i = 0; i < m; ++i) {
      const Pixel px{fixtures::uniform_int(rng, 0, cam.width() - 1),
                     fixtures::uniform_int(rng, 0, cam.height() - 1)};
      const double t_near = fixtures::uniform(rng, 0.2, 3.0);
      const Ray ray = make_ray(cam, px, t_near, t_near + fixtures::uniform(rng, 1.0, 10.0));
      const auto all = oracle::cone_hits(*cloud, cam, px.u, px.v, ray.t_near, ray.t_far,
                                         cfg.kernel_radius, approx, -1);
      std::vector<oracle::Hit> footprint;
      for (const oracle::Hit& h : all) {
        long pu = 0;
        long pv = 0;
        if (!oracle::pixel_of(cam, cloud->positions[h.id], pu, pv)) continue;
        if (std::labs(pu - px.u) <= cfg.pad() && std::labs(pv - px.v) <= cfg.pad()) {
          footprint.push_back(h);
        }
      }
      bool ok = same_hits(index.query(ray, cfg), footprint, worst);
      ok = same_hits(grid.query(ray, cam, cfg), all, worst) && ok;
      ok = same_hits(kd.query(ray, cam, cfg), all, worst) && ok;
      ok = same_hits(oct.query(ray, cam, cfg), all, worst) && ok;
      mismatched += ok ? 0 : 1;
      ++rays_total;
      hits_total += all.size();
    }
  }
  const double elapsed = seconds_since(start);
  Outcome out;
  out.pass = mismatched == 0 && worst <= kValueTol && elapsed < kOracleBudgetSeconds;
  out.detail = fmt("100 scenes, %zu rays, %zu oracle hits, %zu mismatched rays, "
                   "max |dt|,|dd| %.3g, %.1f s",
                   rays_total, hits_total, mismatched, worst, elapsed);
  return out;
}

Outcome radius_formulas() {
  std::mt19937_64 rng(7);
  int drawn = 0;
  int accepted = 0;
  double worst_exact = 0.0;
  double worst_approx = 0.0;
  double worst_angle = 0.0;
  double worst_bound_ratio = 0.0;
  int approx_failures = 0;
  while (accepted < 1000) {
    const Camera cam = fixtures::random_camera(rng, 16, 512);
    const Pixel px{fixtures::uniform_int(rng, 0, cam.width() - 1),
                   fixtures::uniform_int(rng, 0, cam.height() - 1)};
    const Ray ray = make_ray(cam, px, 0.1, 50.0);
    const double kernel = fixtures::uniform(rng, 0.25, 4.0) * pixel_disc_radius(cam);
    const double t = fixtures::uniform(rng, 0.1, 50.0);
    const double exact = adaptive_radius_exact(cam, ray, t, kernel);
    const auto want = static_cast<double>(oracle::radius_exact(cam, px.u, px.v, t, kernel));
    worst_exact = std::max(worst_exact, oracle::relative_error(exact, want));
    ++drawn;

    const auto phi = static_cast<double>(oracle::subtended_half_angle(cam, px.u, px.v, kernel));
    if (phi >= kHalfAngleLimit) continue;
    ++accepted;
    const double err = oracle::relative_error(adaptive_radius_approx(cam, ray, t, kernel), exact);
    if (err > kApproxRadiusTol) {
      ++approx_failures;
      if (err > worst_approx) worst_angle = phi;
    }
    worst_approx = std::max(worst_approx, err);
    // First-order size of the approximation error: phi * tan(off-axis angle).
    const auto [x, y] = oracle::plane_offset(cam, px.u, px.v);
    const double tan_off_axis = static_cast<double>(std::hypot(x, y)) / cam.focal_length();
    const double bound = phi * tan_off_axis + phi * phi;
    worst_bound_ratio = std::max(worst_bound_ratio, bound > 0 ? err / bound : 0.0);
  }
  Outcome out;
  out.pass = worst_exact <= kExactRadiusTol && worst_approx <= kApproxRadiusTol;
  out.detail = fmt("exact: %d configs, max rel err %.3g; approx (half-angle < 1 deg): "
                   "%d configs, max rel err %.3g, %d above 1e-3 (worst at half-angle %.3f deg), "
                   "err / (phi tan(theta) + phi^2) <= %.3f",
                   drawn, worst_exact, accepted, worst_approx, approx_failures,
                   worst_angle * 180.0 / std::numbers::pi, worst_bound_ratio);
  return out;
}

Outcome weight_algebra() {
  std::mt19937_64 rng(3);
  double worst = 0.0;
  double worst_sum = 0.0;
  for (int trial = 0; trial < 10000; ++trial) {
    const int len = fixtures::uniform_int(rng, 1, 20);
    std::vector<SampleCandidate> c(static_cast<std::size_t>(len));
    std::vector<double> alpha;
    for (int j = 0; j < len; ++j) {
      double a = fixtures::uniform(rng, 0.0, 1.0);
      const int special = fixtures::uniform_int(rng, 0, 39);
      if (special == 0) a = 0.0;
      if (special == 1) a = 1.0;
      c[static_cast<std::size_t>(j)].t = j;
      c[static_cast<std::size_t>(j)].alpha = a;
      alpha.push_back(a);
    }
    occlusion_weights(c);
    const auto naive = oracle::naive_weights(alpha);
    long double sum = 0.0L;
    long double keep = 1.0L;
    for (int j = 0; j < len; ++j) {
      const auto i = static_cast<std::size_t>(j);
      worst = std::max(worst, std::fabs(c[i].weight - naive[i]));
      sum += c[i].weight;
      keep *= 1.0L - alpha[i];
    }
    worst_sum = std::max(worst_sum, static_cast<double>(std::fabs(sum - (1.0L - keep))));
  }
  Outcome out;
  out.pass = worst <= kWeightTol && worst_sum <= kWeightSumTol;
  out.detail = fmt("10000 vectors, max |w - naive| %.3g, max |sum w - (1 - prod)| %.3g", worst,
                   worst_sum);
  return out;
}

struct PlaneScene {
  std::shared_ptr<const PointCloud> cloud;
  Camera camera = default_camera(32, 32);
  SearchConfig search;
};

PlaneScene two_planes(double gap) {
  SceneSpec spec;
  spec.kind = SceneKind::parallel_planes;
  spec.n = 200000;
  spec.plane_count = 2;
  spec.plane_gap = gap;
  spec.plane_extent = 2.5;
  spec.seed = 11;
  PlaneScene s;
  s.cloud = std::make_shared<const PointCloud>(generate_scene(spec));
  s.search = SearchConfig::from_scale(s.camera, 2.0);
  return s;
}

Outcome primary_surface() {
  const SamplerConfig defaults;
  const double beta = defaults.beta;
  const double gap = 1.5;  // >= 10 beta
  const PlaneScene scene = two_planes(gap);
  const HashIndex index = HashIndex::build(scene.cloud, scene.camera, scene.search);
  const auto rays = generate_rays(scene.camera, 1.0, 12.0);

  SamplerConfig primary;
  primary.gamma = 0.9;
  primary.epsilon = 0.05;
  std::size_t kept = 0;
  std::size_t off_first = 0;
  std::size_t rays_with_samples = 0;
  for (const Ray& ray : rays) {
    const auto s = sample_ray(index, ray, scene.search, primary);
    rays_with_samples += s.empty() ? 0 : 1;
    for (const SampleCandidate& c : s) {
      ++kept;
      off_first += std::fabs(c.position.z) <= 3.0 * beta ? 0 : 1;
    }
  }

  // At gamma = 0.01 no weight can reach 0.05, so this half uses the default
  // epsilon.
  SamplerConfig multi;
  multi.gamma = 0.01;
  std::size_t both = 0;
  for (const Ray& ray : rays) {
    bool first = false;
    bool second = false;
    for (const SampleCandidate& c : sample_ray(index, ray, scene.search, multi)) {
      first = first || std::fabs(c.position.z) <= 3.0 * beta;
      second = second || std::fabs(c.position.z - gap) <= 3.0 * beta;
    }
    both += first && second ? 1 : 0;
  }
  Outcome out;
  out.pass = kept > 0 && off_first == 0 && rays_with_samples == rays.size() &&
             both == rays.size();
  out.detail = fmt("gamma 0.9: %zu retained on %zu/%zu rays, %zu beyond 3 beta of the first "
                   "plane; gamma 0.01: %zu/%zu rays retain on both planes",
                   kept, rays_with_samples, rays.size(), off_first, both, rays.size());
  return out;
}

Outcome adaptive_count() {
  SceneSpec spec;
  spec.kind = SceneKind::sphere_surface;
  spec.n = 100000;
  spec.noise = 0.005;
  const Camera cam = default_camera(32, 32);
  const SearchConfig search = SearchConfig::from_scale(cam, 2.0);
  const HashIndex index = HashIndex::build(generate_scene(spec), cam, search);
  std::map<std::size_t, std::size_t> histogram;
  for (const Ray& ray : generate_rays(cam, 1.0, 10.0)) {
    ++histogram[sample_ray(index, ray, search, SamplerConfig{}).size()];
  }
  std::size_t zero = histogram.count(0) ? histogram[0] : 0;
  std::size_t many = 0;
  for (const auto& [count, rays] : histogram) many += count >= 2 ? rays : 0;
  Outcome out;
  out.pass = zero > 0 && many > 0;
  out.detail = fmt("1024 rays: %zu retain 0, %zu retain >= 2, max %zu", zero, many,
                   histogram.rbegin()->first);
  return out;
}

Outcome performance() {
  SceneSpec spec;
  spec.n = 1000000;
  spec.seed = 6;
  auto cloud = std::make_shared<const PointCloud>(generate_scene(spec));
  constexpr std::size_t m = 100000;
  const Camera cam = bench_camera(m);
  const auto rays = bench_rays(cam, m, 1.0, 10.0);
  const SearchConfig search = SearchConfig::from_scale(cam, 1.0);
  const std::vector<Structure> all{Structure::brute, Structure::grid, Structure::kdtree,
                                   Structure::octree, Structure::hashpoint};
  BenchOptions options;
  options.run_sampler = false;
  options.brute_force_repeats = 1;
  const auto records = run_bench(cloud, cam, rays, search, all, options);
  std::map<std::string, double> total;
  for (const BenchRecord& r : records) total[r.structure] = r.total_ms();
  const double hp = total["hashpoint"];
  const bool fast_enough = total["brute"] >= kBruteSpeedup * hp;
  const bool beats_all = hp < total["grid"] && hp < total["kdtree"] && hp < total["octree"];
  Outcome out;
  out.pass = fast_enough && beats_all;
  out.detail = fmt("build+query ms: hashpoint %.1f, grid %.1f, kdtree %.1f, octree %.1f, "
                   "brute %.1f (%.1fx)",
                   hp, total["grid"], total["kdtree"], total["octree"], total["brute"],
                   total["brute"] / hp);
  return out;
}

Outcome complexity() {
  const Camera cam = default_camera(128, 128);
  const SearchConfig search = SearchConfig::from_scale(cam, 2.0);
  const auto rays = generate_rays(cam, 1.0, 10.0);
  std::vector<double> per_point;
  std::size_t bad_probes = 0;
  const auto s2 = static_cast<std::uint64_t>(search.kernel_size) *
                  static_cast<std::uint64_t>(search.kernel_size);
  for (const std::size_t n : {10000u, 100000u, 1000000u}) {
    SceneSpec spec;
    spec.n = n;
    BuildStats stats;
    const HashIndex index = HashIndex::build(generate_scene(spec), cam, search, &stats);
    per_point.push_back(static_cast<double>(stats.point_touches) / static_cast<double>(n));
    for (const Ray& ray : rays) {
      QueryStats q;
      index.query(ray, search, &q);
      bad_probes += q.table_probes == s2 ? 0 : 1;
    }
  }
  const auto [lo, hi] = std::minmax_element(per_point.begin(), per_point.end());
  const double spread = (*hi - *lo) / *lo;
  Outcome out;
  out.pass = spread <= kTouchFlatness && bad_probes == 0;
  out.detail = fmt("touches per point %.4f / %.4f / %.4f (spread %.3g); %zu of %zu queries "
                   "probed other than s^2 = %llu",
                   per_point[0], per_point[1], per_point[2], spread, bad_probes, 3 * rays.size(),
                   static_cast<unsigned long long>(s2));
  return out;
}

Outcome renderer_consistency() {
  std::mt19937_64 rng(8);
  double worst_weight = 0.0;
  double worst_sum = 0.0;
  int rays_checked = 0;
  int samples_checked = 0;
  while (rays_checked < 1000) {
    const PointCloud cloud = fixtures::random_scene(rng, 20000);
    const Camera cam = fixtures::random_camera(rng, 16, 48);
    const SearchConfig search = SearchConfig::from_scale(cam, fixtures::uniform(rng, 1.0, 3.0));
    const HashIndex index = HashIndex::build(cloud, cam, search);
    SamplerConfig sampler;
    sampler.gamma = fixtures::uniform(rng, 0.05, 1.0);
    for (int i = 0; i < 100 && rays_checked < 1000; ++i) {
      const Pixel px{fixtures::uniform_int(rng, 0, cam.width() - 1),
                     fixtures::uniform_int(rng, 0, cam.height() - 1)};
      const Ray ray = make_ray(cam, px, 0.5, 12.0);
      const RaySamples rs = sample_ray_detailed(index, ray, search, sampler);
      const std::vector<Vec3> colors(rs.candidates.size());
      const VolumeTrace trace = composite_volume(rs.candidates, colors, ray.t_far, Vec3{});
      double sum = trace.transmittance;
      for (std::size_t j = 0; j < rs.candidates.size(); ++j) {
        worst_weight = std::max(worst_weight,
                                std::fabs(trace.sample_weights[j] - rs.candidates[j].weight));
        sum += trace.sample_weights[j];
      }
      worst_sum = std::max(worst_sum, std::fabs(sum - 1.0));
      samples_checked += static_cast<int>(rs.candidates.size());
      ++rays_checked;
    }
  }

  // Constant-color plane. Volume pixels blend the background in by the
  // leftover transmittance, so the background is the plane color there.
  const Vec3 color{0.25, 0.5, 0.75};
  SceneSpec spec;
  spec.kind = SceneKind::parallel_planes;
  spec.n = 60000;
  spec.plane_count = 1;
  spec.plane_extent = 1.0;
  PointCloud plane = generate_scene(spec);
  for (Vec3& c : plane.colors) c = color;
  const Camera cam = default_camera(32, 32);
  const SearchConfig search = SearchConfig::from_scale(cam, 2.0);
  const HashIndex index = HashIndex::build(plane, cam, search);
  const auto rays = generate_rays(cam, 1.0, 10.0);
  double worst_color = 0.0;
  int hit_pixels = 0;
  for (const RenderMode mode : {RenderMode::knp_blend, RenderMode::volume}) {
    RenderConfig cfg;
    cfg.mode = mode;
    cfg.background = mode == RenderMode::volume ? color : Vec3{};
    const Image img = render(index, rays, search, SamplerConfig{}, cfg);
    for (std::size_t i = 0; i < img.color.size(); ++i) {
      if (!std::isfinite(img.depth[i])) continue;
      ++hit_pixels;
      worst_color = std::max(worst_color, norm(img.color[i] - color));
    }
  }
  Outcome out;
  out.pass = worst_weight <= kRenderWeightTol && worst_sum <= kRenderWeightTol &&
             worst_color <= kColorTol && hit_pixels > 0;
  out.detail = fmt("%d rays / %d samples: max |w_vol - w| %.3g, max |sum w + T - 1| %.3g; "
                   "plane: %d hit pixels, max color error %.3g",
                   rays_checked, samples_checked, worst_weight, worst_sum, hit_pixels,
                   worst_color);
  return out;
}

struct PipelineOutput {
  std::string index_csv;
  std::string query_csv;
  std::string samples_csv;
  std::string ppm;
};

PipelineOutput run_pipeline() {
  SceneSpec spec;
  spec.kind = SceneKind::sphere_surface;
  spec.n = 50000;
  spec.noise = 0.01;
  spec.seed = 99;
  const Camera cam = default_camera(48, 40);
  const SearchConfig search = SearchConfig::from_scale(cam, 1.5);
  const HashIndex index = HashIndex::build(generate_scene(spec), cam, search);
  const auto rays = generate_rays(cam, 1.0, 10.0);
  PipelineOutput out;
  std::ostringstream stats;
  write_index_stats(stats, index);
  out.index_csv = stats.str();

  std::ostringstream query;
  std::ostringstream samples;
  write_samples_header(samples);
  const auto results = query_batch(index, rays, search, 4);
  for (std::size_t i = 0; i < rays.size(); ++i) {
    for (const Neighbor& n : results[i].hits) {
      query << i << ',' << n.id << ',' << std::hexfloat << n.t << ',' << n.dist
            << std::defaultfloat << '\n';
    }
    write_samples(samples, i, sample_ray(index, rays[i], search, SamplerConfig{}));
  }
  out.query_csv = query.str();
  out.samples_csv = samples.str();

  RenderConfig cfg;
  cfg.threads = 4;
  std::ostringstream ppm;
  write_ppm(ppm, render(index, rays, search, SamplerConfig{}, cfg));
  out.ppm = ppm.str();
  return out;
}

Outcome determinism() {
  const PipelineOutput a = run_pipeline();
  const PipelineOutput b = run_pipeline();
  Outcome out;
  out.pass = a.index_csv == b.index_csv && a.query_csv == b.query_csv &&
             a.samples_csv == b.samples_csv && a.ppm == b.ppm;
  out.detail = fmt("index csv %s, query csv %s, samples csv %s (%zu bytes), ppm %s",
                   a.index_csv == b.index_csv ? "identical" : "differs",
                   a.query_csv == b.query_csv ? "identical" : "differs",
                   a.samples_csv == b.samples_csv ? "identical" : "differs",
                   a.samples_csv.size(), a.ppm == b.ppm ? "identical" : "differs");
  return out;
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hashpoint acceptance checks"};
  int only = 0;
  app.add_option("--only", only, "run a single criterion (1-9)")->check(CLI::Range(1, 9));
  CLI11_PARSE(app, argc, argv);

  const std::vector<Criterion> criteria{
      {1, "oracle equivalence", oracle_equivalence},
      {2, "radius formulas", radius_formulas},
      {3, "weight algebra", weight_algebra},
      {4, "primary-surface selection", primary_surface},
      {5, "adaptive count range", adaptive_count},
      {6, "performance ordering", performance},
      {7, "complexity proxies", complexity},
      {8, "renderer consistency", renderer_consistency},
      {9, "determinism", determinism},
  };
  int failed = 0;
  for (const Criterion& c : criteria) {
    if (only != 0 && c.id != only) continue;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << ' ' << c.id << ' ' << c.name << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
