// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: benchmarks, single-ray debugging dumps, sampling
// dumps, rendering and index statistics.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "CLI11.hpp"
#include "hashpoint/baselines.hpp"
#include "hashpoint/bench.hpp"
#include "hashpoint/hash_index.hpp"
#include "hashpoint/parallel.hpp"
#include "hashpoint/renderer.hpp"
#include "hashpoint/sampler.hpp"
#include "hashpoint/scene.hpp"

namespace {

using namespace hashpoint;

struct SceneOptions {
  std::string kind = "uniform_box";
  std::string ply;
  std::size_t n = 10000;
  std::uint64_t seed = 1;
  double noise = 0.0;
  int planes = 2;
  double gap = 1.5;
  double extent = 2.5;

  void add(CLI::App& app) {
    app.add_option("--scene", kind, "uniform_box | sphere_surface | parallel_planes | ply_file")
        ->capture_default_str();
    app.add_option("--ply", ply, "point cloud file (.ply or .csv) for --scene ply_file");
    app.add_option("--n", n, "number of generated points")->capture_default_str();
    app.add_option("--seed", seed, "scene RNG seed")->capture_default_str();
    app.add_option("--noise", noise, "surface noise sigma")->capture_default_str();
    app.add_option("--planes", planes, "plane count for parallel_planes")->capture_default_str();
    app.add_option("--gap", gap, "plane spacing for parallel_planes")->capture_default_str();
    app.add_option("--extent", extent, "plane half-size for parallel_planes")->capture_default_str();
  }

  PointCloud generate() const {
    SceneSpec spec;
    spec.kind = parse_scene_kind(kind);
    spec.n = n;
    spec.seed = seed;
    spec.noise = noise;
    spec.plane_count = planes;
    spec.plane_gap = gap;
    spec.plane_extent = extent;
    spec.ply_path = ply;
    return generate_scene(spec);
  }
};

struct ViewOptions {
  std::string camera_file;
  int width = 64;
  int height = 64;
  double kernel_scale = 1.0;
  bool approximate = false;
  double t_near = 1.0;
  double t_far = 10.0;

  void add(CLI::App& app, bool with_size = true) {
    app.add_option("--camera", camera_file, "camera config file (overrides --width/--height)");
    if (with_size) {
      app.add_option("--width", width, "image width")->capture_default_str();
      app.add_option("--height", height, "image height")->capture_default_str();
    }
    app.add_option("--kernel-scale", kernel_scale,
                   "kernel radius as a multiple of the pixel disc radius")
        ->capture_default_str();
    app.add_flag("--approx", approximate, "use the small-angle cone radius");
    app.add_option("--t-near", t_near)->capture_default_str();
    app.add_option("--t-far", t_far)->capture_default_str();
  }

  Camera camera() const {
    return camera_file.empty() ? default_camera(width, height)
                               : load_camera_config(camera_file);
  }

  SearchConfig search(const Camera& cam) const {
    return SearchConfig::from_scale(
        cam, kernel_scale, approximate ? RadiusFormula::approximate : RadiusFormula::exact);
  }
};

struct SamplerOptions {
  SamplerConfig cfg;
  std::string mode = "weight";

  void add(CLI::App& app) {
    app.add_option("--k", cfg.k, "neighbors per pseudo-UDF")->capture_default_str();
    app.add_option("--beta", cfg.beta, "pseudo-UDF bandwidth")->capture_default_str();
    app.add_option("--gamma", cfg.gamma, "confidence scale")->capture_default_str();
    app.add_option("--retain", mode, "weight | transmittance")->capture_default_str();
    app.add_option("--epsilon", cfg.epsilon, "weight threshold")->capture_default_str();
    app.add_option("--tau-min", cfg.tau_min, "transmittance floor")->capture_default_str();
  }

  SamplerConfig config() const {
    SamplerConfig out = cfg;
    if (mode == "weight") {
      out.mode = RetentionMode::weight;
    } else if (mode == "transmittance") {
      out.mode = RetentionMode::transmittance;
    } else {
      throw std::invalid_argument("--retain must be weight or transmittance");
    }
    out.validate();
    return out;
  }
};

// Writes to the file when a path is given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path, bool binary = false) {
    if (!path.empty() && path != "-") {
      file_.open(path, binary ? std::ios::binary : std::ios::openmode{});
      if (!file_) throw std::runtime_error("cannot open " + path + " for writing");
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::optional<Pixel> pixel_option(const std::vector<int>& p) {
  if (p.empty()) return std::nullopt;
  return Pixel{p[0], p[1]};
}

int run_bench_command(const SceneOptions& scene, const ViewOptions& view, std::size_t m,
                      std::vector<std::string> names, const BenchOptions& options,
                      bool parallel, const std::string& out_path) {
  auto cloud = std::make_shared<const PointCloud>(scene.generate());
  const Camera cam = view.camera_file.empty() ? bench_camera(m) : view.camera();
  const SearchConfig search = view.search(cam);
  const std::vector<Ray> rays = bench_rays(cam, m, view.t_near, view.t_far);

  if (names.empty() || (names.size() == 1 && names[0] == "all")) {
    names = {"brute", "grid", "kdtree", "octree", "hashpoint"};
  }
  std::vector<Structure> structures;
  for (const auto& name : names) structures.push_back(parse_structure(name));

  std::vector<BenchRecord> records;
  try {
    records = run_bench(cloud, cam, rays, search, structures, options);
  } catch (const BenchDivergence& e) {
    std::cerr << e.what() << "\nrefusing to report timings\n";
    return 3;
  }
  Output out(out_path);
  write_bench_csv(out.stream(), records);

  if (parallel) {
    // Reported on stderr only: parallel timings are not comparable with the
    // single-threaded records above.
    const unsigned threads = threads_from_env(std::max(1u, std::thread::hardware_concurrency()));
    const HashIndex index = HashIndex::build(cloud, cam, search);
    const auto start = std::chrono::steady_clock::now();
    const auto results = query_batch(index, rays, search, threads);
    const double ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start)
            .count();
    std::cerr << "hashpoint parallel query (" << threads << " threads): " << ms << " ms, "
              << results.size() << " rays\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"HashPoint: rasterized point indexing for per-ray neighbor search"};
  app.require_subcommand(1);

  // bench
  auto* bench = app.add_subcommand("bench", "time build/query/sample across structures");
  SceneOptions bench_scene;
  ViewOptions bench_view;
  std::size_t bench_rays_count = 10000;
  std::vector<std::string> bench_structures;
  BenchOptions bench_options;
  bool bench_parallel = false;
  std::string bench_out;
  bench_scene.add(*bench);
  bench_view.add(*bench, false);
  bench->add_option("--rays", bench_rays_count, "number of rays m")->capture_default_str();
  bench->add_option("--structure", bench_structures,
                    "brute | grid | kdtree | octree | hashpoint | all (repeatable)");
  bench->add_option("--repeats", bench_options.repeats)->capture_default_str();
  bench->add_option("--warmup", bench_options.warmup)->capture_default_str();
  bench->add_option("--brute-repeats", bench_options.brute_force_repeats,
                    "repeats for brute force, without warmup (0 = --repeats)")
      ->capture_default_str();
  bench->add_flag("--no-sample", [&](std::int64_t) { bench_options.run_sampler = false; },
                  "skip timing the sampler");
  bench->add_flag("--parallel", bench_parallel,
                  "also time a multi-threaded hashpoint query (HASHPOINT_THREADS caps it)");
  bench->add_option("--out", bench_out, "CSV output path (stdout when omitted)");

  // query
  auto* query = app.add_subcommand("query", "dump the neighbors of one ray");
  SceneOptions query_scene;
  ViewOptions query_view;
  std::vector<int> query_pixel;
  std::string query_structure = "hashpoint";
  std::string query_out;
  query_scene.add(*query);
  query_view.add(*query);
  query->add_option("--pixel", query_pixel, "pixel u v")->expected(2)->required();
  query->add_option("--structure", query_structure)->capture_default_str();
  query->add_option("--out", query_out, "CSV output path (stdout when omitted)");

  // sample
  auto* sample = app.add_subcommand("sample", "dump per-ray sample candidates");
  SceneOptions sample_scene;
  ViewOptions sample_view;
  SamplerOptions sample_opts;
  std::vector<int> sample_pixel;
  bool sample_all = false;
  std::string sample_out;
  sample_scene.add(*sample);
  sample_view.add(*sample);
  sample_opts.add(*sample);
  sample->add_option("--pixel", sample_pixel, "only this pixel (u v)")->expected(2);
  sample->add_flag("--all-candidates", sample_all, "write every candidate, not only retained");
  sample->add_option("--out", sample_out, "CSV output path (stdout when omitted)");

  // render
  auto* render_cmd = app.add_subcommand("render", "render color and depth images");
  SceneOptions render_scene;
  ViewOptions render_view;
  SamplerOptions render_sampler;
  std::string render_mode = "volume";
  std::string render_out = "render.ppm";
  std::string render_depth;
  std::vector<double> render_bg;
  int render_k = 8;
  render_scene.add(*render_cmd);
  render_view.add(*render_cmd);
  render_sampler.add(*render_cmd);
  render_cmd->add_option("--mode", render_mode, "knp | volume")->capture_default_str();
  render_cmd->add_option("--out", render_out, "PPM output path")->capture_default_str();
  render_cmd->add_option("--depth", render_depth, "16-bit PGM depth output path");
  render_cmd->add_option("--background", render_bg, "background r g b")->expected(3);
  render_cmd->add_option("--blend-k", render_k, "points blended per ray in knp mode")
      ->capture_default_str();

  // index-stats
  auto* stats = app.add_subcommand("index-stats", "dump per-pixel point counts");
  SceneOptions stats_scene;
  ViewOptions stats_view;
  std::string stats_out;
  stats_scene.add(*stats);
  stats_view.add(*stats);
  stats->add_option("--out", stats_out, "CSV output path (stdout when omitted)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*bench) {
      return run_bench_command(bench_scene, bench_view, bench_rays_count, bench_structures,
                               bench_options, bench_parallel, bench_out);
    }

    if (*query) {
      auto cloud = std::make_shared<const PointCloud>(query_scene.generate());
      const Camera cam = query_view.camera();
      const SearchConfig search = query_view.search(cam);
      const Ray ray = make_ray(cam, *pixel_option(query_pixel), query_view.t_near,
                               query_view.t_far);
      QueryResult result;
      switch (parse_structure(query_structure)) {
        case Structure::brute: result = brute_force_query(*cloud, ray, cam, search); break;
        case Structure::grid: result = UniformGrid(cloud).query(ray, cam, search); break;
        case Structure::kdtree: result = KdTree(cloud).query(ray, cam, search); break;
        case Structure::octree: result = Octree(cloud).query(ray, cam, search); break;
        case Structure::hashpoint:
          result = HashIndex::build(cloud, cam, search).query(ray, search);
          break;
      }
      Output out(query_out);
      std::ostream& os = out.stream();
      os.precision(17);
      os << "point_id,t_proj,dist_perp\n";
      for (const Neighbor& n : result.hits) os << n.id << ',' << n.t << ',' << n.dist << '\n';
      return 0;
    }

    if (*sample) {
      auto cloud = std::make_shared<const PointCloud>(sample_scene.generate());
      const Camera cam = sample_view.camera();
      const SearchConfig search = sample_view.search(cam);
      const SamplerConfig sampler = sample_opts.config();
      const HashIndex index = HashIndex::build(cloud, cam, search);
      const std::vector<Ray> rays = generate_rays(cam, sample_view.t_near, sample_view.t_far);
      const auto only = pixel_option(sample_pixel);
      Output out(sample_out);
      write_samples_header(out.stream());
      for (std::size_t i = 0; i < rays.size(); ++i) {
        if (only && !(rays[i].pixel == *only)) continue;
        const RaySamples rs = sample_ray_detailed(index, rays[i], search, sampler);
        write_samples(out.stream(), i, sample_all ? rs.candidates : rs.retained);
      }
      return 0;
    }

    if (*render_cmd) {
      auto cloud = std::make_shared<const PointCloud>(render_scene.generate());
      const Camera cam = render_view.camera();
      const SearchConfig search = render_view.search(cam);
      const HashIndex index = HashIndex::build(cloud, cam, search);
      const std::vector<Ray> rays = generate_rays(cam, render_view.t_near, render_view.t_far);
      RenderConfig cfg;
      if (render_mode == "knp") {
        cfg.mode = RenderMode::knp_blend;
      } else if (render_mode == "volume") {
        cfg.mode = RenderMode::volume;
      } else {
        throw std::invalid_argument("--mode must be knp or volume");
      }
      if (!render_bg.empty()) cfg.background = {render_bg[0], render_bg[1], render_bg[2]};
      cfg.k = render_k;
      cfg.threads = threads_from_env(1);
      const Image image = render(index, rays, search, render_sampler.config(), cfg);
      {
        Output out(render_out, true);
        write_ppm(out.stream(), image);
      }
      if (!render_depth.empty()) {
        Output out(render_depth, true);
        write_depth_pgm(out.stream(), image, render_view.t_near, render_view.t_far);
      }
      return 0;
    }

    if (*stats) {
      auto cloud = std::make_shared<const PointCloud>(stats_scene.generate());
      const Camera cam = stats_view.camera();
      const HashIndex index = HashIndex::build(cloud, cam, stats_view.search(cam));
      Output out(stats_out);
      write_index_stats(out.stream(), index);
      std::cerr << index.indexed_count() << " of " << cloud->size() << " points indexed\n";
      return 0;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
