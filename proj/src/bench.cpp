// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>

#include "hashpoint/baselines.hpp"
#include "hashpoint/hash_index.hpp"
#include "hashpoint/scene.hpp"

namespace hashpoint {

Structure parse_structure(std::string_view name) {
  if (name == "brute") return Structure::brute;
  if (name == "grid") return Structure::grid;
  if (name == "kdtree") return Structure::kdtree;
  if (name == "octree") return Structure::octree;
  if (name == "hashpoint") return Structure::hashpoint;
  throw std::invalid_argument("unknown structure: " + std::string(name));
}

std::string_view to_string(Structure s) {
  switch (s) {
    case Structure::brute: return "brute";
    case Structure::grid: return "grid";
    case Structure::kdtree: return "kdtree";
    case Structure::octree: return "octree";
    case Structure::hashpoint: return "hashpoint";
  }
  return "unknown";
}

namespace {

using Clock = std::chrono::steady_clock;

double elapsed_ms(Clock::time_point since) {
  return std::chrono::duration<double, std::milli>(Clock::now() - since).count();
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const std::size_t mid = v.size() / 2;
  return v.size() % 2 == 1 ? v[mid] : 0.5 * (v[mid - 1] + v[mid]);
}

struct RunTiming {
  double build_ms = 0.0;
  double query_ms = 0.0;
  double sample_ms = 0.0;
};

// One build + query + sample pass for a structure; results land in `out`.
RunTiming run_once(Structure s, const std::shared_ptr<const PointCloud>& cloud,
                   const Camera& camera, std::span<const Ray> rays,
                   const SearchConfig& search, const BenchOptions& options,
                   std::vector<QueryResult>& out) {
  RunTiming timing;
  out.assign(rays.size(), QueryResult{});

  auto query_all = [&](auto&& one) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < rays.size(); ++i) out[i] = one(rays[i]);
    timing.query_ms = elapsed_ms(start);
  };

  switch (s) {
    case Structure::brute:
    {
      const auto start = Clock::now();
      out = brute_force_batch(*cloud, rays, camera, search);
      timing.query_ms = elapsed_ms(start);
      break;
    }
    case Structure::grid: {
      const auto start = Clock::now();
      const UniformGrid grid(cloud);
      timing.build_ms = elapsed_ms(start);
      query_all([&](const Ray& r) { return grid.query(r, camera, search); });
      break;
    }
    case Structure::kdtree: {
      const auto start = Clock::now();
      const KdTree tree(cloud);
      timing.build_ms = elapsed_ms(start);
      query_all([&](const Ray& r) { return tree.query(r, camera, search); });
      break;
    }
    case Structure::octree: {
      const auto start = Clock::now();
      const Octree tree(cloud);
      timing.build_ms = elapsed_ms(start);
      query_all([&](const Ray& r) { return tree.query(r, camera, search); });
      break;
    }
    case Structure::hashpoint: {
      const auto start = Clock::now();
      const HashIndex index = HashIndex::build(cloud, camera, search);
      timing.build_ms = elapsed_ms(start);
      query_all([&](const Ray& r) { return index.query(r, search); });
      break;
    }
  }

  if (options.run_sampler) {
    const auto start = Clock::now();
    for (std::size_t i = 0; i < rays.size(); ++i) {
      sample_neighbors(out[i], rays[i], camera, search, cloud->positions, options.sampler);
    }
    timing.sample_ms = elapsed_ms(start);
  }
  return timing;
}

std::optional<std::string> first_difference(const std::vector<QueryResult>& a,
                                            const std::vector<QueryResult>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    std::vector<std::uint32_t> ia = a[i].ids();
    std::vector<std::uint32_t> ib = b[i].ids();
    std::sort(ia.begin(), ia.end());
    std::sort(ib.begin(), ib.end());
    if (ia != ib) {
      std::ostringstream msg;
      msg << "ray " << i << ": " << ia.size() << " vs " << ib.size() << " neighbors";
      return msg.str();
    }
  }
  return std::nullopt;
}

}  // namespace

std::vector<BenchRecord> run_bench(std::shared_ptr<const PointCloud> cloud,
                                   const Camera& camera, std::span<const Ray> rays,
                                   const SearchConfig& search,
                                   std::span<const Structure> structures,
                                   const BenchOptions& options) {
  if (!cloud) throw std::invalid_argument("bench: null cloud");
  if (options.repeats < 1 || options.warmup < 0 || options.brute_force_repeats < 0) {
    throw std::invalid_argument("bench: repeats must be >= 1 and warmup >= 0");
  }
  for (const Ray& r : rays) validate(r);

  std::vector<BenchRecord> records;
  std::vector<std::vector<QueryResult>> results;
  for (const Structure s : structures) {
    int warmup = options.warmup;
    int repeats = options.repeats;
    if (s == Structure::brute && options.brute_force_repeats > 0) {
      warmup = 0;
      repeats = options.brute_force_repeats;
    }
    std::vector<double> build, query, sample;
    std::vector<QueryResult> out;
    for (int run = 0; run < warmup + repeats; ++run) {
      const RunTiming t = run_once(s, cloud, camera, rays, search, options, out);
      if (run < warmup) continue;
      build.push_back(t.build_ms);
      query.push_back(t.query_ms);
      sample.push_back(t.sample_ms);
    }
    BenchRecord rec;
    rec.structure = std::string(to_string(s));
    rec.n = cloud->size();
    rec.m = rays.size();
    rec.build_ms = median(build);
    rec.query_ms = median(query);
    rec.sample_ms = median(sample);
    for (const QueryResult& r : out) rec.q_total += r.size();
    rec.q_mean = rays.empty() ? 0.0
                              : static_cast<double>(rec.q_total) /
                                    static_cast<double>(rays.size());
    records.push_back(rec);
    results.push_back(std::move(out));
  }

  std::size_t reference = 0;
  for (std::size_t i = 0; i < structures.size(); ++i) {
    if (structures[i] == Structure::brute) {
      reference = i;
      break;
    }
  }
  for (std::size_t i = 0; i < structures.size(); ++i) {
    if (i == reference) continue;
    if (const auto diff = first_difference(results[reference], results[i])) {
      throw BenchDivergence("bench: " + records[i].structure + " differs from " +
                            records[reference].structure + " at " + *diff);
    }
  }
  return records;
}

Camera bench_camera(std::size_t m) {
  if (m == 0) throw std::invalid_argument("bench: need at least one ray");
  auto width = static_cast<std::size_t>(std::ceil(std::sqrt(static_cast<double>(m))));
  const std::size_t height = (m + width - 1) / width;
  return default_camera(static_cast<int>(width), static_cast<int>(height));
}

std::vector<Ray> bench_rays(const Camera& camera, std::size_t m, double t_near,
                            double t_far) {
  if (m > camera.pixel_count()) throw std::invalid_argument("bench: more rays than pixels");
  std::vector<Ray> rays;
  rays.reserve(m);
  for (std::size_t i = 0; i < m; ++i) {
    const int u = static_cast<int>(i % static_cast<std::size_t>(camera.width()));
    const int v = static_cast<int>(i / static_cast<std::size_t>(camera.width()));
    rays.push_back(make_ray(camera, {u, v}, t_near, t_far));
  }
  return rays;
}

void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records) {
  out << "structure,n,m,build_ms,query_ms,sample_ms,q_total,q_mean\n";
  const auto old_precision = out.precision(std::numeric_limits<double>::max_digits10);
  for (const BenchRecord& r : records) {
    out << r.structure << ',' << r.n << ',' << r.m << ',' << r.build_ms << ','
        << r.query_ms << ',' << r.sample_ms << ',' << r.q_total << ',' << r.q_mean
        << '\n';
  }
  out.precision(old_precision);
}

std::vector<BenchRecord> read_bench_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) ||
      line != "structure,n,m,build_ms,query_ms,sample_ms,q_total,q_mean") {
    throw std::runtime_error("bench csv: unexpected header");
  }
  std::vector<BenchRecord> records;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() != 8) throw std::runtime_error("bench csv: expected 8 fields");
    BenchRecord r;
    r.structure = cells[0];
    r.n = std::stoull(cells[1]);
    r.m = std::stoull(cells[2]);
    r.build_ms = std::stod(cells[3]);
    r.query_ms = std::stod(cells[4]);
    r.sample_ms = std::stod(cells[5]);
    r.q_total = std::stoull(cells[6]);
    r.q_mean = std::stod(cells[7]);
    records.push_back(r);
  }
  return records;
}

void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path.string() + " for writing");
  write_bench_csv(out, records);
  if (!out) throw std::runtime_error("write failed: " + path.string());
}

}  // namespace hashpoint
