// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_BENCH_HPP
#define HASHPOINT_BENCH_HPP

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "hashpoint/geometry.hpp"
#include "hashpoint/point_cloud.hpp"
#include "hashpoint/sampler.hpp"

namespace hashpoint {

enum class Structure { brute, grid, kdtree, octree, hashpoint };

Structure parse_structure(std::string_view name);
std::string_view to_string(Structure s);

struct BenchRecord {
  std::string structure;
  std::size_t n = 0;
  std::size_t m = 0;
  double build_ms = 0.0;
  double query_ms = 0.0;
  double sample_ms = 0.0;
  std::uint64_t q_total = 0;
  double q_mean = 0.0;

  double total_ms() const { return build_ms + query_ms; }
  friend bool operator==(const BenchRecord&, const BenchRecord&) = default;
};

struct BenchOptions {
  int repeats = 5;
  int warmup = 1;
  // Repeats for the exhaustive baseline, which dominates wall time at scale.
  // 0 means use repeats and warmup; otherwise it runs this many times with no
  // warmup.
  int brute_force_repeats = 0;
  bool run_sampler = true;
  SamplerConfig sampler;
};

/// Raised when a structure's neighbor sets differ from the reference, so no
/// timings are reported for an unfair comparison.
class BenchDivergence : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/**
 * Times build, query and sampling of each structure over the same rays,
 * single-threaded. Each stage reports the median over `repeats` runs after
 * `warmup` discarded runs. Before any record is returned, every structure's
 * per-ray neighbor id sets are compared with the brute-force ones (or with
 * the first structure's when brute force is not requested); any difference
 * throws BenchDivergence.
 */
std::vector<BenchRecord> run_bench(std::shared_ptr<const PointCloud> cloud,
                                   const Camera& camera, std::span<const Ray> rays,
                                   const SearchConfig& search,
                                   std::span<const Structure> structures,
                                   const BenchOptions& options);

/// Smallest near-square image with at least m pixels.
Camera bench_camera(std::size_t m);

/// The first m rays of the camera's row-major ray set.
std::vector<Ray> bench_rays(const Camera& camera, std::size_t m, double t_near,
                            double t_far);

/// CSV header `structure,n,m,build_ms,query_ms,sample_ms,q_total,q_mean`.
void write_bench_csv(std::ostream& out, std::span<const BenchRecord> records);
std::vector<BenchRecord> read_bench_csv(std::istream& in);
void emit_csv(std::span<const BenchRecord> records, const std::filesystem::path& path);

}  // namespace hashpoint

#endif  // HASHPOINT_BENCH_HPP
