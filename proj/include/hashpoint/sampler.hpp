// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_SAMPLER_HPP
#define HASHPOINT_SAMPLER_HPP

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "hashpoint/geometry.hpp"
#include "hashpoint/hash_index.hpp"
#include "hashpoint/query.hpp"

namespace hashpoint {

/// How negligible candidates are dropped after weighting.
enum class RetentionMode {
  weight,         // keep candidates with w >= epsilon
  transmittance,  // keep the prefix while transmittance >= tau_min
};

struct SamplerConfig {
  int k = 8;                         // neighbors averaged by the pseudo-UDF
  double beta = std::sqrt(0.02);     // pseudo-UDF bandwidth
  double gamma = 0.9;                // confidence scale, in (0, 1]
  RetentionMode mode = RetentionMode::weight;
  double epsilon = 1e-4;
  double tau_min = 0.01;

  /// Throws std::invalid_argument for out-of-range fields.
  void validate() const;
};

/// A sample point proposed on a ray by one retrieved neighbor.
struct SampleCandidate {
  double t = 0.0;
  Vec3 position;
  double radius = 0.0;  // cone radius at t
  double udf = 0.0;     // pseudo-UDF distance
  double alpha = 0.0;   // confidence
  double weight = 0.0;  // occlusion-aware weight
  std::uint32_t point_id = 0;
  double point_distance = 0.0;  // source point's distance from the ray
};

/// One candidate per retrieved point at its foot parameter, sorted by t.
std::vector<SampleCandidate> make_candidates(const QueryResult& result,
                                             const Ray& ray,
                                             const Camera& camera,
                                             const SearchConfig& config);

/// Retrieved points that enter a candidate's pseudo-UDF, with their 3D
/// distance to the candidate, nearest first.
struct UdfNeighbor {
  std::uint32_t id = 0;
  double distance = 0.0;
};

/**
 * Chooses the neighbors averaged by the pseudo-UDF: the min(k, available)
 * retrieved points nearest to the candidate. When at least k retrieved
 * points lie within the candidate's radius of the ray, only those are
 * eligible.
 */
std::vector<UdfNeighbor> udf_neighbors(const SampleCandidate& candidate,
                                       const QueryResult& neighbors,
                                       std::span<const Vec3> positions, int k);

/// Mean distance from the candidate to its udf_neighbors. Throws
/// std::invalid_argument when `neighbors` is empty or k < 1.
double pseudo_udf(const SampleCandidate& candidate, const QueryResult& neighbors,
                  std::span<const Vec3> positions, int k);

/// gamma * exp(-d^2 / beta^2).
double confidence(double udf, double beta, double gamma);

/// w_j = alpha_j * prod_{k<j} (1 - alpha_k); returns the transmittance left
/// after the last candidate. Throws std::invalid_argument unless candidates
/// are sorted by t.
double occlusion_weights(std::span<SampleCandidate> candidates);

std::vector<SampleCandidate> retain(std::span<const SampleCandidate> candidates,
                                    const SamplerConfig& config);

/// Every stage of sampling one ray, kept for rendering and debugging.
struct RaySamples {
  QueryResult neighbors;
  std::vector<SampleCandidate> candidates;  // all, weighted
  std::vector<SampleCandidate> retained;
};

/// Sampling stages after the neighbor query, for any structure's result.
RaySamples sample_neighbors(QueryResult neighbors, const Ray& ray,
                            const Camera& camera, const SearchConfig& search,
                            std::span<const Vec3> positions,
                            const SamplerConfig& sampler);

RaySamples sample_ray_detailed(const HashIndex& index, const Ray& ray,
                               const SearchConfig& search,
                               const SamplerConfig& sampler);

/// query -> candidates -> pseudo-UDF -> confidence -> weights -> retention.
std::vector<SampleCandidate> sample_ray(const HashIndex& index, const Ray& ray,
                                        const SearchConfig& search,
                                        const SamplerConfig& sampler);

/// CSV `ray_id,t,d,alpha,w,point_id`, one row per candidate.
void write_samples_header(std::ostream& out);
void write_samples(std::ostream& out, std::size_t ray_id,
                   std::span<const SampleCandidate> candidates);

}  // namespace hashpoint

#endif  // HASHPOINT_SAMPLER_HPP
