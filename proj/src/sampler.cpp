// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/sampler.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <utility>

namespace hashpoint {

void SamplerConfig::validate() const {
  if (k < 1) throw std::invalid_argument("sampler: k must be >= 1");
  if (!(beta > 0.0)) throw std::invalid_argument("sampler: beta must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("sampler: gamma must lie in (0, 1]");
  }
  if (!(epsilon >= 0.0)) throw std::invalid_argument("sampler: epsilon must be >= 0");
  if (!(tau_min >= 0.0 && tau_min < 1.0)) {
    throw std::invalid_argument("sampler: tau_min must lie in [0, 1)");
  }
}

std::vector<SampleCandidate> make_candidates(const QueryResult& result,
                                             const Ray& ray, const Camera& camera,
                                             const SearchConfig& config) {
  std::vector<SampleCandidate> out;
  out.reserve(result.size());
  const double slope = radius_slope(camera, ray, config);
  for (const Neighbor& n : result.hits) {
    SampleCandidate c;
    c.t = n.t;
    c.position = ray.at(n.t);
    c.radius = slope * n.t;
    c.point_id = n.id;
    c.point_distance = n.dist;
    out.push_back(c);
  }
  std::stable_sort(out.begin(), out.end(),
                   [](const SampleCandidate& a, const SampleCandidate& b) {
                     return a.t < b.t;
                   });
  return out;
}

std::vector<UdfNeighbor> udf_neighbors(const SampleCandidate& candidate,
                                       const QueryResult& neighbors,
                                       std::span<const Vec3> positions, int k) {
  if (k < 1) throw std::invalid_argument("pseudo_udf: k must be >= 1");
  const auto want = static_cast<std::size_t>(k);
  std::size_t within = 0;
  for (const Neighbor& n : neighbors.hits) {
    if (n.dist <= candidate.radius) ++within;
  }
  const bool restrict = within >= want;

  std::vector<UdfNeighbor> pool;
  pool.reserve(restrict ? within : neighbors.size());
  for (const Neighbor& n : neighbors.hits) {
    if (restrict && n.dist > candidate.radius) continue;
    pool.push_back({n.id, norm(candidate.position - positions[n.id])});
  }
  const std::size_t take = std::min(want, pool.size());
  auto closer = [](const UdfNeighbor& a, const UdfNeighbor& b) {
    return a.distance != b.distance ? a.distance < b.distance : a.id < b.id;
  };
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(take),
                    pool.end(), closer);
  pool.resize(take);
  return pool;
}

namespace {

double mean_distance(const std::vector<UdfNeighbor>& set) {
  double sum = 0.0;
  for (const UdfNeighbor& n : set) sum += n.distance;
  return sum / static_cast<double>(set.size());
}

}  // namespace

double pseudo_udf(const SampleCandidate& candidate, const QueryResult& neighbors,
                  std::span<const Vec3> positions, int k) {
  if (neighbors.empty()) throw std::invalid_argument("pseudo_udf: no neighbors");
  return mean_distance(udf_neighbors(candidate, neighbors, positions, k));
}

double confidence(double udf, double beta, double gamma) {
  if (!(beta > 0.0)) throw std::invalid_argument("confidence: beta must be > 0");
  if (!(gamma > 0.0 && gamma <= 1.0)) {
    throw std::invalid_argument("confidence: gamma must lie in (0, 1]");
  }
  return gamma * std::exp(-(udf * udf) / (beta * beta));
}

double occlusion_weights(std::span<SampleCandidate> candidates) {
  for (std::size_t j = 1; j < candidates.size(); ++j) {
    if (candidates[j].t < candidates[j - 1].t) {
      throw std::invalid_argument("occlusion_weights: candidates not sorted by t");
    }
  }
  double transmittance = 1.0;
  for (SampleCandidate& c : candidates) {
    c.weight = c.alpha * transmittance;
    transmittance *= 1.0 - c.alpha;
  }
  return transmittance;
}

std::vector<SampleCandidate> retain(std::span<const SampleCandidate> candidates,
                                    const SamplerConfig& config) {
  std::vector<SampleCandidate> kept;
  if (config.mode == RetentionMode::weight) {
    for (const SampleCandidate& c : candidates) {
      if (c.weight >= config.epsilon) kept.push_back(c);
    }
    return kept;
  }
  double transmittance = 1.0;
  for (const SampleCandidate& c : candidates) {
    if (transmittance < config.tau_min) break;
    kept.push_back(c);
    transmittance *= 1.0 - c.alpha;
  }
  return kept;
}

RaySamples sample_neighbors(QueryResult neighbors, const Ray& ray,
                            const Camera& camera, const SearchConfig& search,
                            std::span<const Vec3> positions,
                            const SamplerConfig& sampler) {
  sampler.validate();
  RaySamples out;
  out.neighbors = std::move(neighbors);
  out.candidates = make_candidates(out.neighbors, ray, camera, search);
  for (SampleCandidate& c : out.candidates) {
    c.udf = mean_distance(udf_neighbors(c, out.neighbors, positions, sampler.k));
    c.alpha = confidence(c.udf, sampler.beta, sampler.gamma);
  }
  occlusion_weights(out.candidates);
  out.retained = retain(out.candidates, sampler);
  return out;
}

RaySamples sample_ray_detailed(const HashIndex& index, const Ray& ray,
                               const SearchConfig& search,
                               const SamplerConfig& sampler) {
  return sample_neighbors(index.query(ray, search), ray, index.camera(), search,
                          index.cloud().positions, sampler);
}

std::vector<SampleCandidate> sample_ray(const HashIndex& index, const Ray& ray,
                                        const SearchConfig& search,
                                        const SamplerConfig& sampler) {
  return sample_ray_detailed(index, ray, search, sampler).retained;
}

void write_samples_header(std::ostream& out) {
  out << "ray_id,t,d,alpha,w,point_id\n";
}

void write_samples(std::ostream& out, std::size_t ray_id,
                   std::span<const SampleCandidate> candidates) {
  const auto old_precision = out.precision(17);
  for (const SampleCandidate& c : candidates) {
    out << ray_id << ',' << c.t << ',' << c.udf << ',' << c.alpha << ','
        << c.weight << ',' << c.point_id << '\n';
  }
  out.precision(old_precision);
}

}  // namespace hashpoint
