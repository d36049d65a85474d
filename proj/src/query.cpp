// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/query.hpp"

#include <algorithm>
#include <cstdlib>
#include <string>

#include "hashpoint/parallel.hpp"

namespace hashpoint {

std::vector<std::uint32_t> QueryResult::ids() const {
  std::vector<std::uint32_t> out;
  out.reserve(hits.size());
  for (const Neighbor& n : hits) out.push_back(n.id);
  return out;
}

void QueryResult::sort() {
  std::sort(hits.begin(), hits.end(), [](const Neighbor& a, const Neighbor& b) {
    return a.t != b.t ? a.t < b.t : a.id < b.id;
  });
}

Cone make_cone(const Camera& camera, const Ray& ray, const SearchConfig& config) {
  return {ray.origin, ray.direction, ray.t_near, ray.t_far,
          radius_slope(camera, ray, config)};
}

unsigned threads_from_env(unsigned fallback) {
  const char* value = std::getenv("HASHPOINT_THREADS");
  if (value == nullptr) return fallback;
  try {
    const long n = std::stol(value);
    if (n >= 1) return static_cast<unsigned>(n);
  } catch (const std::exception&) {
  }
  return fallback;
}

}  // namespace hashpoint
