// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/renderer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <ostream>
#include <stdexcept>

#include "hashpoint/parallel.hpp"

namespace hashpoint {

Image::Image(int w, int h)
    : width(w),
      height(h),
      color(static_cast<std::size_t>(w) * static_cast<std::size_t>(h)),
      depth(color.size(), std::numeric_limits<double>::quiet_NaN()) {}

std::vector<double> inverse_distance_weights(std::span<const double> distances) {
  std::vector<double> w(distances.size(), 0.0);
  if (distances.empty()) return w;
  const auto zeros = static_cast<std::size_t>(
      std::count(distances.begin(), distances.end(), 0.0));
  if (zeros > 0) {
    for (std::size_t i = 0; i < distances.size(); ++i) {
      if (distances[i] == 0.0) w[i] = 1.0 / static_cast<double>(zeros);
    }
    return w;
  }
  double total = 0.0;
  for (std::size_t i = 0; i < distances.size(); ++i) {
    w[i] = 1.0 / distances[i];
    total += w[i];
  }
  for (double& x : w) x /= total;
  return w;
}

VolumeTrace composite_volume(std::span<const SampleCandidate> samples,
                             std::span<const Vec3> sample_colors, double t_far,
                             const Vec3& background) {
  if (samples.size() != sample_colors.size()) {
    throw std::invalid_argument("composite_volume: one color per sample required");
  }
  const std::size_t n = samples.size();
  VolumeTrace trace;
  trace.sample_weights.assign(n, 0.0);
  trace.densities.assign(n, 0.0);

  auto interval = [&](std::size_t j) {
    if (j + 1 < n) return samples[j + 1].t - samples[j].t;
    if (n >= 2) return samples[j].t - samples[j - 1].t;
    return t_far - samples[j].t;
  };

  double optical_depth = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double alpha = samples[j].alpha;
    const double tau = std::exp(-optical_depth);
    if (alpha >= 1.0) {
      trace.densities[j] = std::numeric_limits<double>::infinity();
      trace.sample_weights[j] = tau;
      trace.color += sample_colors[j] * tau;
      optical_depth = std::numeric_limits<double>::infinity();
      break;
    }
    const double dt = interval(j);
    double segment_depth = -std::log1p(-alpha);
    if (dt > 0.0) {
      trace.densities[j] = segment_depth / dt;
      segment_depth = trace.densities[j] * dt;
    } else {
      // Coincident samples: the opacity is carried by a zero-length segment.
      trace.densities[j] = segment_depth == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    }
    const double w = tau * (1.0 - std::exp(-segment_depth));
    trace.sample_weights[j] = w;
    trace.color += sample_colors[j] * w;
    optical_depth += segment_depth;
  }
  trace.transmittance = std::exp(-optical_depth);
  trace.color += background * trace.transmittance;
  return trace;
}

namespace {

Vec3 clamp01(const Vec3& c) {
  return {std::clamp(c.x, 0.0, 1.0), std::clamp(c.y, 0.0, 1.0),
          std::clamp(c.z, 0.0, 1.0)};
}

void check_inputs(const HashIndex& index, std::span<const Ray> rays) {
  if (!index.cloud().has_colors()) {
    throw std::invalid_argument("render: point cloud has no colors");
  }
  if (rays.size() != index.camera().pixel_count()) {
    throw std::invalid_argument("render: need exactly one ray per pixel");
  }
}

double expected_depth(std::span<const SampleCandidate> samples,
                      std::span<const double> weights) {
  double wt = 0.0;
  double total = 0.0;
  for (std::size_t j = 0; j < samples.size(); ++j) {
    wt += weights[j] * samples[j].t;
    total += weights[j];
  }
  return total > 0.0 ? wt / total : std::numeric_limits<double>::quiet_NaN();
}

template <typename Shade>
Image render_rays(const HashIndex& index, std::span<const Ray> rays,
                  const RenderConfig& config, Shade&& shade) {
  const Camera& cam = index.camera();
  Image image(cam.width(), cam.height());
  parallel_for_chunks(rays.size(), config.threads,
                      [&](std::size_t begin, std::size_t end) {
                        for (std::size_t i = begin; i < end; ++i) {
                          const std::size_t px = image.index(rays[i].pixel);
                          shade(rays[i], image.color[px], image.depth[px]);
                        }
                      });
  return image;
}

}  // namespace

Image render_knp(const HashIndex& index, std::span<const Ray> rays,
                 const SearchConfig& search, const SamplerConfig& sampler,
                 const RenderConfig& config) {
  check_inputs(index, rays);
  if (config.k < 1) throw std::invalid_argument("render: k must be >= 1");
  const std::vector<Vec3>& colors = index.cloud().colors;
  return render_rays(index, rays, config, [&](const Ray& ray, Vec3& color, double& depth) {
    std::vector<SampleCandidate> kept = sample_ray(index, ray, search, sampler);
    if (kept.empty()) {
      color = clamp01(config.background);
      return;
    }
    std::vector<double> weights;
    weights.reserve(kept.size());
    for (const SampleCandidate& c : kept) weights.push_back(c.weight);
    depth = expected_depth(kept, weights);

    std::sort(kept.begin(), kept.end(), [](const SampleCandidate& a, const SampleCandidate& b) {
      return a.point_distance != b.point_distance ? a.point_distance < b.point_distance
                                                  : a.point_id < b.point_id;
    });
    kept.resize(std::min(kept.size(), static_cast<std::size_t>(config.k)));
    std::vector<double> dist;
    dist.reserve(kept.size());
    for (const SampleCandidate& c : kept) dist.push_back(c.point_distance);
    const std::vector<double> blend = inverse_distance_weights(dist);
    Vec3 c;
    for (std::size_t i = 0; i < kept.size(); ++i) c += colors[kept[i].point_id] * blend[i];
    color = clamp01(c);
  });
}

Image render_volume(const HashIndex& index, std::span<const Ray> rays,
                    const SearchConfig& search, const SamplerConfig& sampler,
                    const RenderConfig& config) {
  check_inputs(index, rays);
  const std::vector<Vec3>& colors = index.cloud().colors;
  const std::span<const Vec3> positions = index.cloud().positions;
  return render_rays(index, rays, config, [&](const Ray& ray, Vec3& color, double& depth) {
    const RaySamples rs = sample_ray_detailed(index, ray, search, sampler);
    std::vector<Vec3> sample_colors;
    sample_colors.reserve(rs.retained.size());
    for (const SampleCandidate& c : rs.retained) {
      const auto set = udf_neighbors(c, rs.neighbors, positions, sampler.k);
      std::vector<double> dist;
      dist.reserve(set.size());
      for (const UdfNeighbor& n : set) dist.push_back(n.distance);
      const std::vector<double> blend = inverse_distance_weights(dist);
      Vec3 sc;
      for (std::size_t i = 0; i < set.size(); ++i) sc += colors[set[i].id] * blend[i];
      sample_colors.push_back(sc);
    }
    const VolumeTrace trace =
        composite_volume(rs.retained, sample_colors, ray.t_far, config.background);
    color = clamp01(trace.color);
    depth = expected_depth(rs.retained, trace.sample_weights);
  });
}

Image render(const HashIndex& index, std::span<const Ray> rays,
             const SearchConfig& search, const SamplerConfig& sampler,
             const RenderConfig& config) {
  return config.mode == RenderMode::knp_blend
             ? render_knp(index, rays, search, sampler, config)
             : render_volume(index, rays, search, sampler, config);
}

void write_ppm(std::ostream& out, const Image& image) {
  out << "P6\n" << image.width << ' ' << image.height << "\n255\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width) * 3);
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const Vec3 c = clamp01(image.color[image.index({u, v})]);
      for (int ch = 0; ch < 3; ++ch) {
        row[static_cast<std::size_t>(u) * 3 + ch] =
            static_cast<unsigned char>(std::lround(c[ch] * 255.0));
      }
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

void write_depth_pgm(std::ostream& out, const Image& image, double t_near,
                     double t_far) {
  if (!(t_far > t_near)) throw std::invalid_argument("depth pgm: empty t range");
  out << "P5\n" << image.width << ' ' << image.height << "\n65535\n";
  std::vector<unsigned char> row(static_cast<std::size_t>(image.width) * 2);
  for (int v = 0; v < image.height; ++v) {
    for (int u = 0; u < image.width; ++u) {
      const double t = image.depth[image.index({u, v})];
      long value = 0;
      if (std::isfinite(t)) {
        const double s = std::clamp((t - t_near) / (t_far - t_near), 0.0, 1.0);
        value = std::lround(s * 65535.0);
      }
      row[static_cast<std::size_t>(u) * 2] = static_cast<unsigned char>((value >> 8) & 0xff);
      row[static_cast<std::size_t>(u) * 2 + 1] = static_cast<unsigned char>(value & 0xff);
    }
    out.write(reinterpret_cast<const char*>(row.data()),
              static_cast<std::streamsize>(row.size()));
  }
}

}  // namespace hashpoint
