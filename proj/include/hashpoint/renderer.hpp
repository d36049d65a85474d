// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_RENDERER_HPP
#define HASHPOINT_RENDERER_HPP

#include <iosfwd>
#include <span>
#include <vector>

#include "hashpoint/hash_index.hpp"
#include "hashpoint/sampler.hpp"

namespace hashpoint {

enum class RenderMode {
  knp_blend,  // blend the colors of the K retained points nearest the ray
  volume,     // alpha-composite retained samples
};

struct RenderConfig {
  RenderMode mode = RenderMode::volume;
  Vec3 background{0.0, 0.0, 0.0};
  int k = 8;             // points blended per ray in knp mode
  unsigned threads = 1;  // rows are split across threads
};

/// RGB in [0, 1] plus the weight-expected t per pixel (NaN where nothing
/// was retained).
struct Image {
  int width = 0;
  int height = 0;
  std::vector<Vec3> color;
  std::vector<double> depth;

  Image(int w, int h);
  std::size_t index(const Pixel& p) const {
    return static_cast<std::size_t>(p.u) +
           static_cast<std::size_t>(p.v) * static_cast<std::size_t>(width);
  }
};

/// Normalized inverse-distance weights. When some distances are exactly zero
/// those points share the whole weight equally.
std::vector<double> inverse_distance_weights(std::span<const double> distances);

/// Result of compositing one ray's samples as a density field.
struct VolumeTrace {
  std::vector<double> sample_weights;  // tau_j * (1 - exp(-sigma_j * dt_j))
  std::vector<double> densities;       // sigma_j (infinite for alpha = 1)
  double transmittance = 1.0;          // left after the last sample
  Vec3 color;                          // including the background term
};

/**
 * Composites samples sorted by t. Each sample gets the density
 * sigma_j = -ln(1 - alpha_j) / dt_j so that its opacity over its segment
 * equals alpha_j. dt_j = t_{j+1} - t_j; the last sample reuses the previous
 * interval, or t_far - t_j when it is alone. An alpha of 1 ends the ray.
 */
VolumeTrace composite_volume(std::span<const SampleCandidate> samples,
                             std::span<const Vec3> sample_colors, double t_far,
                             const Vec3& background);

/// Rays must cover the camera's image, one per pixel.
Image render_knp(const HashIndex& index, std::span<const Ray> rays,
                 const SearchConfig& search, const SamplerConfig& sampler,
                 const RenderConfig& config);

Image render_volume(const HashIndex& index, std::span<const Ray> rays,
                    const SearchConfig& search, const SamplerConfig& sampler,
                    const RenderConfig& config);

Image render(const HashIndex& index, std::span<const Ray> rays,
             const SearchConfig& search, const SamplerConfig& sampler,
             const RenderConfig& config);

/// Binary P6, 8 bits per channel.
void write_ppm(std::ostream& out, const Image& image);

/// Binary P5, 16 bits big-endian; t mapped linearly from [t_near, t_far] to
/// [0, 65535]. Pixels without depth are written as 0.
void write_depth_pgm(std::ostream& out, const Image& image, double t_near,
                     double t_far);

}  // namespace hashpoint

#endif  // HASHPOINT_RENDERER_HPP
