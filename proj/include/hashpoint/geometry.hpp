// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_GEOMETRY_HPP
#define HASHPOINT_GEOMETRY_HPP

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <vector>

#include "hashpoint/vec3.hpp"

namespace hashpoint {

/// Integer pixel coordinates. u grows to the right, v grows downward.
struct Pixel {
  int u = 0;
  int v = 0;
  friend constexpr bool operator==(const Pixel&, const Pixel&) = default;
};

/// Continuous image-plane coordinates of a projected point, in pixels, plus
/// the depth along the forward axis.
struct ImagePoint {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};

/**
 * Calibrated pinhole camera.
 *
 * The image plane sits at distance focal_length along the forward axis and is
 * measured in world units: a pixel is pixel_width x pixel_height world units.
 * Pixel (u, v) has its center at (u + 0.5, v + 0.5) in pixel coordinates.
 */
class Camera {
 public:
  /// Builds an orthonormal frame from a forward and an up hint.
  Camera(const Vec3& origin, const Vec3& forward, const Vec3& up,
         double focal_length, int width, int height, double pixel_width,
         double pixel_height);

  /// Uses the given rows as the frame; they must already be orthonormal.
  static Camera from_frame(const Vec3& origin, const Vec3& right,
                           const Vec3& up, const Vec3& forward,
                           double focal_length, int width, int height,
                           double pixel_width, double pixel_height);

  const Vec3& origin() const { return origin_; }
  const Vec3& right() const { return right_; }
  const Vec3& up() const { return up_; }
  const Vec3& forward() const { return forward_; }
  double focal_length() const { return focal_length_; }
  int width() const { return width_; }
  int height() const { return height_; }
  double pixel_width() const { return pixel_width_; }
  double pixel_height() const { return pixel_height_; }
  std::size_t pixel_count() const {
    return static_cast<std::size_t>(width_) * static_cast<std::size_t>(height_);
  }

  bool contains(const Pixel& p) const {
    return p.u >= 0 && p.v >= 0 && p.u < width_ && p.v < height_;
  }

  /// World-space center of a pixel on the image plane.
  Vec3 pixel_center(const Pixel& p) const;

  /// Projects a world point. Returns nullopt for points with forward depth
  /// <= 0.
  std::optional<ImagePoint> project(const Vec3& world) const;

  friend bool operator==(const Camera&, const Camera&) = default;

 private:
  Camera() = default;
  void validate() const;

  Vec3 origin_;
  Vec3 right_;
  Vec3 up_;
  Vec3 forward_;
  double focal_length_ = 1.0;
  int width_ = 1;
  int height_ = 1;
  double pixel_width_ = 1.0;
  double pixel_height_ = 1.0;
};

struct Ray {
  Vec3 origin;
  Vec3 direction;  // unit length
  double t_near = 0.0;
  double t_far = 0.0;
  Pixel pixel;

  Vec3 at(double t) const { return origin + direction * t; }
};

/// Throws std::invalid_argument unless |d| = 1 and 0 < t_near < t_far.
void validate(const Ray& ray);

enum class RadiusFormula { exact, approximate };

/**
 * Searching-kernel configuration.
 *
 * kernel_radius is the radius of the search disc on the image plane (world
 * units); disc_radius is the radius of the disc with the area of one pixel.
 * kernel_size = 2 * ceil(kernel_radius / disc_radius) + 1 pixels per side.
 */
struct SearchConfig {
  double kernel_radius = 0.0;
  double disc_radius = 0.0;
  int kernel_size = 1;
  RadiusFormula formula = RadiusFormula::exact;

  static SearchConfig make(const Camera& camera, double kernel_radius,
                           RadiusFormula formula = RadiusFormula::exact);

  /// Kernel radius expressed as a multiple of the pixel disc radius.
  static SearchConfig from_scale(const Camera& camera, double scale,
                                 RadiusFormula formula = RadiusFormula::exact);

  /// Half-width of the kernel in pixels; also the rasterization margin.
  int pad() const { return (kernel_size - 1) / 2; }
};

/// Radius of the disc whose area equals one pixel: sqrt(dx * dy / pi).
double pixel_disc_radius(const Camera& camera);

/// 2 * ceil(kernel_radius / disc_radius) + 1. Throws for disc_radius <= 0 or
/// negative kernel_radius.
int kernel_size(double kernel_radius, double disc_radius);

/// Cone radius at parameter t of a ray, from similar triangles through the
/// kernel disc edge on the image plane.
double adaptive_radius_exact(const Camera& camera, const Ray& ray, double t,
                             double kernel_radius);

/// Small-angle form of adaptive_radius_exact: |x - o| * r * f / |p_o - o|^2.
double adaptive_radius_approx(const Camera& camera, const Ray& ray, double t,
                              double kernel_radius);

double adaptive_radius(const Camera& camera, const Ray& ray, double t,
                       const SearchConfig& config);

/// The cone radius is linear in t; this is the radius per unit t for a ray.
double radius_slope(const Camera& camera, const Ray& ray,
                    const SearchConfig& config);

/// Kernel radius that makes the principal-axis cone radius equal r_min at
/// t_near.
double kernel_radius_for_min_radius(const Camera& camera, double t_near,
                                    double r_min,
                                    RadiusFormula formula = RadiusFormula::exact);

Ray make_ray(const Camera& camera, const Pixel& pixel, double t_near,
             double t_far);

/// One ray per pixel through its center, row-major (v outer, u inner).
std::vector<Ray> generate_rays(const Camera& camera, double t_near,
                               double t_far);

/// Key-value camera description, one entry per line:
///   f, width, height, pixel_width, pixel_height, origin x y z,
///   forward x y z, up x y z. Blank lines and '#' comments are ignored.
Camera parse_camera_config(std::istream& in);
Camera load_camera_config(const std::filesystem::path& path);
void write_camera_config(std::ostream& out, const Camera& camera);

}  // namespace hashpoint

#endif  // HASHPOINT_GEOMETRY_HPP
