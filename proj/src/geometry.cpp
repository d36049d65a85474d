// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/geometry.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hashpoint {

namespace {

constexpr double kOrthoTolerance = 1e-9;

bool near(double a, double b, double tol) { return std::fabs(a - b) <= tol; }

}  // namespace

Camera::Camera(const Vec3& origin, const Vec3& forward, const Vec3& up,
               double focal_length, int width, int height, double pixel_width,
               double pixel_height) {
  if (!(norm(forward) > 0.0) || !(norm(up) > 0.0)) {
    throw std::invalid_argument("camera: forward and up must be non-zero");
  }
  const Vec3 fwd = normalized(forward);
  const Vec3 side = cross(up, fwd);
  if (!(norm(side) > 1e-12)) {
    throw std::invalid_argument("camera: up is parallel to forward");
  }
  origin_ = origin;
  forward_ = fwd;
  right_ = normalized(side);
  up_ = cross(forward_, right_);
  focal_length_ = focal_length;
  width_ = width;
  height_ = height;
  pixel_width_ = pixel_width;
  pixel_height_ = pixel_height;
  validate();
}

Camera Camera::from_frame(const Vec3& origin, const Vec3& right, const Vec3& up,
                          const Vec3& forward, double focal_length, int width,
                          int height, double pixel_width, double pixel_height) {
  Camera cam;
  cam.origin_ = origin;
  cam.right_ = right;
  cam.up_ = up;
  cam.forward_ = forward;
  cam.focal_length_ = focal_length;
  cam.width_ = width;
  cam.height_ = height;
  cam.pixel_width_ = pixel_width;
  cam.pixel_height_ = pixel_height;
  cam.validate();
  return cam;
}

void Camera::validate() const {
  if (!is_finite(origin_)) throw std::invalid_argument("camera: origin not finite");
  const Vec3 rows[3] = {right_, up_, forward_};
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) {
      const double expected = i == j ? 1.0 : 0.0;
      if (!near(dot(rows[i], rows[j]), expected, kOrthoTolerance)) {
        throw std::invalid_argument("camera: orientation is not orthonormal");
      }
    }
  }
  if (!(focal_length_ > 0.0) || !std::isfinite(focal_length_)) {
    throw std::invalid_argument("camera: focal length must be positive");
  }
  if (!(pixel_width_ > 0.0) || !(pixel_height_ > 0.0) ||
      !std::isfinite(pixel_width_) || !std::isfinite(pixel_height_)) {
    throw std::invalid_argument("camera: pixel size must be positive");
  }
  if (width_ < 1 || height_ < 1) {
    throw std::invalid_argument("camera: image must be at least 1x1");
  }
}

Vec3 Camera::pixel_center(const Pixel& p) const {
  const double x = (p.u + 0.5 - 0.5 * width_) * pixel_width_;
  const double y = (0.5 * height_ - (p.v + 0.5)) * pixel_height_;
  return origin_ + right_ * x + up_ * y + forward_ * focal_length_;
}

std::optional<ImagePoint> Camera::project(const Vec3& world) const {
  const Vec3 rel = world - origin_;
  const double depth = dot(rel, forward_);
  if (!(depth > 0.0)) return std::nullopt;
  const double scale = focal_length_ / depth;
  const double x = dot(rel, right_) * scale;
  const double y = dot(rel, up_) * scale;
  return ImagePoint{x / pixel_width_ + 0.5 * width_,
                    0.5 * height_ - y / pixel_height_, depth};
}

void validate(const Ray& ray) {
  if (!near(norm(ray.direction), 1.0, 1e-9)) {
    throw std::invalid_argument("ray: direction must be unit length");
  }
  if (!(ray.t_near > 0.0) || !(ray.t_near < ray.t_far)) {
    throw std::invalid_argument("ray: require 0 < t_near < t_far");
  }
}

double pixel_disc_radius(const Camera& camera) {
  return std::sqrt(camera.pixel_width() * camera.pixel_height() /
                   std::numbers::pi);
}

int kernel_size(double kernel_radius, double disc_radius) {
  if (!(disc_radius > 0.0)) {
    throw std::invalid_argument("kernel_size: disc radius must be positive");
  }
  if (!(kernel_radius >= 0.0) || !std::isfinite(kernel_radius)) {
    throw std::invalid_argument("kernel_size: kernel radius must be >= 0");
  }
  return 2 * static_cast<int>(std::ceil(kernel_radius / disc_radius)) + 1;
}

SearchConfig SearchConfig::make(const Camera& camera, double kernel_radius,
                                RadiusFormula formula) {
  SearchConfig cfg;
  cfg.kernel_radius = kernel_radius;
  cfg.disc_radius = pixel_disc_radius(camera);
  cfg.kernel_size = hashpoint::kernel_size(kernel_radius, cfg.disc_radius);
  cfg.formula = formula;
  return cfg;
}

SearchConfig SearchConfig::from_scale(const Camera& camera, double scale,
                                      RadiusFormula formula) {
  return make(camera, scale * pixel_disc_radius(camera), formula);
}

namespace {

// |p_o - o| for the ray's pixel, plus the in-plane offset of p_o from the
// principal point, sqrt(|p_o - o|^2 - f^2).
struct PixelGeometry {
  double center_distance;
  double plane_offset;
};

PixelGeometry pixel_geometry(const Camera& camera, const Pixel& pixel) {
  const double f = camera.focal_length();
  const double dist = norm(camera.pixel_center(pixel) - camera.origin());
  double inner = dist * dist - f * f;
  if (inner < 0.0) {
    // Only rounding noise on the principal axis may push this below zero.
    if (inner < -1e-9 * f * f) {
      throw std::invalid_argument(
          "adaptive radius: pixel center closer than focal length");
    }
    inner = 0.0;
  }
  return {dist, std::sqrt(inner)};
}

double exact_slope(const Camera& camera, const Pixel& pixel,
                   double kernel_radius) {
  const double f = camera.focal_length();
  const PixelGeometry g = pixel_geometry(camera, pixel);
  const double lean = g.plane_offset - kernel_radius;
  return f * kernel_radius /
         (g.center_distance * std::sqrt(lean * lean + f * f));
}

double approx_slope(const Camera& camera, const Pixel& pixel,
                    double kernel_radius) {
  const PixelGeometry g = pixel_geometry(camera, pixel);
  return kernel_radius * camera.focal_length() /
         (g.center_distance * g.center_distance);
}

}  // namespace

double adaptive_radius_exact(const Camera& camera, const Ray& ray, double t,
                             double kernel_radius) {
  const double dist = norm(ray.at(t) - ray.origin);
  return dist * exact_slope(camera, ray.pixel, kernel_radius);
}

double adaptive_radius_approx(const Camera& camera, const Ray& ray, double t,
                              double kernel_radius) {
  const double dist = norm(ray.at(t) - ray.origin);
  return dist * approx_slope(camera, ray.pixel, kernel_radius);
}

double adaptive_radius(const Camera& camera, const Ray& ray, double t,
                       const SearchConfig& config) {
  return config.formula == RadiusFormula::exact
             ? adaptive_radius_exact(camera, ray, t, config.kernel_radius)
             : adaptive_radius_approx(camera, ray, t, config.kernel_radius);
}

double radius_slope(const Camera& camera, const Ray& ray,
                    const SearchConfig& config) {
  return config.formula == RadiusFormula::exact
             ? exact_slope(camera, ray.pixel, config.kernel_radius)
             : approx_slope(camera, ray.pixel, config.kernel_radius);
}

double kernel_radius_for_min_radius(const Camera& camera, double t_near,
                                    double r_min, RadiusFormula formula) {
  if (!(t_near > 0.0) || !(r_min >= 0.0)) {
    throw std::invalid_argument("kernel_radius_for_min_radius: bad arguments");
  }
  const double f = camera.focal_length();
  if (formula == RadiusFormula::approximate) return r_min * f / t_near;
  // On the principal axis r(t) = t * k / sqrt(k^2 + f^2).
  if (!(r_min < t_near)) {
    throw std::invalid_argument(
        "kernel_radius_for_min_radius: r_min must be smaller than t_near");
  }
  return r_min * f / std::sqrt(t_near * t_near - r_min * r_min);
}

Ray make_ray(const Camera& camera, const Pixel& pixel, double t_near,
             double t_far) {
  if (!(t_near > 0.0) || !(t_near < t_far)) {
    throw std::invalid_argument("ray: require 0 < t_near < t_far");
  }
  if (!camera.contains(pixel)) {
    throw std::invalid_argument("ray: pixel outside image");
  }
  return Ray{camera.origin(),
             normalized(camera.pixel_center(pixel) - camera.origin()), t_near,
             t_far, pixel};
}

std::vector<Ray> generate_rays(const Camera& camera, double t_near,
                               double t_far) {
  if (!(t_near > 0.0) || !(t_near < t_far)) {
    throw std::invalid_argument("generate_rays: require 0 < t_near < t_far");
  }
  std::vector<Ray> rays;
  rays.reserve(camera.pixel_count());
  for (int v = 0; v < camera.height(); ++v) {
    for (int u = 0; u < camera.width(); ++u) {
      rays.push_back(make_ray(camera, {u, v}, t_near, t_far));
    }
  }
  return rays;
}

Camera parse_camera_config(std::istream& in) {
  std::map<std::string, std::vector<double>> values;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) {
      line.erase(hash);
    }
    std::istringstream fields(line);
    std::string key;
    if (!(fields >> key)) continue;
    std::vector<double> nums;
    double x = 0.0;
    while (fields >> x) nums.push_back(x);
    if (!fields.eof()) {
      throw std::runtime_error("camera config line " + std::to_string(line_no) +
                               ": malformed value for '" + key + "'");
    }
    values[key] = std::move(nums);
  }

  auto get = [&](const std::string& key, std::size_t arity) {
    const auto it = values.find(key);
    if (it == values.end()) {
      throw std::runtime_error("camera config: missing key '" + key + "'");
    }
    if (it->second.size() != arity) {
      throw std::runtime_error("camera config: key '" + key + "' expects " +
                               std::to_string(arity) + " value(s)");
    }
    return it->second;
  };
  auto vec = [&](const std::string& key) {
    const auto v = get(key, 3);
    return Vec3{v[0], v[1], v[2]};
  };
  auto integer = [&](const std::string& key) {
    const double v = get(key, 1)[0];
    if (v != std::floor(v)) {
      throw std::runtime_error("camera config: '" + key + "' must be integral");
    }
    return static_cast<int>(v);
  };

  return Camera(vec("origin"), vec("forward"), vec("up"), get("f", 1)[0],
                integer("width"), integer("height"), get("pixel_width", 1)[0],
                get("pixel_height", 1)[0]);
}

Camera load_camera_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open camera config " + path.string());
  return parse_camera_config(in);
}

void write_camera_config(std::ostream& out, const Camera& camera) {
  const auto old_precision = out.precision(17);
  auto put = [&](const char* key, const Vec3& v) {
    out << key << ' ' << v.x << ' ' << v.y << ' ' << v.z << '\n';
  };
  out << "f " << camera.focal_length() << '\n'
      << "width " << camera.width() << '\n'
      << "height " << camera.height() << '\n'
      << "pixel_width " << camera.pixel_width() << '\n'
      << "pixel_height " << camera.pixel_height() << '\n';
  put("origin", camera.origin());
  put("forward", camera.forward());
  put("up", camera.up());
  out.precision(old_precision);
}

}  // namespace hashpoint
