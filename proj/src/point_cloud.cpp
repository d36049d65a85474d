// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/point_cloud.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>

namespace hashpoint {

Aabb PointCloud::bounds() const {
  Aabb box;
  for (const Vec3& p : positions) box.extend(p);
  return box;
}

void PointCloud::validate() const {
  if (!colors.empty() && colors.size() != positions.size()) {
    throw std::invalid_argument("point cloud: color count differs from point count");
  }
  for (const Vec3& p : positions) {
    if (!is_finite(p)) {
      throw std::invalid_argument("point cloud: non-finite coordinate");
    }
  }
}

namespace {

struct PlyProperty {
  std::string name;
  std::string type;
  bool is_list = false;
};

struct PlyElement {
  std::string name;
  std::size_t count = 0;
  std::vector<PlyProperty> properties;
};

bool is_integer_type(const std::string& type) {
  return type != "float" && type != "double" && type != "float32" &&
         type != "float64";
}

std::runtime_error ply_error(const std::string& what) {
  return std::runtime_error("ply: " + what);
}

}  // namespace

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line.rfind("ply", 0) != 0) {
    throw ply_error("missing magic 'ply'");
  }

  std::vector<PlyElement> elements;
  bool ascii = false;
  bool header_done = false;
  while (std::getline(in, line)) {
    std::istringstream tok(line);
    std::string word;
    if (!(tok >> word)) continue;
    if (word == "format") {
      std::string kind;
      tok >> kind;
      if (kind != "ascii") throw ply_error("only ascii format is supported, got " + kind);
      ascii = true;
    } else if (word == "comment" || word == "obj_info") {
      continue;
    } else if (word == "element") {
      PlyElement el;
      if (!(tok >> el.name >> el.count)) throw ply_error("malformed element line");
      elements.push_back(std::move(el));
    } else if (word == "property") {
      if (elements.empty()) throw ply_error("property before element");
      PlyProperty prop;
      std::string type;
      tok >> type;
      if (type == "list") {
        std::string count_type;
        tok >> count_type >> prop.type >> prop.name;
        prop.is_list = true;
      } else {
        prop.type = type;
        tok >> prop.name;
      }
      if (prop.name.empty()) throw ply_error("malformed property line");
      elements.back().properties.push_back(std::move(prop));
    } else if (word == "end_header") {
      header_done = true;
      break;
    } else {
      throw ply_error("unknown header keyword '" + word + "'");
    }
  }
  if (!header_done) throw ply_error("missing end_header");
  if (!ascii) throw ply_error("missing format line");

  const auto vertex = std::find_if(elements.begin(), elements.end(),
                                   [](const PlyElement& e) { return e.name == "vertex"; });
  if (vertex == elements.end()) throw ply_error("no vertex element");

  auto index_of = [&](const char* name) -> std::optional<std::size_t> {
    for (std::size_t i = 0; i < vertex->properties.size(); ++i) {
      if (vertex->properties[i].name == name) {
        if (vertex->properties[i].is_list) throw ply_error(std::string(name) + " is a list");
        return i;
      }
    }
    return std::nullopt;
  };
  const auto ix = index_of("x");
  const auto iy = index_of("y");
  const auto iz = index_of("z");
  if (!ix || !iy || !iz) throw ply_error("vertex element lacks x, y, z");
  const auto ir = index_of("red");
  const auto ig = index_of("green");
  const auto ib = index_of("blue");
  const bool with_color = ir && ig && ib;
  if ((ir || ig || ib) && !with_color) throw ply_error("partial color properties");

  PointCloud cloud;
  cloud.positions.reserve(vertex->count);
  if (with_color) cloud.colors.reserve(vertex->count);

  std::vector<double> values;
  for (const PlyElement& el : elements) {
    for (std::size_t row = 0; row < el.count; ++row) {
      if (!std::getline(in, line)) {
        throw ply_error("unexpected end of data in element '" + el.name + "'");
      }
      if (&el != &*vertex) continue;
      std::istringstream tok(line);
      values.clear();
      for (const PlyProperty& prop : el.properties) {
        double v = 0.0;
        if (prop.is_list) {
          std::size_t n = 0;
          if (!(tok >> n)) throw ply_error("bad list length");
          for (std::size_t k = 0; k < n; ++k) tok >> v;
          values.push_back(0.0);
        } else {
          if (!(tok >> v)) {
            throw ply_error("bad value for '" + prop.name + "' in vertex " +
                            std::to_string(row));
          }
          values.push_back(v);
        }
      }
      cloud.positions.push_back({values[*ix], values[*iy], values[*iz]});
      if (with_color) {
        auto channel = [&](std::size_t i) {
          const double v = values[i];
          return is_integer_type(vertex->properties[i].type) ? v / 255.0 : v;
        };
        cloud.colors.push_back({channel(*ir), channel(*ig), channel(*ib)});
      }
    }
  }
  cloud.validate();
  return cloud;
}

PointCloud load_ply(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_ply(in);
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\nelement vertex " << cloud.size() << '\n'
      << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors()) {
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  }
  out << "end_header\n";
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    out << p.x << ' ' << p.y << ' ' << p.z;
    if (cloud.has_colors()) {
      const Vec3& c = cloud.colors[i];
      for (double ch : {c.x, c.y, c.z}) {
        out << ' ' << static_cast<int>(std::lround(std::clamp(ch, 0.0, 1.0) * 255.0));
      }
    }
    out << '\n';
  }
  out.precision(old_precision);
}

namespace {

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream s(line);
  while (std::getline(s, field, ',')) {
    const auto b = field.find_first_not_of(" \t\r");
    const auto e = field.find_last_not_of(" \t\r");
    out.push_back(b == std::string::npos ? std::string() : field.substr(b, e - b + 1));
  }
  return out;
}

}  // namespace

PointCloud read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("csv: empty input");
  const auto header = split_csv(line);
  const bool xyz = header.size() >= 3 && header[0] == "x" && header[1] == "y" &&
                   header[2] == "z";
  const bool rgb = header.size() == 6 && header[3] == "r" && header[4] == "g" &&
                   header[5] == "b";
  if (!xyz || (header.size() != 3 && !rgb)) {
    throw std::runtime_error("csv: header must be x,y,z or x,y,z,r,g,b");
  }

  PointCloud cloud;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = split_csv(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("csv line " + std::to_string(line_no) +
                               ": expected " + std::to_string(header.size()) + " fields");
    }
    double v[6] = {};
    for (std::size_t i = 0; i < fields.size(); ++i) {
      std::size_t used = 0;
      try {
        v[i] = std::stod(fields[i], &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used == 0 || used != fields[i].size()) {
        throw std::runtime_error("csv line " + std::to_string(line_no) +
                                 ": bad number '" + fields[i] + "'");
      }
    }
    cloud.positions.push_back({v[0], v[1], v[2]});
    if (rgb) cloud.colors.push_back({v[3], v[4], v[5]});
  }
  cloud.validate();
  return cloud;
}

PointCloud load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_csv(in);
}

void write_csv(std::ostream& out, const PointCloud& cloud) {
  out << (cloud.has_colors() ? "x,y,z,r,g,b\n" : "x,y,z\n");
  const auto old_precision = out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.positions[i];
    out << p.x << ',' << p.y << ',' << p.z;
    if (cloud.has_colors()) {
      const Vec3& c = cloud.colors[i];
      out << ',' << c.x << ',' << c.y << ',' << c.z;
    }
    out << '\n';
  }
  out.precision(old_precision);
}

PointCloud load_point_cloud(const std::filesystem::path& path) {
  const std::string ext = path.extension().string();
  if (ext == ".ply" || ext == ".PLY") return load_ply(path);
  if (ext == ".csv" || ext == ".CSV") return load_csv(path);
  throw std::runtime_error("unsupported point cloud extension: " + path.string());
}

}  // namespace hashpoint
