// SPDX-License-Identifier: Apache-2.0

#include "hashpoint/morton.hpp"

namespace hashpoint::morton {

namespace {

struct Walker {
  std::uint32_t width;
  std::uint32_t height;
  std::vector<std::uint32_t>& out;

  void visit(std::uint32_t x0, std::uint32_t y0, std::uint32_t size) {
    if (x0 >= width || y0 >= height) return;
    if (size == 1) {
      out.push_back(x0 + y0 * width);
      return;
    }
    const std::uint32_t h = size / 2;
    visit(x0, y0, h);
    visit(x0 + h, y0, h);
    visit(x0, y0 + h, h);
    visit(x0 + h, y0 + h, h);
  }
};

}  // namespace

std::vector<std::uint32_t> z_order_keys(std::uint32_t width, std::uint32_t height) {
  std::vector<std::uint32_t> keys;
  if (width == 0 || height == 0) return keys;
  keys.reserve(static_cast<std::size_t>(width) * height);
  std::uint32_t side = 1;
  while (side < width || side < height) side <<= 1;
  Walker{width, height, keys}.visit(0, 0, side);
  return keys;
}

}  // namespace hashpoint::morton
