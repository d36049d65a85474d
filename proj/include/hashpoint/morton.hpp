// SPDX-License-Identifier: Apache-2.0

#ifndef HASHPOINT_MORTON_HPP
#define HASHPOINT_MORTON_HPP

#include <cstdint>
#include <vector>

namespace hashpoint::morton {

/// Spreads the low 32 bits of x so bit i moves to bit 2i.
constexpr std::uint64_t part1by1(std::uint64_t x) {
  x &= 0x00000000ffffffffULL;
  x = (x | (x << 16)) & 0x0000ffff0000ffffULL;
  x = (x | (x << 8)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x << 4)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x << 2)) & 0x3333333333333333ULL;
  x = (x | (x << 1)) & 0x5555555555555555ULL;
  return x;
}

constexpr std::uint64_t compact1by1(std::uint64_t x) {
  x &= 0x5555555555555555ULL;
  x = (x | (x >> 1)) & 0x3333333333333333ULL;
  x = (x | (x >> 2)) & 0x0f0f0f0f0f0f0f0fULL;
  x = (x | (x >> 4)) & 0x00ff00ff00ff00ffULL;
  x = (x | (x >> 8)) & 0x0000ffff0000ffffULL;
  x = (x | (x >> 16)) & 0x00000000ffffffffULL;
  return x;
}

/// x occupies the even bits, y the odd bits.
constexpr std::uint64_t encode(std::uint32_t x, std::uint32_t y) {
  return part1by1(x) | (part1by1(y) << 1);
}

constexpr void decode(std::uint64_t code, std::uint32_t& x, std::uint32_t& y) {
  x = static_cast<std::uint32_t>(compact1by1(code));
  y = static_cast<std::uint32_t>(compact1by1(code >> 1));
}

/// Row-major keys (x + y * width) of every cell of a width x height grid,
/// listed in ascending Morton order of (x, y). Cells are visited by a
/// quadtree walk over the zero-extended power-of-two square, pruning
/// quadrants that lie entirely outside the grid.
std::vector<std::uint32_t> z_order_keys(std::uint32_t width, std::uint32_t height);

}  // namespace hashpoint::morton

#endif  // HASHPOINT_MORTON_HPP
