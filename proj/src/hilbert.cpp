#include "tetrt/hilbert.hpp"

#include <string>

#include "tetrt/errors.hpp"

namespace tetrt {

namespace {

constexpr int kDims = 3;

void check_order(unsigned order) {
  if (order < 1 || order > 21) {
    throw InvalidArgument("hilbert: order must be in [1, 21], got " + std::to_string(order));
  }
}

}  // namespace

// Skilling's transpose formulation ("Programming the Hilbert curve", 2004).
std::uint64_t hilbert_index(const std::array<std::uint32_t, 3>& cell, unsigned order) {
  check_order(order);
  const std::uint32_t limit = 1u << order;
  for (int i = 0; i < kDims; ++i) {
    if (cell[i] >= limit) {
      throw InvalidArgument("hilbert: coordinate " + std::to_string(cell[i]) +
                            " out of range for order " + std::to_string(order));
    }
  }

  std::uint32_t x[kDims] = {cell[0], cell[1], cell[2]};
  const std::uint32_t top = 1u << (order - 1);

  // Inverse undo of the excess work.
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    const std::uint32_t p = q - 1;
    for (int i = 0; i < kDims; ++i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        const std::uint32_t t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }

  // Gray encode.
  for (int i = 1; i < kDims; ++i) x[i] ^= x[i - 1];
  std::uint32_t t = 0;
  for (std::uint32_t q = top; q > 1; q >>= 1) {
    if (x[kDims - 1] & q) t ^= q - 1;
  }
  for (int i = 0; i < kDims; ++i) x[i] ^= t;

  std::uint64_t key = 0;
  for (int bit = static_cast<int>(order) - 1; bit >= 0; --bit) {
    for (int i = 0; i < kDims; ++i) {
      key = (key << 1) | ((x[i] >> bit) & 1u);
    }
  }
  return key;
}

std::array<std::uint32_t, 3> hilbert_cell(std::uint64_t key, unsigned order) {
  check_order(order);
  if (key >> (3 * order)) {
    throw InvalidArgument("hilbert: key out of range");
  }
  std::uint32_t x[kDims] = {0, 0, 0};
  for (int bit = static_cast<int>(order) - 1; bit >= 0; --bit) {
    for (int i = 0; i < kDims; ++i) {
      const int shift = bit * kDims + (kDims - 1 - i);
      x[i] |= static_cast<std::uint32_t>((key >> shift) & 1u) << bit;
    }
  }

  const std::uint32_t n = 2u << (order - 1);
  // Gray decode.
  std::uint32_t t = x[kDims - 1] >> 1;
  for (int i = kDims - 1; i > 0; --i) x[i] ^= x[i - 1];
  x[0] ^= t;
  // Undo excess work.
  for (std::uint32_t q = 2; q != n; q <<= 1) {
    const std::uint32_t p = q - 1;
    for (int i = kDims - 1; i >= 0; --i) {
      if (x[i] & q) {
        x[0] ^= p;
      } else {
        t = (x[0] ^ x[i]) & p;
        x[0] ^= t;
        x[i] ^= t;
      }
    }
  }
  return {x[0], x[1], x[2]};
}

}  // namespace tetrt
