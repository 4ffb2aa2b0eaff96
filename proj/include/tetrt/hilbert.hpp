#pragma once

#include <array>
#include <cstdint>

namespace tetrt {

// Position of `cell` along a 3-D Hilbert curve over a 2^order grid per axis.
// Keys lie in [0, 2^(3 order)); consecutive keys are face-adjacent cells.
// Throws InvalidArgument for order outside [1, 21] or coordinates >= 2^order.
std::uint64_t hilbert_index(const std::array<std::uint32_t, 3>& cell, unsigned order);

// Inverse of hilbert_index.
std::array<std::uint32_t, 3> hilbert_cell(std::uint64_t key, unsigned order);

}  // namespace tetrt
