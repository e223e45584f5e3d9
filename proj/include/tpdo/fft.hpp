#pragma once

#include <span>

#include "tpdo/torus.hpp"

namespace tpdo::fft {

enum class Direction { Forward, Backward };

/// Unnormalized multi-dimensional DFT in place, row-major layout:
/// forward uses e^{-2 pi i k.j / N}, backward e^{+2 pi i k.j / N}.
/// Safe to call concurrently.
void transform(std::span<Complex> data, std::span<const int> sizes, Direction direction);

}  // namespace tpdo::fft
