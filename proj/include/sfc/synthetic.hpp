#pragma once

#include <cstdint>

#include "sfc/image.hpp"

namespace sfc {

/// Two intensity regions split at w/2 (left = lo, right = hi) with optional
/// seeded Gaussian noise, clamped to [0,1].
Image two_region_image(int w, int h, double lo, double hi, double noise_sigma,
                       std::uint64_t seed);

/// Ground truth for two_region_image: 0 left, 1 right.
LabelMap two_region_truth(int w, int h);

/// Equal-mean texture pair: checkerboard of mean +/- amplitude (cell size
/// `period/2` pixels, period 2 by default) in the top half, flat mean below.
Image texture_flat_image(int w, int h, double mean, double amplitude, int cell = 1,
                         double noise_sigma = 0.0, std::uint64_t seed = 0);

/// Ground truth for texture_flat_image: 0 textured top, 1 flat bottom.
LabelMap texture_flat_truth(int w, int h);

} // namespace sfc
