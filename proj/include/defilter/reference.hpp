#pragma once

#include "defilter/filters.hpp"
#include "defilter/image.hpp"
#include "defilter/kernel.hpp"

namespace defilter::reference {

// Plain serial implementations of the window-based kernels, written as
// straightforward per-pixel loops over a padded copy of the input. They are
// the oracles for the parallel implementations and the baseline for the
// benchmark target.

Image convolve(const Image& input, const Kernel& kernel, Boundary boundary);
Image bilateral(const Image& input, double sigma_s, double sigma_r, int radius);
Image guided(const Image& input, int radius, double eps);
Image median_filter(const Image& input, int radius);

}  // namespace defilter::reference
