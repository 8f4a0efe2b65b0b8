#pragma once

#include <string>
#include <vector>

#include "defilter/errors.hpp"

namespace defilter {

/// 2D convolution kernel with odd dimensions; anchor is the center tap.
struct Kernel {
    int height = 0;
    int width = 0;
    std::vector<double> weights;  // row-major

    Kernel() = default;
    Kernel(int h, int w);

    double& at(int y, int x) { return weights[static_cast<std::size_t>(y) * width + x]; }
    double at(int y, int x) const { return weights[static_cast<std::size_t>(y) * width + x]; }

    int anchor_y() const { return height / 2; }
    int anchor_x() const { return width / 2; }

    double sum() const;
    Kernel normalized() const;  // scaled so weights sum to 1
};

/// 1x1 identity kernel.
Kernel delta_kernel();

/// Sampled exp(-(x^2+y^2)/(2 sigma^2)) on a support x support grid, sum 1.
Kernel gaussian_kernel(double sigma, int support);

/// Support that keeps Gaussian truncation negligible: smallest odd >= 6*sigma+1.
int recommended_gaussian_support(double sigma);

/// Uniform (2*radius+1)^2 averaging kernel.
Kernel box_kernel(int radius);

/// Hard indicator of x^2+y^2 <= r^2 on the support grid, normalized to sum 1.
/// No anti-aliased edge taps, for reproducibility.
Kernel disk_kernel(double r, int support);

/// Text kernel file: first line "H W", then H*W weights in row-major order.
Kernel load_kernel_text(const std::string& path);

}  // namespace defilter
