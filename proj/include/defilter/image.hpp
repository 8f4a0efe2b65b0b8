#pragma once

#include <cstddef>
#include <vector>

#include "defilter/errors.hpp"

namespace defilter {

/// PSNR reported for identical images (and used as a cap), in dB.
inline constexpr double kPsnrCap = 99.0;

/// Real-valued image buffer, row-major, channel-interleaved.
///
/// Intensities are nominally in [0,1] but are never clamped: fixed-point
/// iterates routinely leave the nominal range. Treat instances as immutable
/// values once filled; every operation in the library returns new images.
struct Image {
    int height = 0;
    int width = 0;
    int channels = 1;  // 1 or 3
    std::vector<double> data;

    Image() = default;
    Image(int h, int w, int c);

    static Image constant(int h, int w, int c, double value);

    double& at(int y, int x, int c = 0) {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }
    double at(int y, int x, int c = 0) const {
        return data[(static_cast<std::size_t>(y) * width + x) * channels + c];
    }

    std::size_t samples() const { return data.size(); }

    bool same_shape(const Image& other) const {
        return height == other.height && width == other.width &&
               channels == other.channels;
    }

    bool all_finite() const;
};

/// Throws DimensionError unless a and b are metric-compatible.
void require_compatible(const Image& a, const Image& b);

/// Euclidean distance sqrt(sum (a_i - b_i)^2) over all samples.
double distance(const Image& a, const Image& b);

/// Mean squared error averaged over all samples (channels jointly).
double mse(const Image& a, const Image& b);

/// 10*log10(1/MSE) with peak 1.0, capped at kPsnrCap.
double psnr(const Image& reference, const Image& test);

}  // namespace defilter
