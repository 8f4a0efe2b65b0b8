#pragma once

#include <optional>
#include <variant>

#include "defilter/reverse.hpp"
#include "defilter/spectral.hpp"

namespace defilter {

/// Zero-order super-resolution: reverse the down/up low-resolution model.
struct SrConfig {
    int scale = 2;
    int iterations = 10;
    std::optional<Image> init;  // e.g. another method's output; default J*
};

/// `lr_upsampled` is the low-res image already interpolated to target size;
/// it plays J* for f = down_up(scale). ground_truth is for reporting only.
ReverseResult super_resolve(const Image& lr_upsampled, const SrConfig& config,
                            const Image* ground_truth = nullptr);

/// Zero-order nonblind deconvolution with a known kernel.
struct DeconvConfig {
    Kernel kernel;
    int iterations = 30;
    Boundary boundary = Boundary::Periodic;
};

struct DeconvResult {
    ReverseResult reverse;
    SpectralReport spectrum;        // predicted reversibility class
    bool kernel_normalized = true;  // false: kernel sum differs from 1
};

DeconvResult deconvolve(const Image& blurred, const DeconvConfig& config,
                        const Image* ground_truth = nullptr);

/// Gamma / unsharp-mask reversal.
using PointwiseSpec = std::variant<Gamma, UnsharpMask>;

struct PointwiseResult {
    ReverseResult reverse;
    bool contraction_warning = false;  // unsharp lambda >= 1
};

PointwiseResult reverse_pointwise(const Image& filtered,
                                  const PointwiseSpec& spec,
                                  int iterations = 50,
                                  const Image* ground_truth = nullptr);

}  // namespace defilter
