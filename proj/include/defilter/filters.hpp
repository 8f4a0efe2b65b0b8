#pragma once

#include <optional>
#include <string>
#include <variant>

#include "defilter/image.hpp"
#include "defilter/image_io.hpp"
#include "defilter/kernel.hpp"

namespace defilter {

/// Boundary handling for window-based filters. Periodic is the default for
/// convolutional filters so circular DFT analysis describes them exactly;
/// Symmetric (half-sample reflection) is the opt-in for visual quality.
enum class Boundary { Periodic, Symmetric };

enum class Resampler { Box, Bilinear, Bicubic };

struct Identity {};

struct GaussianConv {
    double sigma = 2.0;
    int support = 0;  // 0: recommended_gaussian_support(sigma), capped at image
    Boundary boundary = Boundary::Periodic;
};

struct BoxConv {
    int radius = 1;
    Boundary boundary = Boundary::Periodic;
};

struct DiskConv {
    double radius = 3.0;
    int support = 0;  // 0: smallest odd covering the disk
    Boundary boundary = Boundary::Periodic;
};

struct GenericConv {
    Kernel kernel;
    Boundary boundary = Boundary::Periodic;
};

/// Self-guided bilateral filter; range distance is Euclidean over channels.
struct Bilateral {
    double sigma_s = 3.0;
    double sigma_r = 0.1;
    int radius = 0;  // 0: ceil(2*sigma_s)
};

/// Self-guided guided filter, per channel.
struct Guided {
    int radius = 2;
    double eps = 0.01;
};

struct Median {
    int radius = 1;
};

/// Elementwise v^gamma. Input is clamped below at kGammaFloor first so the
/// infinite derivative of v^gamma at 0 cannot destroy local contraction.
struct Gamma {
    double gamma = 2.2;
};

inline constexpr double kGammaFloor = 1e-4;

/// I + lambda*(I - G_sigma * I), periodic Gaussian with recommended support.
struct UnsharpMask {
    double lambda = 0.5;
    double sigma = 2.0;
};

/// Box-average downsample by `scale`, then upsample back to the original
/// size. The low-resolution generation model used by super-resolution.
struct DownUp {
    int scale = 2;
    Resampler down = Resampler::Box;
    Resampler up = Resampler::Bicubic;
};

/// Black-box filter run as a subprocess. The command template must contain
/// literal {IN} and {OUT} placeholders, replaced by absolute temp paths.
struct External {
    std::string command_template;
    ImageFormat format = ImageFormat::Pfm;
    double timeout_seconds = 60.0;
};

using FilterSpec = std::variant<Identity, GaussianConv, BoxConv, DiskConv,
                                GenericConv, Bilateral, Guided, Median, Gamma,
                                UnsharpMask, DownUp, External>;

/// Throws ParamError if the spec violates its parameter constraints.
void validate_spec(const FilterSpec& spec);

/// Short lowercase name of the filter kind ("gaussian", "median", ...).
std::string filter_name(const FilterSpec& spec);

/// Applies the filter. Output has the input's dimensions; deterministic for
/// identical (spec, input) regardless of thread count.
Image apply_filter(const FilterSpec& spec, const Image& input);

/// Equivalent convolution kernel for linear filters on an HxW grid
/// (gaussian/box/disk/generic and the unsharp composite (1+l)*delta - l*G).
/// nullopt for nonlinear or non-convolutional specs.
std::optional<Kernel> kernel_for(const FilterSpec& spec, int grid_h, int grid_w);

// Individual operations (apply_filter dispatches to these).

Image convolve(const Image& input, const Kernel& kernel, Boundary boundary);
Image bilateral(const Image& input, double sigma_s, double sigma_r, int radius);
Image guided(const Image& input, int radius, double eps);
Image median_filter(const Image& input, int radius);
Image gamma_map(const Image& input, double gamma);
Image unsharp(const Image& input, double lambda, double sigma);
Image down_up(const Image& input, int scale, Resampler down, Resampler up);
Image external_filter(const External& spec, const Image& input);

/// Block average by an integer factor; dimensions must be divisible.
Image box_downsample(const Image& input, int scale);

/// Upsample by an integer factor (Box = pixel replication).
Image upsample(const Image& input, int scale, Resampler method);

}  // namespace defilter
