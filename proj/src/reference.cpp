#include "defilter/reference.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace defilter::reference {

namespace {

int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

// Copy of the input with a `margin`-wide border filled by the boundary rule.
struct Padded {
    int height, width, channels, margin;
    std::vector<double> data;

    Padded(const Image& img, int m, Boundary boundary)
        : height(img.height), width(img.width), channels(img.channels),
          margin(m) {
        const int ph = height + 2 * m, pw = width + 2 * m;
        data.resize(static_cast<std::size_t>(ph) * pw * channels);
        for (int y = -m; y < height + m; ++y) {
            const int sy = boundary == Boundary::Periodic
                               ? wrap_index(y, height)
                               : reflect_index(y, height);
            for (int x = -m; x < width + m; ++x) {
                const int sx = boundary == Boundary::Periodic
                                   ? wrap_index(x, width)
                                   : reflect_index(x, width);
                for (int c = 0; c < channels; ++c) {
                    at(y, x, c) = img.at(sy, sx, c);
                }
            }
        }
    }

    double& at(int y, int x, int c) {
        return data[(static_cast<std::size_t>(y + margin) * (width + 2 * margin) +
                     (x + margin)) * channels + c];
    }
    double at(int y, int x, int c) const {
        return data[(static_cast<std::size_t>(y + margin) * (width + 2 * margin) +
                     (x + margin)) * channels + c];
    }
};

Image box_mean(const Image& input, int radius) {
    Padded pad(input, radius, Boundary::Symmetric);
    Image out(input.height, input.width, input.channels);
    const double norm = 1.0 / (static_cast<double>(2 * radius + 1) *
                               (2 * radius + 1));
    for (int y = 0; y < input.height; ++y) {
        for (int x = 0; x < input.width; ++x) {
            for (int c = 0; c < input.channels; ++c) {
                double sum = 0.0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    for (int dx = -radius; dx <= radius; ++dx) {
                        sum += pad.at(y + dy, x + dx, c);
                    }
                }
                out.at(y, x, c) = sum * norm;
            }
        }
    }
    return out;
}

}  // namespace

Image convolve(const Image& input, const Kernel& kernel, Boundary boundary) {
    if (kernel.height > input.height || kernel.width > input.width) {
        throw ParamError("kernel larger than image");
    }
    const int ay = kernel.anchor_y(), ax = kernel.anchor_x();
    Padded pad(input, std::max(kernel.height, kernel.width) / 2 + 1, boundary);
    Image out(input.height, input.width, input.channels);
    for (int y = 0; y < input.height; ++y) {
        for (int x = 0; x < input.width; ++x) {
            for (int c = 0; c < input.channels; ++c) {
                double sum = 0.0;
                for (int ky = 0; ky < kernel.height; ++ky) {
                    for (int kx = 0; kx < kernel.width; ++kx) {
                        sum += kernel.at(ky, kx) *
                               pad.at(y - (ky - ay), x - (kx - ax), c);
                    }
                }
                out.at(y, x, c) = sum;
            }
        }
    }
    return out;
}

Image bilateral(const Image& input, double sigma_s, double sigma_r,
                int radius) {
    if (sigma_s <= 0.0 || sigma_r <= 0.0 || radius < 1) {
        throw ParamError("bilateral: sigma_s, sigma_r must be > 0, radius >= 1");
    }
    Padded pad(input, radius, Boundary::Symmetric);
    Image out(input.height, input.width, input.channels);
    std::vector<double> acc(input.channels);

    // Same arithmetic as the parallel version (precomputed spatial weights,
    // reciprocal multiply) so the two agree to the last bit.
    std::vector<double> spatial(static_cast<std::size_t>(2 * radius + 1) *
                                (2 * radius + 1));
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            spatial[(dy + radius) * (2 * radius + 1) + dx + radius] =
                std::exp(-(static_cast<double>(dx) * dx +
                           static_cast<double>(dy) * dy) /
                         (2.0 * sigma_s * sigma_s));
        }
    }
    const double inv_2sr2 = 1.0 / (2.0 * sigma_r * sigma_r);

    for (int y = 0; y < input.height; ++y) {
        for (int x = 0; x < input.width; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double wsum = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                for (int dx = -radius; dx <= radius; ++dx) {
                    double dist2 = 0.0;
                    for (int c = 0; c < input.channels; ++c) {
                        const double d =
                            pad.at(y + dy, x + dx, c) - input.at(y, x, c);
                        dist2 += d * d;
                    }
                    const double wgt =
                        spatial[(dy + radius) * (2 * radius + 1) + dx + radius] *
                        std::exp(-dist2 * inv_2sr2);
                    wsum += wgt;
                    for (int c = 0; c < input.channels; ++c) {
                        acc[c] += wgt * pad.at(y + dy, x + dx, c);
                    }
                }
            }
            for (int c = 0; c < input.channels; ++c) {
                out.at(y, x, c) = acc[c] / wsum;
            }
        }
    }
    return out;
}

Image guided(const Image& input, int radius, double eps) {
    if (radius < 1 || eps <= 0.0) {
        throw ParamError("guided: radius >= 1 and eps > 0 required");
    }
    const Image mean = box_mean(input, radius);
    Image sq(input.height, input.width, input.channels);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        sq.data[i] = input.data[i] * input.data[i];
    }
    const Image corr = box_mean(sq, radius);

    Image a(input.height, input.width, input.channels);
    Image b(input.height, input.width, input.channels);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const double var = corr.data[i] - mean.data[i] * mean.data[i];
        a.data[i] = var / (var + eps);
        b.data[i] = mean.data[i] - a.data[i] * mean.data[i];
    }
    const Image mean_a = box_mean(a, radius);
    const Image mean_b = box_mean(b, radius);

    Image out(input.height, input.width, input.channels);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        out.data[i] = mean_a.data[i] * input.data[i] + mean_b.data[i];
    }
    return out;
}

Image median_filter(const Image& input, int radius) {
    if (radius < 1) throw ParamError("median: radius >= 1 required");
    Padded pad(input, radius, Boundary::Symmetric);
    const int n = (2 * radius + 1) * (2 * radius + 1);
    Image out(input.height, input.width, input.channels);
    std::vector<double> window(n);
    for (int y = 0; y < input.height; ++y) {
        for (int x = 0; x < input.width; ++x) {
            for (int c = 0; c < input.channels; ++c) {
                int i = 0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    for (int dx = -radius; dx <= radius; ++dx) {
                        window[i++] = pad.at(y + dy, x + dx, c);
                    }
                }
                std::sort(window.begin(), window.end());
                out.at(y, x, c) = window[n / 2];
            }
        }
    }
    return out;
}

}  // namespace defilter::reference
