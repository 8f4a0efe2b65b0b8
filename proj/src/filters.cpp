#include "defilter/filters.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

namespace defilter {

namespace {

int wrap_index(int i, int n) {
    i %= n;
    return i < 0 ? i + n : i;
}

// Half-sample symmetric reflection: -1 -> 0, -2 -> 1, n -> n-1, ...
int reflect_index(int i, int n) {
    while (i < 0 || i >= n) {
        if (i < 0) i = -1 - i;
        if (i >= n) i = 2 * n - 1 - i;
    }
    return i;
}

int map_index(int i, int n, Boundary boundary) {
    return boundary == Boundary::Periodic ? wrap_index(i, n)
                                          : reflect_index(i, n);
}

// Largest odd support that fits the image, at most `wanted`.
int capped_support(int wanted, int h, int w) {
    int cap = std::min(h, w);
    if (cap % 2 == 0) --cap;
    return std::min(wanted, std::max(cap, 1));
}

int gaussian_support_for(const GaussianConv& g, int h, int w) {
    const int wanted =
        g.support > 0 ? g.support : recommended_gaussian_support(g.sigma);
    return capped_support(wanted, h, w);
}

int disk_support_for(const DiskConv& d) {
    if (d.support > 0) return d.support;
    int s = 2 * static_cast<int>(std::ceil(d.radius)) + 1;
    if (s % 2 == 0) ++s;
    return s;
}

int bilateral_radius_for(const Bilateral& b) {
    return b.radius > 0 ? b.radius
                        : static_cast<int>(std::ceil(2.0 * b.sigma_s));
}

// Box mean with symmetric padding; every window has (2r+1)^2 samples.
Image box_mean(const Image& input, int radius) {
    const int h = input.height, w = input.width, ch = input.channels;
    Image out(h, w, ch);
    const double norm = 1.0 / (static_cast<double>(2 * radius + 1) *
                               (2 * radius + 1));
    const int span = 2 * radius + 1;
    std::vector<int> col_map(static_cast<std::size_t>(w) * span);
    for (int x = 0; x < w; ++x) {
        for (int dx = -radius; dx <= radius; ++dx) {
            col_map[static_cast<std::size_t>(x) * span + dx + radius] =
                reflect_index(x + dx, w);
        }
    }
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int* cols = &col_map[static_cast<std::size_t>(x) * span];
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int sy = reflect_index(y + dy, h);
                    for (int dx = 0; dx < span; ++dx) {
                        sum += input.at(sy, cols[dx], c);
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
    const int h = input.height, w = input.width, ch = input.channels;
    const int ay = kernel.anchor_y(), ax = kernel.anchor_x();
    const int kh = kernel.height, kw = kernel.width;
    Image out(h, w, ch);

    // Hoist all boundary mapping out of the hot loop: source rows/columns
    // per (pixel, tap) depend only on one coordinate each.
    std::vector<int> row_map(static_cast<std::size_t>(h) * kh);
    for (int y = 0; y < h; ++y) {
        for (int ky = 0; ky < kh; ++ky) {
            row_map[static_cast<std::size_t>(y) * kh + ky] =
                map_index(y - (ky - ay), h, boundary);
        }
    }
    std::vector<int> col_map(static_cast<std::size_t>(w) * kw);
    for (int x = 0; x < w; ++x) {
        for (int kx = 0; kx < kw; ++kx) {
            col_map[static_cast<std::size_t>(x) * kw + kx] =
                map_index(x - (kx - ax), w, boundary);
        }
    }

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        const int* rows = &row_map[static_cast<std::size_t>(y) * kh];
        for (int x = 0; x < w; ++x) {
            const int* cols = &col_map[static_cast<std::size_t>(x) * kw];
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                for (int ky = 0; ky < kh; ++ky) {
                    const int sy = rows[ky];
                    for (int kx = 0; kx < kw; ++kx) {
                        sum += kernel.at(ky, kx) * input.at(sy, cols[kx], c);
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
    const int h = input.height, w = input.width, ch = input.channels;
    Image out(h, w, ch);

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

#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::vector<double> acc(ch);
        for (int x = 0; x < w; ++x) {
            std::fill(acc.begin(), acc.end(), 0.0);
            double wsum = 0.0;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int sy = reflect_index(y + dy, h);
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int sx = reflect_index(x + dx, w);
                    double dist2 = 0.0;
                    for (int c = 0; c < ch; ++c) {
                        const double d = input.at(sy, sx, c) - input.at(y, x, c);
                        dist2 += d * d;
                    }
                    const double wgt =
                        spatial[(dy + radius) * (2 * radius + 1) + dx + radius] *
                        std::exp(-dist2 * inv_2sr2);
                    wsum += wgt;
                    for (int c = 0; c < ch; ++c) {
                        acc[c] += wgt * input.at(sy, sx, c);
                    }
                }
            }
            for (int c = 0; c < ch; ++c) out.at(y, x, c) = acc[c] / wsum;
        }
    }
    return out;
}

Image guided(const Image& input, int radius, double eps) {
    if (radius < 1 || eps <= 0.0) {
        throw ParamError("guided: radius >= 1 and eps > 0 required");
    }
    const int h = input.height, w = input.width, ch = input.channels;

    const Image mean = box_mean(input, radius);
    Image sq(h, w, ch);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        sq.data[i] = input.data[i] * input.data[i];
    }
    const Image corr = box_mean(sq, radius);

    Image a(h, w, ch), b(h, w, ch);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const double var = corr.data[i] - mean.data[i] * mean.data[i];
        a.data[i] = var / (var + eps);
        b.data[i] = mean.data[i] - a.data[i] * mean.data[i];
    }
    const Image mean_a = box_mean(a, radius);
    const Image mean_b = box_mean(b, radius);

    Image out(h, w, ch);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        out.data[i] = mean_a.data[i] * input.data[i] + mean_b.data[i];
    }
    return out;
}

Image median_filter(const Image& input, int radius) {
    if (radius < 1) throw ParamError("median: radius >= 1 required");
    const int h = input.height, w = input.width, ch = input.channels;
    const int n = (2 * radius + 1) * (2 * radius + 1);
    Image out(h, w, ch);
#pragma omp parallel for schedule(static)
    for (int y = 0; y < h; ++y) {
        std::vector<double> window(n);
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                int i = 0;
                for (int dy = -radius; dy <= radius; ++dy) {
                    const int sy = reflect_index(y + dy, h);
                    for (int dx = -radius; dx <= radius; ++dx) {
                        window[i++] =
                            input.at(sy, reflect_index(x + dx, w), c);
                    }
                }
                auto mid = window.begin() + n / 2;
                std::nth_element(window.begin(), mid, window.end());
                out.at(y, x, c) = *mid;
            }
        }
    }
    return out;
}

Image gamma_map(const Image& input, double gamma) {
    if (gamma <= 0.0) throw ParamError("gamma must be > 0");
    Image out(input.height, input.width, input.channels);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        const double v = std::max(input.data[i], kGammaFloor);
        out.data[i] = std::pow(v, gamma);
    }
    return out;
}

Image unsharp(const Image& input, double lambda, double sigma) {
    if (lambda < 0.0) throw ParamError("unsharp lambda must be >= 0");
    GaussianConv g{sigma, 0, Boundary::Periodic};
    const int support = gaussian_support_for(g, input.height, input.width);
    const Image blurred =
        convolve(input, gaussian_kernel(sigma, support), Boundary::Periodic);
    Image out(input.height, input.width, input.channels);
    for (std::size_t i = 0; i < input.data.size(); ++i) {
        out.data[i] =
            input.data[i] + lambda * (input.data[i] - blurred.data[i]);
    }
    return out;
}

Image box_downsample(const Image& input, int scale) {
    if (scale < 2) throw ParamError("downsample scale must be >= 2");
    if (input.height % scale != 0 || input.width % scale != 0) {
        throw ParamError("image dimensions not divisible by scale");
    }
    const int h = input.height / scale, w = input.width / scale;
    const int ch = input.channels;
    Image out(h, w, ch);
    const double norm = 1.0 / (static_cast<double>(scale) * scale);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            for (int c = 0; c < ch; ++c) {
                double sum = 0.0;
                for (int dy = 0; dy < scale; ++dy) {
                    for (int dx = 0; dx < scale; ++dx) {
                        sum += input.at(y * scale + dy, x * scale + dx, c);
                    }
                }
                out.at(y, x, c) = sum * norm;
            }
        }
    }
    return out;
}

namespace {

// Keys cubic (a = -0.5); weights are renormalized so constants pass exactly.
void cubic_weights(double frac, double w[4]) {
    const double a = -0.5;
    const double t[4] = {1.0 + frac, frac, 1.0 - frac, 2.0 - frac};
    for (int i = 0; i < 4; ++i) {
        const double s = std::abs(t[i]);
        if (s <= 1.0) {
            w[i] = (a + 2.0) * s * s * s - (a + 3.0) * s * s + 1.0;
        } else {
            w[i] = a * s * s * s - 5.0 * a * s * s + 8.0 * a * s - 4.0 * a;
        }
    }
    const double sum = w[0] + w[1] + w[2] + w[3];
    for (int i = 0; i < 4; ++i) w[i] /= sum;
}

// Separable 1D interpolation along one axis by an integer factor.
Image interpolate_axis(const Image& in, int scale, bool along_x,
                       Resampler method) {
    const int h = along_x ? in.height : in.height * scale;
    const int w = along_x ? in.width * scale : in.width;
    const int n_in = along_x ? in.width : in.height;
    Image out(h, w, in.channels);
    for (int y = 0; y < h; ++y) {
        for (int x = 0; x < w; ++x) {
            const int d = along_x ? x : y;
            const double src = (d + 0.5) / scale - 0.5;
            const int base = static_cast<int>(std::floor(src));
            const double frac = src - base;
            for (int c = 0; c < in.channels; ++c) {
                auto sample = [&](int i) {
                    const int idx = reflect_index(i, n_in);
                    return along_x ? in.at(y, idx, c) : in.at(idx, x, c);
                };
                double value;
                if (method == Resampler::Bilinear) {
                    value = (1.0 - frac) * sample(base) +
                            frac * sample(base + 1);
                } else {
                    double wgt[4];
                    cubic_weights(frac, wgt);
                    value = wgt[0] * sample(base - 1) + wgt[1] * sample(base) +
                            wgt[2] * sample(base + 1) +
                            wgt[3] * sample(base + 2);
                }
                out.at(y, x, c) = value;
            }
        }
    }
    return out;
}

}  // namespace

Image upsample(const Image& input, int scale, Resampler method) {
    if (scale < 2) throw ParamError("upsample scale must be >= 2");
    if (method == Resampler::Box) {
        Image out(input.height * scale, input.width * scale, input.channels);
        for (int y = 0; y < out.height; ++y) {
            for (int x = 0; x < out.width; ++x) {
                for (int c = 0; c < input.channels; ++c) {
                    out.at(y, x, c) = input.at(y / scale, x / scale, c);
                }
            }
        }
        return out;
    }
    return interpolate_axis(interpolate_axis(input, scale, true, method),
                            scale, false, method);
}

Image down_up(const Image& input, int scale, Resampler down, Resampler up) {
    if (down != Resampler::Box) {
        throw ParamError("down_up: only box downsampling is supported");
    }
    return upsample(box_downsample(input, scale), scale, up);
}

void validate_spec(const FilterSpec& spec) {
    std::visit(
        [](const auto& s) {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, GaussianConv>) {
                if (s.sigma <= 0.0) throw ParamError("gaussian sigma must be > 0");
                if (s.support != 0 && (s.support < 3 || s.support % 2 == 0)) {
                    throw ParamError("gaussian support must be odd and >= 3");
                }
            } else if constexpr (std::is_same_v<T, BoxConv>) {
                if (s.radius < 1) throw ParamError("box radius must be >= 1");
            } else if constexpr (std::is_same_v<T, DiskConv>) {
                if (s.radius <= 0.0) throw ParamError("disk radius must be > 0");
                if (s.support != 0 && s.support % 2 == 0) {
                    throw ParamError("disk support must be odd");
                }
            } else if constexpr (std::is_same_v<T, GenericConv>) {
                if (s.kernel.weights.empty()) throw ParamError("empty kernel");
            } else if constexpr (std::is_same_v<T, Bilateral>) {
                if (s.sigma_s <= 0.0 || s.sigma_r <= 0.0) {
                    throw ParamError("bilateral sigmas must be > 0");
                }
            } else if constexpr (std::is_same_v<T, Guided>) {
                if (s.radius < 1 || s.eps <= 0.0) {
                    throw ParamError("guided: radius >= 1 and eps > 0 required");
                }
            } else if constexpr (std::is_same_v<T, Median>) {
                if (s.radius < 1) throw ParamError("median radius must be >= 1");
            } else if constexpr (std::is_same_v<T, Gamma>) {
                if (s.gamma <= 0.0) throw ParamError("gamma must be > 0");
            } else if constexpr (std::is_same_v<T, UnsharpMask>) {
                if (s.lambda < 0.0) throw ParamError("unsharp lambda must be >= 0");
                if (s.sigma <= 0.0) throw ParamError("unsharp sigma must be > 0");
            } else if constexpr (std::is_same_v<T, DownUp>) {
                if (s.scale < 2) throw ParamError("downup scale must be >= 2");
            } else if constexpr (std::is_same_v<T, External>) {
                if (s.command_template.find("{IN}") == std::string::npos ||
                    s.command_template.find("{OUT}") == std::string::npos) {
                    throw ParamError(
                        "external command template must contain {IN} and {OUT}");
                }
                if (s.timeout_seconds <= 0.0) {
                    throw ParamError("external timeout must be > 0");
                }
            }
        },
        spec);
}

std::string filter_name(const FilterSpec& spec) {
    return std::visit(
        [](const auto& s) -> std::string {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Identity>) return "identity";
            else if constexpr (std::is_same_v<T, GaussianConv>) return "gaussian";
            else if constexpr (std::is_same_v<T, BoxConv>) return "box";
            else if constexpr (std::is_same_v<T, DiskConv>) return "disk";
            else if constexpr (std::is_same_v<T, GenericConv>) return "conv";
            else if constexpr (std::is_same_v<T, Bilateral>) return "bilateral";
            else if constexpr (std::is_same_v<T, Guided>) return "guided";
            else if constexpr (std::is_same_v<T, Median>) return "median";
            else if constexpr (std::is_same_v<T, Gamma>) return "gamma";
            else if constexpr (std::is_same_v<T, UnsharpMask>) return "unsharp";
            else if constexpr (std::is_same_v<T, DownUp>) return "downup";
            else return "external";
        },
        spec);
}

std::optional<Kernel> kernel_for(const FilterSpec& spec, int grid_h,
                                 int grid_w) {
    if (const auto* g = std::get_if<GaussianConv>(&spec)) {
        return gaussian_kernel(g->sigma, gaussian_support_for(*g, grid_h, grid_w));
    }
    if (const auto* b = std::get_if<BoxConv>(&spec)) {
        return box_kernel(b->radius);
    }
    if (const auto* d = std::get_if<DiskConv>(&spec)) {
        return disk_kernel(d->radius, disk_support_for(*d));
    }
    if (const auto* c = std::get_if<GenericConv>(&spec)) {
        return c->kernel;
    }
    if (std::holds_alternative<Identity>(spec)) {
        return delta_kernel();
    }
    if (const auto* u = std::get_if<UnsharpMask>(&spec)) {
        GaussianConv g{u->sigma, 0, Boundary::Periodic};
        Kernel k = gaussian_kernel(u->sigma,
                                   gaussian_support_for(g, grid_h, grid_w));
        for (double& w : k.weights) w *= -u->lambda;
        k.at(k.anchor_y(), k.anchor_x()) += 1.0 + u->lambda;
        return k;
    }
    return std::nullopt;
}

Image apply_filter(const FilterSpec& spec, const Image& input) {
    validate_spec(spec);
    return std::visit(
        [&](const auto& s) -> Image {
            using T = std::decay_t<decltype(s)>;
            if constexpr (std::is_same_v<T, Identity>) {
                return input;
            } else if constexpr (std::is_same_v<T, GaussianConv>) {
                const int support =
                    gaussian_support_for(s, input.height, input.width);
                return convolve(input, gaussian_kernel(s.sigma, support),
                                s.boundary);
            } else if constexpr (std::is_same_v<T, BoxConv>) {
                return convolve(input, box_kernel(s.radius), s.boundary);
            } else if constexpr (std::is_same_v<T, DiskConv>) {
                return convolve(input,
                                disk_kernel(s.radius, disk_support_for(s)),
                                s.boundary);
            } else if constexpr (std::is_same_v<T, GenericConv>) {
                return convolve(input, s.kernel, s.boundary);
            } else if constexpr (std::is_same_v<T, Bilateral>) {
                return bilateral(input, s.sigma_s, s.sigma_r,
                                 bilateral_radius_for(s));
            } else if constexpr (std::is_same_v<T, Guided>) {
                return guided(input, s.radius, s.eps);
            } else if constexpr (std::is_same_v<T, Median>) {
                return median_filter(input, s.radius);
            } else if constexpr (std::is_same_v<T, Gamma>) {
                return gamma_map(input, s.gamma);
            } else if constexpr (std::is_same_v<T, UnsharpMask>) {
                return unsharp(input, s.lambda, s.sigma);
            } else if constexpr (std::is_same_v<T, DownUp>) {
                return down_up(input, s.scale, s.down, s.up);
            } else {
                return external_filter(s, input);
            }
        },
        spec);
}

}  // namespace defilter
