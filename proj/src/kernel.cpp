#include "defilter/kernel.hpp"

#include <cmath>
#include <fstream>

namespace defilter {

namespace {

void require_odd_support(int support) {
    if (support < 1 || support % 2 == 0) {
        throw ParamError("kernel support must be odd and >= 1, got " +
                         std::to_string(support));
    }
}

}  // namespace

Kernel::Kernel(int h, int w) : height(h), width(w) {
    if (h < 1 || w < 1 || h % 2 == 0 || w % 2 == 0) {
        throw ParamError("kernel dimensions must be odd and >= 1");
    }
    weights.assign(static_cast<std::size_t>(h) * w, 0.0);
}

double Kernel::sum() const {
    double s = 0.0;
    for (double w : weights) s += w;
    return s;
}

Kernel Kernel::normalized() const {
    const double s = sum();
    if (s == 0.0) throw ParamError("cannot normalize zero-sum kernel");
    Kernel out = *this;
    for (double& w : out.weights) w /= s;
    return out;
}

Kernel delta_kernel() {
    Kernel k(1, 1);
    k.at(0, 0) = 1.0;
    return k;
}

Kernel gaussian_kernel(double sigma, int support) {
    if (sigma <= 0.0) throw ParamError("gaussian sigma must be > 0");
    if (support < 3) throw ParamError("gaussian support must be >= 3");
    require_odd_support(support);

    const int r = support / 2;
    Kernel k(support, support);
    for (int y = -r; y <= r; ++y) {
        for (int x = -r; x <= r; ++x) {
            k.at(y + r, x + r) =
                std::exp(-(static_cast<double>(x) * x + static_cast<double>(y) * y) /
                         (2.0 * sigma * sigma));
        }
    }
    return k.normalized();
}

int recommended_gaussian_support(double sigma) {
    int support = static_cast<int>(std::ceil(6.0 * sigma + 1.0));
    if (support % 2 == 0) ++support;
    return support < 3 ? 3 : support;
}

Kernel box_kernel(int radius) {
    if (radius < 1) throw ParamError("box radius must be >= 1");
    const int n = 2 * radius + 1;
    Kernel k(n, n);
    const double w = 1.0 / (static_cast<double>(n) * n);
    for (double& v : k.weights) v = w;
    return k;
}

Kernel disk_kernel(double r, int support) {
    if (r <= 0.0) throw ParamError("disk radius must be > 0");
    require_odd_support(support);

    const int half = support / 2;
    Kernel k(support, support);
    for (int y = -half; y <= half; ++y) {
        for (int x = -half; x <= half; ++x) {
            if (static_cast<double>(x) * x + static_cast<double>(y) * y <=
                r * r) {
                k.at(y + half, x + half) = 1.0;
            }
        }
    }
    return k.normalized();
}

Kernel load_kernel_text(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open kernel file: " + path);
    int h = 0, w = 0;
    if (!(in >> h >> w)) throw IoError("kernel file: bad dimensions in " + path);
    if (h < 1 || w < 1 || h % 2 == 0 || w % 2 == 0) {
        throw ParamError("kernel file: dimensions must be odd, got " +
                         std::to_string(h) + "x" + std::to_string(w));
    }
    Kernel k(h, w);
    for (double& v : k.weights) {
        if (!(in >> v)) throw IoError("kernel file: truncated weights in " + path);
    }
    return k;
}

}  // namespace defilter
