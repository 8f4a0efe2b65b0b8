#include "defilter/image.hpp"

#include <cmath>
#include <sstream>

namespace defilter {

Image::Image(int h, int w, int c) : height(h), width(w), channels(c) {
    if (h <= 0 || w <= 0 || (c != 1 && c != 3)) {
        throw ParamError("invalid image dimensions");
    }
    data.assign(static_cast<std::size_t>(h) * w * c, 0.0);
}

Image Image::constant(int h, int w, int c, double value) {
    Image img(h, w, c);
    img.data.assign(img.data.size(), value);
    return img;
}

bool Image::all_finite() const {
    for (double v : data) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

void require_compatible(const Image& a, const Image& b) {
    if (!a.same_shape(b)) {
        std::ostringstream oss;
        oss << "dimension mismatch: " << a.height << "x" << a.width << "x"
            << a.channels << " vs " << b.height << "x" << b.width << "x"
            << b.channels;
        throw DimensionError(oss.str());
    }
}

double distance(const Image& a, const Image& b) {
    require_compatible(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return std::sqrt(sum);
}

double mse(const Image& a, const Image& b) {
    require_compatible(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.data.size(); ++i) {
        const double d = a.data[i] - b.data[i];
        sum += d * d;
    }
    return sum / static_cast<double>(a.data.size());
}

double psnr(const Image& reference, const Image& test) {
    const double m = mse(reference, test);
    if (m <= 0.0) return kPsnrCap;
    const double value = 10.0 * std::log10(1.0 / m);
    return value > kPsnrCap ? kPsnrCap : value;
}

}  // namespace defilter
