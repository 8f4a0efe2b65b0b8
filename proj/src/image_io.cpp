#include "defilter/image_io.hpp"

#include <png.h>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <vector>

namespace defilter {

namespace {

std::string lower_ext(const std::string& path) {
    const auto dot = path.find_last_of('.');
    if (dot == std::string::npos) return {};
    std::string ext = path.substr(dot + 1);
    std::transform(ext.begin(), ext.end(), ext.begin(),
                   [](unsigned char ch) { return std::tolower(ch); });
    return ext;
}

// ---------------------------------------------------------------------------
// PFM
// ---------------------------------------------------------------------------

// Reads one whitespace-delimited header token, skipping '#' comments.
std::string pfm_token(std::ifstream& in) {
    std::string tok;
    int ch;
    while ((ch = in.get()) != EOF) {
        if (ch == '#') {
            while ((ch = in.get()) != EOF && ch != '\n') {
            }
            continue;
        }
        if (std::isspace(ch)) {
            if (!tok.empty()) break;
            continue;
        }
        tok.push_back(static_cast<char>(ch));
    }
    if (tok.empty()) throw IoError("PFM: truncated header");
    return tok;
}

float byteswap_float(float v) {
    std::uint32_t bits;
    std::memcpy(&bits, &v, 4);
    bits = ((bits & 0x000000ffu) << 24) | ((bits & 0x0000ff00u) << 8) |
           ((bits & 0x00ff0000u) >> 8) | ((bits & 0xff000000u) >> 24);
    std::memcpy(&v, &bits, 4);
    return v;
}

Image load_pfm(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open file: " + path);

    const std::string magic = pfm_token(in);
    int channels;
    if (magic == "Pf") {
        channels = 1;
    } else if (magic == "PF") {
        channels = 3;
    } else {
        throw IoError("PFM: malformed header (bad magic '" + magic + "')");
    }

    int w, h;
    double scale;
    try {
        w = std::stoi(pfm_token(in));
        h = std::stoi(pfm_token(in));
        scale = std::stod(pfm_token(in));
    } catch (const std::exception&) {
        throw IoError("PFM: malformed header in " + path);
    }
    if (w <= 0 || h <= 0 || scale == 0.0) {
        throw IoError("PFM: malformed header in " + path);
    }
    const bool little_endian = scale < 0.0;

    Image img(h, w, channels);
    std::vector<float> row(static_cast<std::size_t>(w) * channels);
    // PFM stores rows bottom-to-top.
    for (int y = h - 1; y >= 0; --y) {
        in.read(reinterpret_cast<char*>(row.data()),
                static_cast<std::streamsize>(row.size() * sizeof(float)));
        if (!in) throw IoError("PFM: truncated pixel data in " + path);
        for (std::size_t i = 0; i < row.size(); ++i) {
            float v = row[i];
            if (little_endian != (std::endian::native == std::endian::little)) {
                v = byteswap_float(v);
            }
            img.data[static_cast<std::size_t>(y) * w * channels + i] = v;
        }
    }
    if (!img.all_finite()) throw IoError("PFM: non-finite samples in " + path);
    return img;
}

void save_pfm(const Image& image, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open file for writing: " + path);

    out << (image.channels == 1 ? "Pf" : "PF") << "\n"
        << image.width << " " << image.height << "\n"
        << (std::endian::native == std::endian::little ? "-1.0" : "1.0")
        << "\n";

    const std::size_t row_samples =
        static_cast<std::size_t>(image.width) * image.channels;
    std::vector<float> row(row_samples);
    for (int y = image.height - 1; y >= 0; --y) {
        for (std::size_t i = 0; i < row_samples; ++i) {
            row[i] = static_cast<float>(
                image.data[static_cast<std::size_t>(y) * row_samples + i]);
        }
        out.write(reinterpret_cast<const char*>(row.data()),
                  static_cast<std::streamsize>(row_samples * sizeof(float)));
    }
    if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// PNG (8-bit gray / RGB only)
// ---------------------------------------------------------------------------

struct FileCloser {
    void operator()(std::FILE* f) const {
        if (f) std::fclose(f);
    }
};

Image load_png(const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "rb"));
    if (!fp) throw IoError("cannot open file: " + path);

    png_byte header[8];
    if (std::fread(header, 1, 8, fp.get()) != 8 ||
        png_sig_cmp(header, 0, 8) != 0) {
        throw IoError("not a PNG file: " + path);
    }

    png_structp png =
        png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("libpng initialization failed");
    }

    std::vector<png_bytep> row_ptrs;
    std::vector<png_byte> pixels;
    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("PNG decode failed: " + path);
    }

    png_init_io(png, fp.get());
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    const int bit_depth = png_get_bit_depth(png, info);
    if (bit_depth == 16) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG bit depth 16 (8-bit only): " + path);
    }

    const int color_type = png_get_color_type(png, info);
    if (color_type == PNG_COLOR_TYPE_PALETTE) png_set_palette_to_rgb(png);
    if (color_type == PNG_COLOR_TYPE_GRAY && bit_depth < 8) {
        png_set_expand_gray_1_2_4_to_8(png);
    }
    if (png_get_valid(png, info, PNG_INFO_tRNS)) png_set_tRNS_to_alpha(png);
    png_set_strip_alpha(png);
    png_read_update_info(png, info);

    const int w = static_cast<int>(png_get_image_width(png, info));
    const int h = static_cast<int>(png_get_image_height(png, info));
    const int ch = static_cast<int>(png_get_channels(png, info));
    if (ch != 1 && ch != 3) {
        png_destroy_read_struct(&png, &info, nullptr);
        throw IoError("unsupported PNG channel layout: " + path);
    }

    const std::size_t stride = png_get_rowbytes(png, info);
    pixels.resize(stride * h);
    row_ptrs.resize(h);
    for (int y = 0; y < h; ++y) row_ptrs[y] = pixels.data() + stride * y;
    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);

    Image img(h, w, ch);
    const std::size_t row_samples = static_cast<std::size_t>(w) * ch;
    for (int y = 0; y < h; ++y) {
        const png_byte* src = pixels.data() + stride * y;
        for (std::size_t i = 0; i < row_samples; ++i) {
            img.data[static_cast<std::size_t>(y) * row_samples + i] =
                src[i] / 255.0;
        }
    }
    return img;
}

void save_png(const Image& image, const std::string& path) {
    std::unique_ptr<std::FILE, FileCloser> fp(std::fopen(path.c_str(), "wb"));
    if (!fp) throw IoError("cannot open file for writing: " + path);

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr,
                                              nullptr, nullptr);
    png_infop info = png ? png_create_info_struct(png) : nullptr;
    if (!png || !info) {
        png_destroy_write_struct(&png, &info);
        throw IoError("libpng initialization failed");
    }

    const std::size_t row_samples =
        static_cast<std::size_t>(image.width) * image.channels;
    std::vector<png_byte> pixels(row_samples * image.height);
    for (std::size_t i = 0; i < pixels.size(); ++i) {
        const double v = std::clamp(image.data[i], 0.0, 1.0);
        pixels[i] = static_cast<png_byte>(std::lround(v * 255.0));
    }
    std::vector<png_bytep> row_ptrs(image.height);
    for (int y = 0; y < image.height; ++y) {
        row_ptrs[y] = pixels.data() + row_samples * y;
    }

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        throw IoError("PNG encode failed: " + path);
    }

    png_init_io(png, fp.get());
    png_set_IHDR(png, info, image.width, image.height, 8,
                 image.channels == 1 ? PNG_COLOR_TYPE_GRAY
                                     : PNG_COLOR_TYPE_RGB,
                 PNG_INTERLACE_NONE, PNG_COMPRESSION_TYPE_DEFAULT,
                 PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

}  // namespace

ImageFormat format_from_path(const std::string& path) {
    const std::string ext = lower_ext(path);
    if (ext == "png") return ImageFormat::Png8;
    if (ext == "pfm") return ImageFormat::Pfm;
    throw IoError("cannot infer image format from path: " + path);
}

Image load_image(const std::string& path, ImageFormat format) {
    return format == ImageFormat::Pfm ? load_pfm(path) : load_png(path);
}

Image load_image(const std::string& path) {
    return load_image(path, format_from_path(path));
}

void save_image(const Image& image, const std::string& path,
                ImageFormat format) {
    if (format == ImageFormat::Pfm) {
        save_pfm(image, path);
    } else {
        save_png(image, path);
    }
}

void save_image(const Image& image, const std::string& path) {
    save_image(image, path, format_from_path(path));
}

}  // namespace defilter
