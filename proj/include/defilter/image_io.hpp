#pragma once

#include <string>

#include "defilter/image.hpp"

namespace defilter {

enum class ImageFormat {
    Png8,  // 8-bit gray or RGB PNG; decode v/255, encode round(clamp(v,0,1)*255)
    Pfm,   // 32-bit float PFM ("Pf" gray / "PF" rgb), little-endian, rows bottom-up
};

/// Picks a format from the file extension (.png / .pfm, case-insensitive).
ImageFormat format_from_path(const std::string& path);

Image load_image(const std::string& path, ImageFormat format);
Image load_image(const std::string& path);  // format from extension

void save_image(const Image& image, const std::string& path, ImageFormat format);
void save_image(const Image& image, const std::string& path);  // from extension

}  // namespace defilter
