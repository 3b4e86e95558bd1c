#pragma once

#include <filesystem>

#include "nnfn/image.hpp"

namespace nnfn {

enum class ImageFormat { png, ppm };

/// From the extension (.png, .ppm). Throws InvalidParameter otherwise.
ImageFormat format_from_path(const std::filesystem::path& path);

/// 8-bit RGB PNG (gray/palette/alpha are converted) or binary P6 PPM with
/// maxval 255. Throws IoError on unreadable or malformed files.
ColorImage load_image(const std::filesystem::path& path);

/// Clips to [0, 255], rounds to nearest and writes 8-bit RGB.
void save_image(const std::filesystem::path& path, const ColorImage& image);

}  // namespace nnfn
