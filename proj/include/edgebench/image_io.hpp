#pragma once

#include <filesystem>

#include "edgebench/datasets.hpp"

namespace edgebench {

/// Decode a PNG or binary/ASCII Netpbm (P2, P3, P5, P6) file into an RGB image with values in [0, 1].
/// Throws DataError when the file cannot be decoded.
Image read_image_rgb(const std::filesystem::path& path);

/// ITU-R BT.601 luma; gray inputs pass through unchanged.
Image to_grayscale(const Image& image);
/// Replicates a single channel into three.
Image to_rgb(const Image& image);

void write_netpbm(const Image& image, const std::filesystem::path& path);  // P5 or P6, 8-bit
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace edgebench
