#pragma once

#include <filesystem>

#include "image/image.hpp"

namespace inpaint_lab {

// Decodes PNG (any bit depth / color type, alpha dropped) or JPEG, chosen by
// file signature. Throws RuntimeFailure on undecodable input.
ImageU8 read_image(const std::filesystem::path& path);

// 8-bit RGB PNG, written atomically.
void write_png(const std::filesystem::path& path, const ImageU8& img);

// 1-bit grayscale PNG: 0 = black = corrupted, 1 = white = known.
void write_mask_png(const std::filesystem::path& path, const BinaryMask& mask);
// Any grayscale/RGB PNG; a pixel is known (1) when its luma is >= 128.
BinaryMask read_mask_png(const std::filesystem::path& path);

bool has_image_extension(const std::filesystem::path& path);

}  // namespace inpaint_lab
