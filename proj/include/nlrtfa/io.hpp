#pragma once

#include <string>

#include "nlrtfa/image.hpp"

namespace nlrtfa {

/// Load a binary netpbm image (P5 grayscale or P6 color, maxval 255). Color
/// inputs are converted with the BT.601 luma transform.
Image load_image(const std::string& path);

/// Write an 8-bit binary PGM (values rounded and clamped to [0, 255]).
void save_image_pgm(const Image& img, const std::string& path);

/// Center-crop to the requested dims; throws if the image is smaller.
Image center_crop(const Image& img, int height, int width);

}  // namespace nlrtfa
