#pragma once

#include "nlrtfa/image.hpp"

namespace nlrtfa {

/// Peak signal-to-noise ratio with peak 255; +infinity for identical images.
double psnr(const Image& a, const Image& b);

/// Mean structural similarity over 11x11 Gaussian windows (sigma 1.5),
/// C1 = (0.01*255)^2, C2 = (0.03*255)^2, full-overlap windows only.
double ssim(const Image& a, const Image& b);

}  // namespace nlrtfa
