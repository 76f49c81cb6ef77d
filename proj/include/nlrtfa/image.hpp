#pragma once

#include <cstddef>
#include <vector>

#include "nlrtfa/errors.hpp"

namespace nlrtfa {

/// Dense 2D grid of real intensities, row-major. Nominal range is [0, 255]
/// but intermediate solver iterates may leave it.
struct Image {
    int height = 0;
    int width = 0;
    std::vector<double> pixels;

    Image() = default;
    Image(int h, int w, double fill = 0.0)
        : height(h), width(w), pixels(static_cast<size_t>(h) * w, fill) {}

    double& at(int r, int c) { return pixels[static_cast<size_t>(r) * width + c]; }
    double at(int r, int c) const { return pixels[static_cast<size_t>(r) * width + c]; }

    size_t size() const { return pixels.size(); }
    bool same_dims(const Image& o) const { return height == o.height && width == o.width; }
};

inline void require_same_dims(const Image& a, const Image& b, const char* where) {
    if (!a.same_dims(b)) {
        throw DimensionMismatch(std::string(where) + ": image dimensions differ");
    }
}

/// Clamp a copy of the image to [0, 255].
Image clamp_to_byte_range(const Image& img);

}  // namespace nlrtfa
