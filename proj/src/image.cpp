#include "nlrtfa/image.hpp"

#include <algorithm>

namespace nlrtfa {

Image clamp_to_byte_range(const Image& img) {
    Image out = img;
    for (double& p : out.pixels) p = std::clamp(p, 0.0, 255.0);
    return out;
}

}  // namespace nlrtfa
