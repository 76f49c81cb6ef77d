#include "nlrtfa/io.hpp"

#include <cctype>
#include <cmath>
#include <fstream>
#include <vector>

namespace nlrtfa {

namespace {

int next_pnm_int(std::ifstream& f, const std::string& path) {
    // skip whitespace and '#' comments
    int ch = f.get();
    while (ch != EOF) {
        if (ch == '#') {
            while (ch != EOF && ch != '\n') ch = f.get();
        } else if (!std::isspace(ch)) {
            break;
        }
        ch = f.get();
    }
    if (ch == EOF || !std::isdigit(ch)) throw IoError("malformed netpbm header: " + path);
    int value = 0;
    while (ch != EOF && std::isdigit(ch)) {
        value = value * 10 + (ch - '0');
        ch = f.get();
    }
    return value;
}

}  // namespace

Image load_image(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    char m0 = 0, m1 = 0;
    f.get(m0);
    f.get(m1);
    if (m0 != 'P' || (m1 != '5' && m1 != '6'))
        throw IoError("unsupported image format (need binary PGM/PPM): " + path);
    const bool color = m1 == '6';
    const int w = next_pnm_int(f, path);
    const int h = next_pnm_int(f, path);
    const int maxval = next_pnm_int(f, path);
    if (maxval != 255) throw IoError("only maxval 255 supported: " + path);

    const size_t n = static_cast<size_t>(h) * w * (color ? 3 : 1);
    std::vector<unsigned char> raw(n);
    f.read(reinterpret_cast<char*>(raw.data()), static_cast<std::streamsize>(n));
    if (!f) throw IoError("truncated image data: " + path);

    Image img(h, w);
    if (color) {
        for (size_t i = 0; i < img.size(); ++i) {
            const double r = raw[3 * i], g = raw[3 * i + 1], b = raw[3 * i + 2];
            img.pixels[i] = 0.299 * r + 0.587 * g + 0.114 * b;
        }
    } else {
        for (size_t i = 0; i < img.size(); ++i) img.pixels[i] = raw[i];
    }
    return img;
}

void save_image_pgm(const Image& img, const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "P5\n" << img.width << " " << img.height << "\n255\n";
    std::vector<unsigned char> raw(img.size());
    for (size_t i = 0; i < img.size(); ++i) {
        double v = std::lround(img.pixels[i]);
        if (v < 0.0) v = 0.0;
        if (v > 255.0) v = 255.0;
        raw[i] = static_cast<unsigned char>(v);
    }
    f.write(reinterpret_cast<const char*>(raw.data()), static_cast<std::streamsize>(raw.size()));
    if (!f) throw IoError("write failed: " + path);
}

Image center_crop(const Image& img, int height, int width) {
    if (img.height < height || img.width < width)
        throw ImageTooSmall("center_crop: image smaller than requested crop");
    const int r0 = (img.height - height) / 2;
    const int c0 = (img.width - width) / 2;
    Image out(height, width);
    for (int r = 0; r < height; ++r)
        for (int c = 0; c < width; ++c) out.at(r, c) = img.at(r0 + r, c0 + c);
    return out;
}

}  // namespace nlrtfa
