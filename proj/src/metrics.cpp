#include "nlrtfa/metrics.hpp"

#include <array>
#include <cmath>
#include <limits>

namespace nlrtfa {

double psnr(const Image& a, const Image& b) {
    require_same_dims(a, b, "psnr");
    double mse = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        const double d = a.pixels[i] - b.pixels[i];
        mse += d * d;
    }
    mse /= static_cast<double>(a.size());
    if (mse == 0.0) return std::numeric_limits<double>::infinity();
    return 10.0 * std::log10(255.0 * 255.0 / mse);
}

namespace {

constexpr int kWin = 11;

std::array<double, kWin * kWin> gaussian_window() {
    std::array<double, kWin * kWin> w{};
    const double sigma = 1.5;
    double sum = 0.0;
    for (int i = 0; i < kWin; ++i)
        for (int j = 0; j < kWin; ++j) {
            const double di = i - (kWin - 1) / 2.0;
            const double dj = j - (kWin - 1) / 2.0;
            w[i * kWin + j] = std::exp(-(di * di + dj * dj) / (2.0 * sigma * sigma));
            sum += w[i * kWin + j];
        }
    for (double& v : w) v /= sum;
    return w;
}

}  // namespace

double ssim(const Image& a, const Image& b) {
    require_same_dims(a, b, "ssim");
    if (a.height < kWin || a.width < kWin)
        throw ImageTooSmall("ssim: images must be at least 11x11");

    static const std::array<double, kWin * kWin> w = gaussian_window();
    const double c1 = (0.01 * 255.0) * (0.01 * 255.0);
    const double c2 = (0.03 * 255.0) * (0.03 * 255.0);

    double acc = 0.0;
    long long windows = 0;
    for (int r = 0; r + kWin <= a.height; ++r) {
        for (int c = 0; c + kWin <= a.width; ++c) {
            double mx = 0, my = 0, mxx = 0, myy = 0, mxy = 0;
            for (int i = 0; i < kWin; ++i)
                for (int j = 0; j < kWin; ++j) {
                    const double wi = w[i * kWin + j];
                    const double x = a.at(r + i, c + j);
                    const double y = b.at(r + i, c + j);
                    mx += wi * x;
                    my += wi * y;
                    mxx += wi * x * x;
                    myy += wi * y * y;
                    mxy += wi * x * y;
                }
            const double vx = mxx - mx * mx;
            const double vy = myy - my * my;
            const double cov = mxy - mx * my;
            const double num = (2.0 * mx * my + c1) * (2.0 * cov + c2);
            const double den = (mx * mx + my * my + c1) * (vx + vy + c2);
            acc += num / den;
            ++windows;
        }
    }
    return acc / static_cast<double>(windows);
}

}  // namespace nlrtfa
