#include "nlrtfa/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <mutex>

namespace nlrtfa::fft {

namespace {

// FFTW's planner is not thread-safe; transforms are executed through plans
// created under this lock with FFTW_ESTIMATE (deterministic plan choice).
std::mutex g_planner_mutex;

}  // namespace

ComplexGrid forward2d(const Image& img) {
    const int h = img.height, w = img.width;
    ComplexGrid in(img.size()), out(img.size());
    for (size_t i = 0; i < img.size(); ++i) in[i] = img.pixels[i];
    {
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        fftw_plan plan = fftw_plan_dft_2d(
            h, w, reinterpret_cast<fftw_complex*>(in.data()),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_FORWARD,
            FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    const double scale = 1.0 / std::sqrt(static_cast<double>(img.size()));
    for (auto& z : out) z *= scale;
    return out;
}

Image inverse2d_real(const ComplexGrid& grid, int height, int width) {
    if (grid.size() != static_cast<size_t>(height) * width)
        throw DimensionMismatch("inverse2d_real: grid size does not match dims");
    ComplexGrid in(grid), out(grid.size());
    {
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        fftw_plan plan = fftw_plan_dft_2d(
            height, width, reinterpret_cast<fftw_complex*>(in.data()),
            reinterpret_cast<fftw_complex*>(out.data()), FFTW_BACKWARD,
            FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    Image img(height, width);
    const double scale = 1.0 / std::sqrt(static_cast<double>(grid.size()));
    for (size_t i = 0; i < grid.size(); ++i) img.pixels[i] = out[i].real() * scale;
    return img;
}

namespace {

Image dct_like(const Image& img, fftw_r2r_kind kind) {
    const int h = img.height, w = img.width;
    Image out(h, w);
    std::vector<double> in(img.pixels);
    {
        std::lock_guard<std::mutex> lock(g_planner_mutex);
        fftw_plan plan = fftw_plan_r2r_2d(h, w, in.data(), out.pixels.data(),
                                          kind, kind,
                                          FFTW_ESTIMATE | FFTW_PRESERVE_INPUT);
        fftw_execute(plan);
        fftw_destroy_plan(plan);
    }
    return out;
}

}  // namespace

Image dct2(const Image& img) {
    const int h = img.height, w = img.width;
    // FFTW REDFT10 is 2x the unnormalized DCT-II; rescale to the orthonormal
    // convention (factor s_0 = sqrt(1/N), s_k = sqrt(2/N) per axis).
    Image out = dct_like(img, FFTW_REDFT10);
    const double f0r = std::sqrt(1.0 / (4.0 * h)), fkr = std::sqrt(1.0 / (2.0 * h));
    const double f0c = std::sqrt(1.0 / (4.0 * w)), fkc = std::sqrt(1.0 / (2.0 * w));
    for (int r = 0; r < h; ++r) {
        const double fr = r == 0 ? f0r : fkr;
        for (int c = 0; c < w; ++c) out.at(r, c) *= fr * (c == 0 ? f0c : fkc);
    }
    return out;
}

Image idct2(const Image& img) {
    const int h = img.height, w = img.width;
    Image scaled = img;
    // REDFT01 weights the k=0 input by 1 instead of 2, hence sqrt(1/N) there
    const double f0r = std::sqrt(1.0 / h), fkr = std::sqrt(1.0 / (2.0 * h));
    const double f0c = std::sqrt(1.0 / w), fkc = std::sqrt(1.0 / (2.0 * w));
    for (int r = 0; r < h; ++r) {
        const double fr = r == 0 ? f0r : fkr;
        for (int c = 0; c < w; ++c) scaled.at(r, c) *= fr * (c == 0 ? f0c : fkc);
    }
    Image out = dct_like(scaled, FFTW_REDFT01);
    return out;
}

}  // namespace nlrtfa::fft
