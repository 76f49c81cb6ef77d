#include "nlrtfa/sensing.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <random>

namespace nlrtfa {

size_t RadialMask::kept_count() const {
    size_t n = 0;
    for (uint8_t b : keep) n += b != 0;
    return n;
}

namespace {

void rasterize_lines(RadialMask& mask, int line_count) {
    const int h = mask.height, w = mask.width;
    std::fill(mask.keep.begin(), mask.keep.end(), uint8_t{0});
    mask.keep[0] = 1;  // DC
    const int lo_u = -(h / 2), hi_u = (h - 1) / 2;
    const int lo_v = -(w / 2), hi_v = (w - 1) / 2;
    const int rmax = static_cast<int>(std::ceil(std::hypot(h / 2.0, w / 2.0)));
    for (int j = 0; j < line_count; ++j) {
        const double theta = j * M_PI / line_count;
        const double su = std::sin(theta), sv = std::cos(theta);
        for (int t = 0; t <= rmax; ++t) {
            const int pu = static_cast<int>(std::lround(t * su));
            const int pv = static_cast<int>(std::lround(t * sv));
            if (pu < lo_u || pu > hi_u || pv < lo_v || pv > hi_v) continue;
            const int u = (pu % h + h) % h;
            const int v = (pv % w + w) % w;
            mask.keep[static_cast<size_t>(u) * w + v] = 1;
        }
    }
    // conjugate symmetrization
    for (int u = 0; u < h; ++u)
        for (int v = 0; v < w; ++v)
            if (mask.keep[static_cast<size_t>(u) * w + v])
                mask.keep[static_cast<size_t>((h - u) % h) * w + (w - v) % w] = 1;
    mask.line_count = line_count;
    mask.csr_actual = static_cast<double>(mask.kept_count()) / (static_cast<double>(h) * w);
}

}  // namespace

RadialMask make_radial_mask(int height, int width, double csr, uint64_t /*lines_seed*/) {
    if (!(csr > 0.0 && csr <= 1.0))
        throw InvalidRatio("make_radial_mask: csr must be in (0, 1]");
    RadialMask mask;
    mask.height = height;
    mask.width = width;
    mask.csr_target = csr;
    mask.keep.assign(static_cast<size_t>(height) * width, 0);
    if (csr == 1.0) {
        std::fill(mask.keep.begin(), mask.keep.end(), uint8_t{1});
        mask.csr_actual = 1.0;
        mask.line_count = 0;
        return mask;
    }
    const int max_lines = 16 * std::max(height, width);
    for (int lines = 1; lines <= max_lines; ++lines) {
        rasterize_lines(mask, lines);
        if (mask.csr_actual >= csr) return mask;
    }
    throw InvalidRatio("make_radial_mask: target ratio unreachable with radial lines");
}

SensingOperator SensingOperator::partial_fourier(RadialMask mask) {
    SensingOperator op;
    op.kind_ = Kind::PartialFourier;
    op.height_ = mask.height;
    op.width_ = mask.width;
    for (size_t i = 0; i < mask.keep.size(); ++i)
        if (mask.keep[i]) op.kept_bins_.push_back(static_cast<int>(i));
    op.output_dim_ = static_cast<int>(op.kept_bins_.size());
    op.mask_ = std::move(mask);
    return op;
}

SensingOperator SensingOperator::dense_gaussian(int m_rows, int height, int width,
                                                uint64_t seed) {
    const Eigen::Index n = static_cast<Eigen::Index>(height) * width;
    Eigen::MatrixXd phi(m_rows, n);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    const double scale = 1.0 / std::sqrt(static_cast<double>(m_rows));
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < n; ++c) phi(r, c) = gauss(rng) * scale;
    return dense_from_matrix(std::move(phi), height, width, seed);
}

SensingOperator SensingOperator::dense_from_matrix(Eigen::MatrixXd phi, int height, int width,
                                                   uint64_t seed) {
    if (phi.cols() != static_cast<Eigen::Index>(height) * width)
        throw DimensionMismatch("dense_from_matrix: matrix columns != H*W");
    SensingOperator op;
    op.kind_ = Kind::DenseGaussian;
    op.height_ = height;
    op.width_ = width;
    op.output_dim_ = static_cast<int>(phi.rows());
    op.seed_ = seed;
    op.phi_ = std::move(phi);
    return op;
}

const RadialMask& SensingOperator::mask() const {
    if (kind_ != Kind::PartialFourier)
        throw WrongOperatorVariant("mask(): operator is not partial Fourier");
    return mask_;
}

const Eigen::MatrixXd& SensingOperator::matrix() const {
    if (kind_ != Kind::DenseGaussian)
        throw WrongOperatorVariant("matrix(): operator is not dense Gaussian");
    return phi_;
}

const std::vector<int>& SensingOperator::kept_bins() const {
    if (kind_ != Kind::PartialFourier)
        throw WrongOperatorVariant("kept_bins(): operator is not partial Fourier");
    return kept_bins_;
}

Measurement SensingOperator::forward(const Image& x) const {
    if (x.height != height_ || x.width != width_)
        throw DimensionMismatch("forward: image dims do not match operator");
    Measurement y;
    if (kind_ == Kind::PartialFourier) {
        y.complex_valued = true;
        const fft::ComplexGrid grid = fft::forward2d(x);
        y.values.reserve(kept_bins_.size());
        for (int idx : kept_bins_) y.values.push_back(grid[idx]);
    } else {
        y.complex_valued = false;
        Eigen::Map<const Eigen::VectorXd> xv(x.pixels.data(), x.pixels.size());
        Eigen::VectorXd m = phi_ * xv;
        y.values.reserve(m.size());
        for (Eigen::Index i = 0; i < m.size(); ++i) y.values.emplace_back(m(i), 0.0);
    }
    return y;
}

Image SensingOperator::adjoint(const Measurement& y) const {
    if (static_cast<int>(y.size()) != output_dim_)
        throw DimensionMismatch("adjoint: measurement length does not match operator");
    if (kind_ == Kind::PartialFourier) {
        fft::ComplexGrid grid(static_cast<size_t>(height_) * width_);
        for (size_t i = 0; i < kept_bins_.size(); ++i) grid[kept_bins_[i]] = y.values[i];
        return fft::inverse2d_real(grid, height_, width_);
    }
    Eigen::VectorXd yv(output_dim_);
    for (int i = 0; i < output_dim_; ++i) yv(i) = y.values[i].real();
    Eigen::VectorXd xv = phi_.transpose() * yv;
    Image out(height_, width_);
    Eigen::Map<Eigen::VectorXd>(out.pixels.data(), xv.size()) = xv;
    return out;
}

Measurement SensingOperator::measure_noisy(const Image& x, double sigma,
                                           uint64_t noise_seed) const {
    if (sigma < 0.0) throw Error("measure_noisy: sigma must be >= 0");
    Measurement y = forward(x);
    if (sigma == 0.0) return y;
    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    if (y.complex_valued) {
        const double s = sigma / std::sqrt(2.0);  // sigma^2/2 per real component
        for (auto& z : y.values) {
            const double re = gauss(rng), im = gauss(rng);
            z += std::complex<double>(s * re, s * im);
        }
    } else {
        for (auto& z : y.values) z += gauss(rng) * sigma;
    }
    return y;
}

// --- serialization --------------------------------------------------------

namespace {

constexpr char kMaskMagic[] = "NLRTFA-MSK1";
constexpr char kMeasMagic[] = "NLRTFA-MEA1";
constexpr char kPhiMagic[] = "NLRTFA-PHI1";
constexpr size_t kMagicLen = 11;

void write_bytes(std::ofstream& f, const void* p, size_t n) {
    f.write(static_cast<const char*>(p), static_cast<std::streamsize>(n));
}

void read_bytes(std::ifstream& f, void* p, size_t n, const std::string& path) {
    f.read(static_cast<char*>(p), static_cast<std::streamsize>(n));
    if (!f) throw IoError("truncated or unreadable file: " + path);
}

template <typename T>
void write_le(std::ofstream& f, T v) {
    write_bytes(f, &v, sizeof(T));  // little-endian hosts only
}

template <typename T>
T read_le(std::ifstream& f, const std::string& path) {
    T v{};
    read_bytes(f, &v, sizeof(T), path);
    return v;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    return f;
}

std::ifstream open_in(const std::string& path, const char* magic) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw IoError("cannot open: " + path);
    char buf[kMagicLen];
    read_bytes(f, buf, kMagicLen, path);
    if (std::memcmp(buf, magic, kMagicLen) != 0)
        throw IoError("bad magic in " + path);
    return f;
}

}  // namespace

void save_mask(const RadialMask& mask, const std::string& path) {
    auto f = open_out(path);
    write_bytes(f, kMaskMagic, kMagicLen);
    write_le<uint32_t>(f, static_cast<uint32_t>(mask.height));
    write_le<uint32_t>(f, static_cast<uint32_t>(mask.width));
    std::vector<uint8_t> packed((mask.keep.size() + 7) / 8, 0);
    for (size_t i = 0; i < mask.keep.size(); ++i)
        if (mask.keep[i]) packed[i / 8] |= static_cast<uint8_t>(1u << (i % 8));
    write_bytes(f, packed.data(), packed.size());
    if (!f) throw IoError("write failed: " + path);
}

RadialMask load_mask(const std::string& path) {
    auto f = open_in(path, kMaskMagic);
    RadialMask mask;
    mask.height = static_cast<int>(read_le<uint32_t>(f, path));
    mask.width = static_cast<int>(read_le<uint32_t>(f, path));
    const size_t n = static_cast<size_t>(mask.height) * mask.width;
    std::vector<uint8_t> packed((n + 7) / 8);
    read_bytes(f, packed.data(), packed.size(), path);
    mask.keep.assign(n, 0);
    for (size_t i = 0; i < n; ++i)
        mask.keep[i] = (packed[i / 8] >> (i % 8)) & 1u;
    mask.csr_actual = static_cast<double>(mask.kept_count()) / static_cast<double>(n);
    mask.csr_target = mask.csr_actual;
    return mask;
}

void save_measurement(const Measurement& y, const std::string& path) {
    auto f = open_out(path);
    write_bytes(f, kMeasMagic, kMagicLen);
    write_le<uint8_t>(f, y.complex_valued ? 1 : 0);
    write_le<uint64_t>(f, y.values.size());
    for (const auto& z : y.values) {
        write_le<double>(f, z.real());
        if (y.complex_valued) write_le<double>(f, z.imag());
    }
    if (!f) throw IoError("write failed: " + path);
}

Measurement load_measurement(const std::string& path) {
    auto f = open_in(path, kMeasMagic);
    Measurement y;
    y.complex_valued = read_le<uint8_t>(f, path) & 1u;
    const uint64_t m = read_le<uint64_t>(f, path);
    y.values.reserve(m);
    for (uint64_t i = 0; i < m; ++i) {
        const double re = read_le<double>(f, path);
        const double im = y.complex_valued ? read_le<double>(f, path) : 0.0;
        y.values.emplace_back(re, im);
    }
    return y;
}

void save_gaussian_operator(const SensingOperator& op, const std::string& path) {
    const Eigen::MatrixXd& phi = op.matrix();
    auto f = open_out(path);
    write_bytes(f, kPhiMagic, kMagicLen);
    write_le<uint64_t>(f, static_cast<uint64_t>(phi.rows()));
    write_le<uint64_t>(f, static_cast<uint64_t>(phi.cols()));
    write_le<uint64_t>(f, op.seed());
    for (Eigen::Index r = 0; r < phi.rows(); ++r)
        for (Eigen::Index c = 0; c < phi.cols(); ++c) write_le<double>(f, phi(r, c));
    if (!f) throw IoError("write failed: " + path);
}

SensingOperator load_gaussian_operator(const std::string& path, int height, int width) {
    auto f = open_in(path, kPhiMagic);
    const uint64_t m = read_le<uint64_t>(f, path);
    const uint64_t n = read_le<uint64_t>(f, path);
    const uint64_t seed = read_le<uint64_t>(f, path);
    if (height == 0 && width == 0) {
        // square images unless caller says otherwise
        const auto side = static_cast<uint64_t>(std::llround(std::sqrt(static_cast<double>(n))));
        if (side * side != n)
            throw IoError("operator in " + path + " is not square; pass explicit dims");
        height = width = static_cast<int>(side);
    }
    if (static_cast<uint64_t>(height) * width != n)
        throw DimensionMismatch("load_gaussian_operator: dims do not match N");
    Eigen::MatrixXd phi(m, n);
    for (uint64_t r = 0; r < m; ++r)
        for (uint64_t c = 0; c < n; ++c) phi(r, c) = read_le<double>(f, path);
    return SensingOperator::dense_from_matrix(std::move(phi), height, width, seed);
}

}  // namespace nlrtfa
