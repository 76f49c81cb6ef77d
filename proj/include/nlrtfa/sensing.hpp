#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "nlrtfa/fft.hpp"
#include "nlrtfa/image.hpp"

namespace nlrtfa {

/// Pseudo-radial frequency-domain sampling pattern: equiangular lines through
/// the DC bin, conjugate-symmetric, DC always kept.
struct RadialMask {
    int height = 0;
    int width = 0;
    std::vector<uint8_t> keep;  // row-major over the DFT grid
    double csr_target = 0.0;
    double csr_actual = 0.0;
    int line_count = 0;

    bool kept(int u, int v) const { return keep[static_cast<size_t>(u) * width + v] != 0; }
    size_t kept_count() const;
};

/// Lines are added at angles j*pi/L until the kept fraction reaches the
/// target; each line is rasterized by stepping the radius in unit increments
/// and rounding to the nearest bin. Deterministic; the seed parameter is
/// reserved for optional angle jitter and currently unused.
RadialMask make_radial_mask(int height, int width, double csr, uint64_t lines_seed = 0);

/// Measurement vector: complex for partial-Fourier operators, real for dense
/// Gaussian ones (imaginary parts all zero in that case).
struct Measurement {
    bool complex_valued = false;
    std::vector<std::complex<double>> values;

    size_t size() const { return values.size(); }
};

/// Linear measurement map Phi. Two variants:
///  - PartialFourier: masked orthonormal 2D DFT, kept bins enumerated in
///    row-major frequency order;
///  - DenseGaussian: explicit M x N matrix with i.i.d. N(0, 1/M) entries,
///    reproducible from the stored seed (rows act on row-major flattened
///    images).
class SensingOperator {
  public:
    enum class Kind { PartialFourier, DenseGaussian };

    static SensingOperator partial_fourier(RadialMask mask);
    static SensingOperator dense_gaussian(int m_rows, int height, int width, uint64_t seed);
    /// Dense operator from an explicit matrix (serialization, adapters, tests).
    static SensingOperator dense_from_matrix(Eigen::MatrixXd phi, int height, int width,
                                             uint64_t seed = 0);

    Kind kind() const { return kind_; }
    int input_height() const { return height_; }
    int input_width() const { return width_; }
    int output_dim() const { return output_dim_; }

    const RadialMask& mask() const;
    const Eigen::MatrixXd& matrix() const;
    uint64_t seed() const { return seed_; }

    /// Row-major frequency indices of the kept bins (PartialFourier only).
    const std::vector<int>& kept_bins() const;

    Measurement forward(const Image& x) const;
    Image adjoint(const Measurement& y) const;

    /// forward(x) plus i.i.d. Gaussian noise with per-measurement variance
    /// sigma^2 (complex measurements get sigma^2/2 per real component).
    Measurement measure_noisy(const Image& x, double sigma, uint64_t noise_seed) const;

  private:
    SensingOperator() = default;

    Kind kind_ = Kind::PartialFourier;
    int height_ = 0;
    int width_ = 0;
    int output_dim_ = 0;
    uint64_t seed_ = 0;
    RadialMask mask_;
    std::vector<int> kept_bins_;
    Eigen::MatrixXd phi_;
};

// --- binary file formats -------------------------------------------------
// All integers little-endian. Masks: magic "NLRTFA-MSK1", u32 H, u32 W, then
// the row-major bit-packed keep grid (LSB-first within each byte).
// Measurements: magic "NLRTFA-MEA1", flags byte (bit0 = complex), u64 M, then
// f64 values (re/im interleaved when complex). Gaussian operators: magic
// "NLRTFA-PHI1", u64 M, u64 N, u64 seed, then row-major f64 entries.

void save_mask(const RadialMask& mask, const std::string& path);
RadialMask load_mask(const std::string& path);

void save_measurement(const Measurement& y, const std::string& path);
Measurement load_measurement(const std::string& path);

void save_gaussian_operator(const SensingOperator& op, const std::string& path);
SensingOperator load_gaussian_operator(const std::string& path, int height = 0, int width = 0);

}  // namespace nlrtfa
