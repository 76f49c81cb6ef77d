#pragma once

#include <complex>
#include <vector>

#include "nlrtfa/image.hpp"

namespace nlrtfa::fft {

/// Row-major complex frequency grid of a 2D transform.
using ComplexGrid = std::vector<std::complex<double>>;

/// Orthonormal (unitary) 2D DFT of a real image.
ComplexGrid forward2d(const Image& img);

/// Inverse orthonormal 2D DFT; returns the real part.
Image inverse2d_real(const ComplexGrid& grid, int height, int width);

/// Orthonormal 2D DCT-II and its inverse.
Image dct2(const Image& img);
Image idct2(const Image& img);

}  // namespace nlrtfa::fft
