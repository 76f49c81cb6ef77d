#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <vector>

#include "nlrtfa/errors.hpp"

namespace nlrtfa {

/// Dense 3-way tensor, slice-major storage (slice s is a contiguous
/// row-major rows x cols block).
struct Tensor3 {
    int rows = 0;    // m
    int cols = 0;    // n
    int slices = 0;  // k
    std::vector<double> data;

    Tensor3() = default;
    Tensor3(int m, int n, int k, double fill = 0.0)
        : rows(m), cols(n), slices(k),
          data(static_cast<size_t>(m) * n * k, fill) {}

    double& at(int i, int j, int s) {
        return data[(static_cast<size_t>(s) * rows + i) * cols + j];
    }
    double at(int i, int j, int s) const {
        return data[(static_cast<size_t>(s) * rows + i) * cols + j];
    }

    size_t size() const { return data.size(); }
};

double frobenius_norm(const Tensor3& t);

/// Result of a CP decomposition: t ~= sum_r lambdas[r] * A_col_r (x) B_col_r (x) C_col_r.
/// Columns of A, B, C are unit vectors; lambdas are non-negative and sorted
/// in descending order. rank() may be zero (zero tensor).
struct CpFactors {
    std::vector<double> lambdas;
    Eigen::MatrixXd A;  // m x R
    Eigen::MatrixXd B;  // n x R
    Eigen::MatrixXd C;  // k x R

    int rank() const { return static_cast<int>(lambdas.size()); }
};

/// CP decomposition of a 3-way tensor by simultaneous diagonalization of two
/// random slice contractions. For an exactly rank-R tensor (R <= min(m, n))
/// with generic factors the reconstruction matches to ~1e-6 relative error.
///
/// A tensor with Frobenius norm below 1e-12 * m*n*k yields rank 0. Unusable
/// random draws (complex or repeated eigenvalues, failed reciprocal pairing)
/// are retried up to 3 times with reseeded vectors before
/// DegenerateEigensystem is thrown.
CpFactors jenrich_decompose(const Tensor3& t, uint64_t rng_seed);

/// Keep the min(ell, R) components with the largest |lambda|. ell >= R is a
/// no-op.
CpFactors truncate_rank(const CpFactors& f, int ell);

/// Expand factors back into a dense tensor of the given dimensions.
Tensor3 reconstruct_cp(const CpFactors& f, int m, int n, int k);

/// SplitMix64 mix step; used to derive independent seeds from a master seed.
uint64_t mix_seed(uint64_t x);

}  // namespace nlrtfa
