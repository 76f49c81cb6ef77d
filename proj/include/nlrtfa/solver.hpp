#pragma once

#include <Eigen/Cholesky>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "nlrtfa/image.hpp"
#include "nlrtfa/patch_ops.hpp"
#include "nlrtfa/sensing.hpp"

namespace nlrtfa {

struct SolverConfig {
    double eta = 0.05;        // low-rank regularization weight
    double beta = 0.01;       // ADMM penalty
    int outer_iters = 50;     // I
    int inner_iters = 2;      // J
    int rank_ell = 20;        // requested rank; capped at min(patch dims)
    GroupingConfig grouping;
    // eta is scaled by (1 + sigma/10) when reconstructing noisy measurements
    double noise_sigma = 0.0;
    // stop outer loop early when relative change drops below this; 0 = off
    double early_exit_tol = 0.0;

    void validate() const;
};

struct AdmmState {
    Image x;
    Image z;
    Image mu;
    int outer_iter = 0;
    int inner_iter = 0;
};

/// Per-outer-iteration patch machinery: groups, rank-truncated tensors, and
/// the precomputed scatter sums the z-update needs.
struct LowRankField {
    std::vector<PatchGroup> groups;
    std::vector<Tensor3> lowrank_tensors;
    Image agg_numerator;  // sum of scattered low-rank tensors
    Image counts;         // per-pixel covering-slice count
    int degenerate_count = 0;
};

struct RunReportRow {
    int outer_iter = 0;
    double data_fidelity = 0.0;     // ||y - Phi x||_2
    double lowrank_residual = 0.0;  // sum_p ||gather(x) - L_p||_F^2
    double psnr_vs_ref = 0.0;       // NaN when no reference image given
    int degenerate_count = 0;
    double seconds = 0.0;
};

struct RunReport {
    std::vector<RunReportRow> rows;
    std::string inverter = "exact-woodbury";  // label for the dense x-update path

    void write_csv(const std::string& path, bool with_psnr) const;
};

/// Cached factorization of V = beta*I + Phi*Phi^T for the dense x-update.
class WoodburyCache {
  public:
    WoodburyCache(const SensingOperator& op, double beta);

    double beta() const { return beta_; }
    bool matches(const SensingOperator& op, double beta) const;
    const Eigen::LLT<Eigen::MatrixXd>& llt() const { return llt_; }

  private:
    double beta_ = 0.0;
    int rows_ = 0;
    Eigen::Index cols_ = 0;
    uint64_t op_seed_ = 0;
    double matrix_sum_ = 0.0;
    Eigen::LLT<Eigen::MatrixXd> llt_;
};

/// Fast initial estimate: zero-filled adjoint for partial Fourier; for dense
/// Gaussian operators, 40 accelerated iterative-soft-thresholding steps in an
/// orthonormal 2D DCT basis. Output clamped to [0, 255].
Image init_estimate(const SensingOperator& op, const Measurement& y);

/// Group, decompose (seeded per group with seed ^ group index), truncate to
/// cfg.rank_ell (capped at min(patch dims)) and precompute the scatter sums.
/// Groups whose decomposition stays degenerate after retries fall back to the
/// unmodified tensor and are counted.
LowRankField build_lowrank_field(const Image& x, const SolverConfig& cfg, uint64_t seed);

/// z = (eta*counts + beta)^{-1} (beta*x + mu/2 + eta*agg_numerator), pointwise.
Image z_update(const AdmmState& state, const LowRankField& field, const SolverConfig& cfg);

/// Fourier-space x-update: divide each frequency bin by (kept ? 1+beta : beta).
Image x_update_fourier(const AdmmState& state, const SensingOperator& op,
                       const Measurement& y, const SolverConfig& cfg);

/// Woodbury x-update: x = (Phi^T Phi + beta I)^{-1} rhs via the cached
/// M x M factorization.
Image x_update_dense(const AdmmState& state, const SensingOperator& op,
                     const Measurement& y, const SolverConfig& cfg,
                     const WoodburyCache& cache);

/// mu <- mu + 2 beta (x - z)
Image mu_update(const AdmmState& state, const SolverConfig& cfg);

/// Full reconstruction: init, then outer iterations of (re-group, decompose,
/// truncate) around an inner ADMM loop with mu reset per outer iteration.
/// Output clamped to [0, 255]; intermediate iterates are not clamped.
std::pair<Image, RunReport> reconstruct(const SensingOperator& op, const Measurement& y,
                                        const SolverConfig& cfg, uint64_t seed,
                                        const Image* reference = nullptr);

}  // namespace nlrtfa
