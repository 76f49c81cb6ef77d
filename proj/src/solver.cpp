#include "nlrtfa/solver.hpp"

#include "nlrtfa/metrics.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace nlrtfa {

void SolverConfig::validate() const {
    if (eta <= 0.0) throw Error("SolverConfig: eta must be > 0");
    if (beta <= 0.0) throw Error("SolverConfig: beta must be > 0");
    if (outer_iters < 1 || inner_iters < 1) throw Error("SolverConfig: iteration counts must be >= 1");
    if (rank_ell < 1) throw Error("SolverConfig: rank_ell must be >= 1");
    if (grouping.patch_rows < 2 || grouping.patch_cols < 2)
        throw Error("SolverConfig: patch dims must be >= 2");
    if (grouping.group_size < 2) throw Error("SolverConfig: group size must be >= 2");
    if (grouping.stride < 1) throw Error("SolverConfig: stride must be >= 1");
}

// --- initial estimate ------------------------------------------------------

namespace {

double spectral_norm_sq(const Eigen::MatrixXd& phi) {
    // power iteration on Phi^T Phi from a fixed start vector; the 5% margin
    // keeps the returned value an upper bound when the top eigenvalues are
    // closely spaced and convergence is slow
    Eigen::VectorXd v = Eigen::VectorXd::Ones(phi.cols()).normalized();
    double lam = 0.0;
    for (int it = 0; it < 500; ++it) {
        Eigen::VectorXd w = phi.transpose() * (phi * v);
        const double n = w.norm();
        if (n == 0.0) return 0.0;
        v = w / n;
        if (it > 5 && std::abs(n - lam) < 1e-9 * n) {
            lam = n;
            break;
        }
        lam = n;
    }
    return 1.05 * lam;
}

double max_abs_dct(const Image& img) {
    Image d = fft::dct2(img);
    double m = 0.0;
    for (double v : d.pixels) m = std::max(m, std::abs(v));
    return m;
}

/// Accelerated iterative soft-thresholding in the DCT domain. The threshold
/// anneals geometrically; the gradient step is normalized by ||Phi||^2.
Image ist_dct_recover(const SensingOperator& op, const Measurement& y) {
    const int h = op.input_height(), w = op.input_width();
    const Eigen::MatrixXd& phi = op.matrix();
    Eigen::VectorXd yv(op.output_dim());
    for (int i = 0; i < op.output_dim(); ++i) yv(i) = y.values[i].real();

    Eigen::VectorXd xt = phi.transpose() * yv;
    Image x0(h, w);
    Eigen::Map<Eigen::VectorXd>(x0.pixels.data(), xt.size()) = xt;

    const double lipschitz = std::max(spectral_norm_sq(phi), 1e-12);
    const double step = 1.0 / lipschitz;
    double tau = 0.1 * max_abs_dct(x0);

    constexpr int kIters = 40;
    constexpr double kAnneal = 0.85;
    Image x = x0, xprev = x0;
    double tk = 1.0;
    for (int it = 0; it < kIters; ++it) {
        const double tk1 = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * tk * tk));
        const double momentum = (tk - 1.0) / tk1;
        tk = tk1;
        Image g(h, w);
        for (size_t i = 0; i < g.size(); ++i)
            g.pixels[i] = x.pixels[i] + momentum * (x.pixels[i] - xprev.pixels[i]);
        Eigen::Map<Eigen::VectorXd> gv(g.pixels.data(), g.size());
        gv += step * (phi.transpose() * (yv - phi * gv));
        Image d = fft::dct2(g);
        for (double& v : d.pixels) {
            if (v > tau) v -= tau;
            else if (v < -tau) v += tau;
            else v = 0.0;
        }
        xprev = std::move(x);
        x = fft::idct2(d);
        tau *= kAnneal;
    }
    return x;
}

}  // namespace

Image init_estimate(const SensingOperator& op, const Measurement& y) {
    if (static_cast<int>(y.size()) != op.output_dim())
        throw DimensionMismatch("init_estimate: measurement length does not match operator");
    Image x = op.kind() == SensingOperator::Kind::PartialFourier
                  ? op.adjoint(y)
                  : ist_dct_recover(op, y);
    return clamp_to_byte_range(x);
}

// --- low-rank field --------------------------------------------------------

LowRankField build_lowrank_field(const Image& x, const SolverConfig& cfg, uint64_t seed) {
    const int cap = std::min(cfg.grouping.patch_rows, cfg.grouping.patch_cols);
    const int ell = std::min(cfg.rank_ell, cap);

    LowRankField field;
    field.groups = extract_patch_groups(x, cfg.grouping);
    field.lowrank_tensors.resize(field.groups.size());

    int degenerate = 0;
#ifdef _OPENMP
#pragma omp parallel for schedule(dynamic, 16) reduction(+ : degenerate)
#endif
    for (long long gi = 0; gi < static_cast<long long>(field.groups.size()); ++gi) {
        Tensor3 t = form_tensor(x, field.groups[gi]);
        try {
            CpFactors f = jenrich_decompose(t, seed ^ static_cast<uint64_t>(gi));
            f = truncate_rank(f, ell);
            field.lowrank_tensors[gi] = reconstruct_cp(f, t.rows, t.cols, t.slices);
        } catch (const DegenerateEigensystem&) {
            ++degenerate;
            field.lowrank_tensors[gi] = std::move(t);  // identity fallback
        }
    }
    field.degenerate_count = degenerate;

    auto [num, cnt] = aggregate(field.groups, field.lowrank_tensors, x.height, x.width);
    field.agg_numerator = std::move(num);
    field.counts = std::move(cnt);
    return field;
}

// --- ADMM updates ----------------------------------------------------------

Image z_update(const AdmmState& state, const LowRankField& field, const SolverConfig& cfg) {
    const double eta = cfg.eta * (1.0 + cfg.noise_sigma / 10.0);
    Image z(state.x.height, state.x.width);
    for (size_t i = 0; i < z.size(); ++i) {
        const double denom = eta * field.counts.pixels[i] + cfg.beta;
        z.pixels[i] = (cfg.beta * state.x.pixels[i] + 0.5 * state.mu.pixels[i] +
                       eta * field.agg_numerator.pixels[i]) /
                      denom;
    }
    return z;
}

Image x_update_fourier(const AdmmState& state, const SensingOperator& op,
                       const Measurement& y, const SolverConfig& cfg) {
    if (op.kind() != SensingOperator::Kind::PartialFourier)
        throw WrongOperatorVariant("x_update_fourier: operator is not partial Fourier");
    const int h = op.input_height(), w = op.input_width();
    Image rhs(h, w);
    for (size_t i = 0; i < rhs.size(); ++i)
        rhs.pixels[i] = cfg.beta * state.z.pixels[i] - 0.5 * state.mu.pixels[i];
    fft::ComplexGrid grid = fft::forward2d(rhs);
    const auto& bins = op.kept_bins();
    for (size_t i = 0; i < bins.size(); ++i) grid[bins[i]] += y.values[i];
    const auto& keep = op.mask().keep;
    for (size_t i = 0; i < grid.size(); ++i)
        grid[i] /= keep[i] ? (1.0 + cfg.beta) : cfg.beta;
    return fft::inverse2d_real(grid, h, w);
}

WoodburyCache::WoodburyCache(const SensingOperator& op, double beta) : beta_(beta) {
    const Eigen::MatrixXd& phi = op.matrix();
    rows_ = static_cast<int>(phi.rows());
    cols_ = phi.cols();
    op_seed_ = op.seed();
    matrix_sum_ = phi.sum();
    Eigen::MatrixXd v = phi * phi.transpose();
    v.diagonal().array() += beta;
    llt_.compute(v);
    if (llt_.info() != Eigen::Success)
        throw Error("WoodburyCache: factorization of beta*I + Phi*Phi^T failed");
}

bool WoodburyCache::matches(const SensingOperator& op, double beta) const {
    if (op.kind() != SensingOperator::Kind::DenseGaussian) return false;
    const Eigen::MatrixXd& phi = op.matrix();
    return beta == beta_ && phi.rows() == rows_ && phi.cols() == cols_ &&
           op.seed() == op_seed_ && phi.sum() == matrix_sum_;
}

Image x_update_dense(const AdmmState& state, const SensingOperator& op,
                     const Measurement& y, const SolverConfig& cfg,
                     const WoodburyCache& cache) {
    if (op.kind() != SensingOperator::Kind::DenseGaussian)
        throw WrongOperatorVariant("x_update_dense: operator is not dense Gaussian");
    if (!cache.matches(op, cfg.beta))
        throw CacheMismatch("x_update_dense: cache built for a different operator or beta");

    const Eigen::MatrixXd& phi = op.matrix();
    Eigen::VectorXd yv(op.output_dim());
    for (int i = 0; i < op.output_dim(); ++i) yv(i) = y.values[i].real();

    Eigen::VectorXd rhs = phi.transpose() * yv;
    for (Eigen::Index i = 0; i < rhs.size(); ++i)
        rhs(i) += cfg.beta * state.z.pixels[i] - 0.5 * state.mu.pixels[i];

    // beta^{-1} (I - Phi^T V^{-1} Phi) rhs with V = beta I + Phi Phi^T
    Eigen::VectorXd xv =
        (rhs - phi.transpose() * cache.llt().solve(phi * rhs)) / cfg.beta;
    Image out(op.input_height(), op.input_width());
    Eigen::Map<Eigen::VectorXd>(out.pixels.data(), xv.size()) = xv;
    return out;
}

Image mu_update(const AdmmState& state, const SolverConfig& cfg) {
    Image mu = state.mu;
    for (size_t i = 0; i < mu.size(); ++i)
        mu.pixels[i] += 2.0 * cfg.beta * (state.x.pixels[i] - state.z.pixels[i]);
    return mu;
}

// --- full reconstruction ---------------------------------------------------

namespace {

double data_fidelity(const SensingOperator& op, const Measurement& y, const Image& x) {
    const Measurement fx = op.forward(x);
    double acc = 0.0;
    for (size_t i = 0; i < y.size(); ++i) acc += std::norm(y.values[i] - fx.values[i]);
    return std::sqrt(acc);
}

double lowrank_residual(const Image& x, const LowRankField& field) {
    double acc = 0.0;
    for (size_t p = 0; p < field.groups.size(); ++p) {
        const Tensor3 gathered = form_tensor(x, field.groups[p]);
        const Tensor3& l = field.lowrank_tensors[p];
        for (size_t i = 0; i < gathered.data.size(); ++i) {
            const double d = gathered.data[i] - l.data[i];
            acc += d * d;
        }
    }
    return acc;
}

}  // namespace

std::pair<Image, RunReport> reconstruct(const SensingOperator& op, const Measurement& y,
                                        const SolverConfig& cfg, uint64_t seed,
                                        const Image* reference) {
    cfg.validate();
    if (static_cast<int>(y.size()) != op.output_dim())
        throw DimensionMismatch("reconstruct: measurement length does not match operator");

    RunReport report;
    const bool fourier = op.kind() == SensingOperator::Kind::PartialFourier;
    std::optional<WoodburyCache> cache;
    if (!fourier) cache.emplace(op, cfg.beta);
    report.inverter = fourier ? "fourier-diagonal" : "exact-woodbury";

    Image x = init_estimate(op, y);
    {
        RunReportRow row;
        row.outer_iter = -1;  // the initial estimate
        row.data_fidelity = data_fidelity(op, y, x);
        row.lowrank_residual = 0.0;
        row.psnr_vs_ref = reference ? psnr(*reference, x)
                                    : std::numeric_limits<double>::quiet_NaN();
        report.rows.push_back(row);
    }

    for (int i = 0; i < cfg.outer_iters; ++i) {
        const auto t0 = std::chrono::steady_clock::now();
        const LowRankField field = build_lowrank_field(x, cfg, mix_seed(seed + i));

        AdmmState state;
        state.x = x;
        state.z = Image(x.height, x.width);
        state.mu = Image(x.height, x.width, 0.0);
        state.outer_iter = i;
        for (int j = 0; j < cfg.inner_iters; ++j) {
            state.inner_iter = j;
            state.z = z_update(state, field, cfg);
            state.x = fourier ? x_update_fourier(state, op, y, cfg)
                              : x_update_dense(state, op, y, cfg, *cache);
            state.mu = mu_update(state, cfg);
        }

        const Image prev = std::move(x);
        x = std::move(state.x);

        RunReportRow row;
        row.outer_iter = i;
        row.data_fidelity = data_fidelity(op, y, x);
        row.lowrank_residual = lowrank_residual(x, field);
        row.degenerate_count = field.degenerate_count;
        row.psnr_vs_ref = reference ? psnr(*reference, clamp_to_byte_range(x))
                                    : std::numeric_limits<double>::quiet_NaN();
        row.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        report.rows.push_back(row);

        if (cfg.early_exit_tol > 0.0) {
            double dn = 0.0, xn = 0.0;
            for (size_t q = 0; q < x.size(); ++q) {
                const double d = x.pixels[q] - prev.pixels[q];
                dn += d * d;
                xn += prev.pixels[q] * prev.pixels[q];
            }
            if (xn > 0.0 && std::sqrt(dn / xn) < cfg.early_exit_tol) break;
        }
    }
    return {clamp_to_byte_range(x), std::move(report)};
}

// --- report ---------------------------------------------------------------

void RunReport::write_csv(const std::string& path, bool with_psnr) const {
    std::ofstream f(path, std::ios::trunc);
    if (!f) throw IoError("cannot open for writing: " + path);
    f << "outer_iter,data_fidelity,lowrank_residual,psnr_vs_ref,degenerate_count,seconds\n";
    char buf[256];
    for (const auto& r : rows) {
        std::string psnr_field;
        if (with_psnr && !std::isnan(r.psnr_vs_ref)) {
            if (std::isinf(r.psnr_vs_ref)) {
                psnr_field = "inf";
            } else {
                std::snprintf(buf, sizeof buf, "%.4f", r.psnr_vs_ref);
                psnr_field = buf;
            }
        }
        std::snprintf(buf, sizeof buf, "%d,%.8e,%.8e,%s,%d,%.3f\n", r.outer_iter,
                      r.data_fidelity, r.lowrank_residual, psnr_field.c_str(),
                      r.degenerate_count, r.seconds);
        f << buf;
    }
    if (!f) throw IoError("write failed: " + path);
}

}  // namespace nlrtfa
