#include "nlrtfa/tensor_cp.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <random>

namespace nlrtfa {

namespace {

constexpr double kPairTol = 1e-6;    // relative tolerance for reciprocal pairing
constexpr double kImagTol = 1e-6;    // |Im| / |lambda| above which an eigenpair is discarded
constexpr double kPinvTol = 1e-10;   // singular values below kPinvTol * sigma_max are zero

struct RealEigenPair {
    double value;
    Eigen::VectorXd vector;  // unit norm, sign-canonicalized
};

Eigen::MatrixXd pseudo_inverse(const Eigen::MatrixXd& m, int* rank_out) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& sv = svd.singularValues();
    const double smax = sv.size() > 0 ? sv(0) : 0.0;
    Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
    int rank = 0;
    for (Eigen::Index i = 0; i < sv.size(); ++i) {
        if (sv(i) > kPinvTol * smax) {
            inv(i) = 1.0 / sv(i);
            ++rank;
        }
    }
    if (rank_out) *rank_out = rank;
    return svd.matrixV() * inv.asDiagonal() * svd.matrixU().transpose();
}

/// Real eigenpairs of a real matrix, discarding pairs whose imaginary part
/// exceeds kImagTol relative to the eigenvalue magnitude.
std::vector<RealEigenPair> real_eigenpairs(const Eigen::MatrixXd& m) {
    Eigen::EigenSolver<Eigen::MatrixXd> es(m);
    if (es.info() != Eigen::Success) return {};
    std::vector<RealEigenPair> out;
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const std::complex<double> lam = es.eigenvalues()(i);
        if (std::abs(lam.imag()) > kImagTol * std::max(std::abs(lam), 1e-300)) continue;
        Eigen::VectorXcd vc = es.eigenvectors().col(i);
        // rotate the phase so the largest-magnitude component is real positive
        Eigen::Index imax = 0;
        vc.cwiseAbs().maxCoeff(&imax);
        const std::complex<double> pivot = vc(imax);
        if (std::abs(pivot) == 0.0) continue;
        vc *= std::conj(pivot) / std::abs(pivot);
        Eigen::VectorXd v = vc.real();
        const double n = v.norm();
        if (n == 0.0) continue;
        v /= n;
        out.push_back({lam.real(), std::move(v)});
    }
    std::sort(out.begin(), out.end(),
              [](const RealEigenPair& a, const RealEigenPair& b) {
                  return std::abs(a.value) > std::abs(b.value);
              });
    return out;
}

CpFactors jenrich_attempt(const Tensor3& t, std::mt19937_64& rng) {
    const int m = t.rows, n = t.cols, k = t.slices;

    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXd u(k), v(k);
    for (int s = 0; s < k; ++s) u(s) = gauss(rng);
    for (int s = 0; s < k; ++s) v(s) = gauss(rng);
    u.normalize();
    v.normalize();

    Eigen::MatrixXd tu = Eigen::MatrixXd::Zero(m, n);
    Eigen::MatrixXd tv = Eigen::MatrixXd::Zero(m, n);
    for (int s = 0; s < k; ++s)
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) {
                const double x = t.at(i, j, s);
                tu(i, j) += u(s) * x;
                tv(i, j) += v(s) * x;
            }

    int rank_v = 0, rank_u = 0;
    const Eigen::MatrixXd pinv_tv = pseudo_inverse(tv, &rank_v);
    const Eigen::MatrixXd pinv_tu_t = pseudo_inverse(tu.transpose(), &rank_u);
    const int rank_cap = std::min(rank_u, rank_v);
    if (rank_cap == 0) throw DegenerateEigensystem("jenrich: contractions are rank zero");

    // a_r: eigenvectors of T_u T_v^+ with eigenvalues alpha_r;
    // b_r: eigenvectors of T_v^T (T_u^T)^+ whose spectrum is exactly {1/alpha_r},
    // which is what makes reciprocal pairing exact.
    auto apairs = real_eigenpairs(tu * pinv_tv);
    auto bpairs = real_eigenpairs(tv.transpose() * pinv_tu_t);
    auto keep_nonzero = [](std::vector<RealEigenPair>& ps, int cap) {
        std::vector<RealEigenPair> kept;
        for (auto& p : ps) {
            if (static_cast<int>(kept.size()) == cap) break;
            if (p.value != 0.0) kept.push_back(std::move(p));
        }
        ps = std::move(kept);
    };
    keep_nonzero(apairs, rank_cap);
    keep_nonzero(bpairs, rank_cap);
    if (apairs.empty() || bpairs.empty())
        throw DegenerateEigensystem("jenrich: no usable real eigenpairs");

    for (size_t i = 0; i < apairs.size(); ++i)
        for (size_t j = i + 1; j < apairs.size(); ++j)
            if (std::abs(apairs[i].value - apairs[j].value) <=
                kPairTol * std::max(std::abs(apairs[i].value), std::abs(apairs[j].value)))
                throw DegenerateEigensystem("jenrich: repeated eigenvalues");

    // Pair each a-eigenvalue alpha with the b-eigenvalue nearest 1/alpha.
    std::vector<char> used(bpairs.size(), 0);
    std::vector<std::pair<int, int>> pairs;
    for (size_t ia = 0; ia < apairs.size(); ++ia) {
        int best = -1;
        double best_res = std::numeric_limits<double>::infinity();
        double second = best_res;
        for (size_t ib = 0; ib < bpairs.size(); ++ib) {
            if (used[ib]) continue;
            const double res = std::abs(bpairs[ib].value * apairs[ia].value - 1.0);
            if (res < best_res) {
                second = best_res;
                best_res = res;
                best = static_cast<int>(ib);
            } else if (res < second) {
                second = res;
            }
        }
        if (best < 0 || best_res > kPairTol)
            throw DegenerateEigensystem("jenrich: reciprocal pairing failed");
        if (second <= kPairTol)
            throw DegenerateEigensystem("jenrich: ambiguous reciprocal pairing");
        used[best] = 1;
        pairs.emplace_back(static_cast<int>(ia), best);
    }

    const int r = static_cast<int>(pairs.size());
    Eigen::MatrixXd A(m, r), B(n, r);
    for (int c = 0; c < r; ++c) {
        A.col(c) = apairs[pairs[c].first].vector;
        B.col(c) = bpairs[pairs[c].second].vector;
    }

    // Recover C and lambda: per slice s, least squares over w(s) in
    // T[:,:,s] ~= sum_r w_r(s) a_r b_r^T. Normal-equation Gram is
    // G_{rq} = (a_r.a_q)(b_r.b_q), factorized once for all slices.
    const Eigen::MatrixXd G =
        (A.transpose() * A).cwiseProduct(B.transpose() * B);
    Eigen::MatrixXd H(k, r);  // H(s, r) = a_r^T T_s b_r
    for (int s = 0; s < k; ++s) {
        Eigen::MatrixXd ts(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) ts(i, j) = t.at(i, j, s);
        H.row(s) = (A.transpose() * ts * B).diagonal();
    }
    Eigen::LDLT<Eigen::MatrixXd> ldlt(G);
    if (ldlt.info() != Eigen::Success)
        throw DegenerateEigensystem("jenrich: singular factor gram matrix");
    Eigen::MatrixXd W = ldlt.solve(H.transpose()).transpose();  // k x r

    CpFactors f;
    f.A.resize(m, r);
    f.B.resize(n, r);
    f.C.resize(k, r);
    int kept = 0;
    for (int c = 0; c < r; ++c) {
        Eigen::VectorXd w = W.col(c);
        // sign convention: largest-|entry| of a and b positive, signs folded into w
        Eigen::Index ia = 0, ib = 0;
        A.col(c).cwiseAbs().maxCoeff(&ia);
        B.col(c).cwiseAbs().maxCoeff(&ib);
        double sa = A(ia, c) < 0 ? -1.0 : 1.0;
        double sb = B(ib, c) < 0 ? -1.0 : 1.0;
        const double lam = w.norm();
        if (lam < 1e-300) continue;
        f.A.col(kept) = sa * A.col(c);
        f.B.col(kept) = sb * B.col(c);
        f.C.col(kept) = (sa * sb / lam) * w;
        f.lambdas.push_back(lam);
        ++kept;
    }
    f.A.conservativeResize(m, kept);
    f.B.conservativeResize(n, kept);
    f.C.conservativeResize(k, kept);

    // Oblique-system guard: when the fit is not exact and a coefficient
    // exceeds the tensor norm, the component split rests on nearly parallel
    // eigenvectors (cancelling rank-1 terms) and truncating it would blow up.
    // Treated as a degenerate draw, like repeated eigenvalues.
    if (kept > 1) {
        double max_lambda = 0.0;
        for (int c = 0; c < kept; ++c) max_lambda = std::max(max_lambda, f.lambdas[c]);
        const double tnorm = frobenius_norm(t);
        if (max_lambda > 1.05 * tnorm) {
            Tensor3 fit(m, n, k);
            for (int c = 0; c < kept; ++c)
                for (int s = 0; s < k; ++s)
                    for (int i = 0; i < m; ++i)
                        for (int j = 0; j < n; ++j)
                            fit.at(i, j, s) +=
                                f.lambdas[c] * f.A(i, c) * f.B(j, c) * f.C(s, c);
            double res = 0.0;
            for (size_t i = 0; i < fit.data.size(); ++i) {
                const double d = fit.data[i] - t.data[i];
                res += d * d;
            }
            if (std::sqrt(res) > 1e-8 * tnorm)
                throw DegenerateEigensystem("jenrich: oblique component system");
        }
    }

    // sort components by descending lambda
    std::vector<int> order(kept);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return f.lambdas[a] > f.lambdas[b]; });
    CpFactors sorted;
    sorted.A.resize(m, kept);
    sorted.B.resize(n, kept);
    sorted.C.resize(k, kept);
    for (int c = 0; c < kept; ++c) {
        sorted.lambdas.push_back(f.lambdas[order[c]]);
        sorted.A.col(c) = f.A.col(order[c]);
        sorted.B.col(c) = f.B.col(order[c]);
        sorted.C.col(c) = f.C.col(order[c]);
    }
    return sorted;
}

}  // namespace

double frobenius_norm(const Tensor3& t) {
    double acc = 0.0;
    for (double x : t.data) acc += x * x;
    return std::sqrt(acc);
}

uint64_t mix_seed(uint64_t x) {
    x += 0x9E3779B97F4A7C15ull;
    uint64_t z = x;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
    return z ^ (z >> 31);
}

CpFactors jenrich_decompose(const Tensor3& t, uint64_t rng_seed) {
    if (t.rows < 2 || t.cols < 2 || t.slices < 2)
        throw DimensionMismatch("jenrich_decompose: need m, n, k >= 2");

    if (frobenius_norm(t) < 1e-12 * static_cast<double>(t.size())) {
        CpFactors empty;
        empty.A.resize(t.rows, 0);
        empty.B.resize(t.cols, 0);
        empty.C.resize(t.slices, 0);
        return empty;
    }

    constexpr int kRetries = 3;
    for (int attempt = 0;; ++attempt) {
        const uint64_t seed =
            attempt == 0 ? rng_seed : mix_seed(rng_seed + static_cast<uint64_t>(attempt));
        std::mt19937_64 rng(seed);
        try {
            return jenrich_attempt(t, rng);
        } catch (const DegenerateEigensystem&) {
            if (attempt == kRetries) throw;
        }
    }
}

CpFactors truncate_rank(const CpFactors& f, int ell) {
    if (ell < 1) throw Error("truncate_rank: ell must be >= 1");
    const int keep = std::min<int>(ell, f.rank());
    if (keep == f.rank()) return f;
    CpFactors out;
    out.lambdas.assign(f.lambdas.begin(), f.lambdas.begin() + keep);
    out.A = f.A.leftCols(keep);
    out.B = f.B.leftCols(keep);
    out.C = f.C.leftCols(keep);
    return out;
}

Tensor3 reconstruct_cp(const CpFactors& f, int m, int n, int k) {
    if (f.rank() > 0 && (f.A.rows() != m || f.B.rows() != n || f.C.rows() != k))
        throw DimensionMismatch("reconstruct_cp: factor row counts do not match dims");
    Tensor3 t(m, n, k);
    for (int r = 0; r < f.rank(); ++r) {
        const double lam = f.lambdas[r];
        for (int s = 0; s < k; ++s) {
            const double lc = lam * f.C(s, r);
            for (int i = 0; i < m; ++i) {
                const double la = lc * f.A(i, r);
                for (int j = 0; j < n; ++j) t.at(i, j, s) += la * f.B(j, r);
            }
        }
    }
    return t;
}

}  // namespace nlrtfa
